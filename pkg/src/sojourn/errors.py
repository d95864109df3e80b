"""Exception types shared across the library."""


class SojournError(Exception):
    """Base class for all library errors."""


class ValidationError(SojournError, ValueError):
    """A model or parameter block violates its invariants."""


class NumericalError(SojournError, ArithmeticError):
    """A numerical routine failed to reach its accuracy contract."""


class NearMultipleRoots(NumericalError):
    """Two roots of the exponent equation are too close to separate.

    Signals a killing rate outside the almost-everywhere set where all
    roots are simple.  The default policy perturbs the rate and retries
    once; strict mode surfaces this error instead.
    """


class DegenerateConfiguration(NumericalError):
    """A root of the shifted exponent equation collides with an unshifted one."""


class InversionDomainError(SojournError, ValueError):
    """A Laplace-inversion abscissa fell outside the transform's domain."""
