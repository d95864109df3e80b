"""Exponential-polynomial mixture algebra.

The closed-form carrier used throughout the library: finite sums

    f(x) = sum_i  a_i * x^{k_i} * exp(-rho_i * x)        on [0, inf)

with complex coefficients/rates occurring in conjugate pairs, plus an
optional point mass at 0.  The class is closed under addition, scaling,
convolution on the half-line, definite integration and Laplace
transforms, each exact in the parameter algebra (no quadrature).

Two-sided densities (e.g. the law of a difference of one-sided laws) are
handled by :class:`TwoSidedMixture`, a pair of half-line mixtures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._ratfun import binom

_MERGE_TOL = 1e-11
_COINCIDE_TOL = 1e-9


def poly_exp_integral(k: int, c: complex, lo: float, hi: float, pref: complex = 0.0) -> complex:
    """Exact ``exp(pref) * int_lo^hi w^k exp(c w) dw`` for integer ``k >= 0``.

    ``hi`` may be ``inf`` when ``Re(c) < 0``.  The log-prefactor ``pref`` is
    folded into the antiderivative's exponent so a decaying combined exponent
    never overflows through an intermediate.  Small ``|c|`` is handled by a
    series branch to avoid cancellation.
    """
    if k < 0:
        raise ValueError("power must be nonnegative")
    if hi == lo:
        return 0.0 + 0.0j
    span = max(abs(lo), abs(hi) if math.isfinite(hi) else 0.0, 1.0)
    # The antiderivative difference loses ~ k!/(|c| span)^{k+1} digits when
    # the exponent barely varies over the interval; switch to the plain
    # power-series expansion well before that bites.
    if math.isfinite(hi) and abs(c) * span < 2.0 and span < 1e5:
        total = 0.0 + 0.0j
        cn = 1.0 + 0.0j
        for n in range(30):
            m = k + n + 1
            total += cn * (hi**m - lo**m) / m
            cn *= c / (n + 1)
        return total * _safe_exp(pref)

    def anti(w: float) -> complex:
        # int w^k e^{cw} dw = e^{cw} sum_j (-1)^j k!/(k-j)! w^{k-j} / c^{j+1}
        acc = 0.0 + 0.0j
        coef = 1.0
        for j in range(k + 1):
            acc += ((-1) ** j) * coef * (w ** (k - j)) / (c ** (j + 1))
            coef *= k - j
        return _safe_exp(c * w + pref) * acc

    if math.isfinite(hi):
        return anti(hi) - anti(lo)
    if c.real >= 0:
        raise ValueError("divergent integral: Re(c) >= 0 with infinite bound")
    return -anti(lo)


def _safe_exp(z: complex) -> complex:
    if np.real(z) < -745.0:
        return 0.0 + 0.0j
    return np.exp(z)


def _conv_term(a, rho, j, b, lam, k):
    """Convolution of two monomial-exponential terms, as a term list."""
    scale = max(abs(rho), abs(lam), 1.0)
    if abs(rho - lam) <= _COINCIDE_TOL * scale:
        r = 0.5 * (rho + lam)
        coef = a * b * math.factorial(j) * math.factorial(k) / math.factorial(j + k + 1)
        return [(coef, r, j + k + 1)]
    # Laplace image a j! b k! / ((s+rho)^{j+1} (s+lam)^{k+1}); expand in
    # partial fractions and invert 1/(s+r)^i -> x^{i-1} e^{-rx} / (i-1)!.
    pref = a * b * math.factorial(j) * math.factorial(k)
    out = []
    m, n = j + 1, k + 1
    for r in range(m):
        coef = pref * ((-1) ** r) * binom(n - 1 + r, r) / (lam - rho) ** (n + r)
        i = m - r
        out.append((coef / math.factorial(i - 1), rho, i - 1))
    for r in range(n):
        coef = pref * ((-1) ** r) * binom(m - 1 + r, r) / (rho - lam) ** (m + r)
        i = n - r
        out.append((coef / math.factorial(i - 1), lam, i - 1))
    return out


@dataclass(frozen=True)
class ExpMixFunction:
    """``x -> sum a x^k exp(-rho x)`` on [0, inf), plus an optional atom at 0.

    ``terms`` holds ``(a, rho, k)`` triples.  The atom is carried alongside so
    distributions with a point mass at the origin stay in one object; it takes
    part in convolutions, total masses and transforms but not in pointwise
    ``__call__`` evaluation (which returns the density part).
    """

    terms: tuple[tuple[complex, complex, int], ...] = field(default_factory=tuple)
    atom: float = 0.0

    # -- construction -----------------------------------------------------

    @staticmethod
    def from_terms(terms, atom: float = 0.0) -> "ExpMixFunction":
        merged = _merge(terms)
        return ExpMixFunction(tuple(merged), float(atom))

    @staticmethod
    def zero() -> "ExpMixFunction":
        return ExpMixFunction((), 0.0)

    @staticmethod
    def single(a: complex, rho: complex, k: int = 0) -> "ExpMixFunction":
        return ExpMixFunction(((complex(a), complex(rho), int(k)),), 0.0)

    @staticmethod
    def point_mass(mass: float) -> "ExpMixFunction":
        return ExpMixFunction((), float(mass))

    # -- evaluation --------------------------------------------------------

    def evaluate_complex(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for a, rho, k in self.terms:
            out += a * np.power(x, k, dtype=float) * np.exp(-rho * x)
        return out

    def __call__(self, x):
        val = self.evaluate_complex(x)
        return val.real if np.ndim(x) else float(val.real)

    def max_imag(self, x) -> float:
        """Largest |imaginary part| of the evaluation on a grid (pairing check)."""
        return float(np.max(np.abs(self.evaluate_complex(x).imag)))

    # -- linear structure ----------------------------------------------------

    def __add__(self, other: "ExpMixFunction") -> "ExpMixFunction":
        return ExpMixFunction.from_terms(self.terms + other.terms, self.atom + other.atom)

    def __neg__(self) -> "ExpMixFunction":
        return self.scale(-1.0)

    def __sub__(self, other: "ExpMixFunction") -> "ExpMixFunction":
        return self + other.scale(-1.0)

    def scale(self, c: complex) -> "ExpMixFunction":
        if np.iscomplexobj(np.asarray(c)) and abs(complex(c).imag) > 0:
            raise ValueError("scaling by a complex factor would break conjugate pairing")
        c = float(np.real(c))
        return ExpMixFunction(tuple((a * c, rho, k) for a, rho, k in self.terms), self.atom * c)

    def exp_tilt(self, c: complex) -> "ExpMixFunction":
        """Multiply pointwise by ``exp(-c x)`` (shifts every rate by ``c``)."""
        return ExpMixFunction(
            tuple((a, rho + c, k) for a, rho, k in self.terms), self.atom
        )

    # -- calculus ------------------------------------------------------------

    def definite_integral(self, lo: float, hi: float) -> float:
        """``int_lo^hi`` of the density part (atom excluded), clipped to [0, inf)."""
        lo = max(lo, 0.0)
        if hi <= lo:
            return 0.0
        total = 0.0 + 0.0j
        for a, rho, k in self.terms:
            total += a * poly_exp_integral(k, -rho, lo, hi)
        return float(total.real)

    def total_mass(self) -> float:
        """Atom plus ``int_0^inf`` of the density (rates must decay)."""
        return self.atom + self.definite_integral(0.0, math.inf)

    def laplace(self, s: complex) -> complex:
        """``atom + int_0^inf e^{-sx} f(x) dx = atom + sum a k! / (s+rho)^{k+1}``."""
        out = complex(self.atom)
        for a, rho, k in self.terms:
            out += a * math.factorial(k) / (s + rho) ** (k + 1)
        return out

    def convolve(self, other: "ExpMixFunction") -> "ExpMixFunction":
        """Convolution on [0, inf); exact in the parameter algebra.

        Coincident rates merge into higher-power terms rather than failing.
        """
        out: list[tuple[complex, complex, int]] = []
        for a, rho, j in self.terms:
            for b, lam, k in other.terms:
                out.extend(_conv_term(a, rho, j, b, lam, k))
        if self.atom:
            out.extend((self.atom * b, lam, k) for b, lam, k in other.terms)
        if other.atom:
            out.extend((other.atom * a, rho, k) for a, rho, k in self.terms)
        return ExpMixFunction.from_terms(out, self.atom * other.atom)

    def weighted_integral(
        self, k: int, c: complex, lo: float, hi: float, pref: complex = 0.0
    ) -> complex:
        """``exp(pref) * int w^k e^{c w} f(w) dw`` over [lo, hi] (density part)."""
        lo = max(lo, 0.0)
        if hi <= lo:
            return 0.0 + 0.0j
        total = 0.0 + 0.0j
        for a, rho, kk in self.terms:
            total += a * poly_exp_integral(kk + k, c - rho, lo, hi, pref)
        return total


def _merge(terms):
    cleaned = [(complex(a), complex(rho), int(k)) for a, rho, k in terms if a != 0]
    cleaned.sort(key=lambda t: (t[2], t[1].real, t[1].imag))
    merged: list[tuple[complex, complex, int]] = []
    for a, rho, k in cleaned:
        if merged:
            a0, rho0, k0 = merged[-1]
            if k0 == k and abs(rho - rho0) <= _MERGE_TOL * (1.0 + abs(rho0)):
                merged[-1] = (a0 + a, rho0, k0)
                continue
        merged.append((a, rho, k))
    return [t for t in merged if abs(t[0]) > 0.0]


@dataclass(frozen=True)
class TwoSidedMixture:
    """Density on the whole line built from two half-line mixtures.

    ``pos`` is the density on x > 0; ``neg`` is the density of the reflected
    negative part, i.e. the value at x < 0 is ``neg(-x)``.
    """

    neg: ExpMixFunction
    pos: ExpMixFunction

    def density(self, x: float) -> float:
        return self.pos(x) if x >= 0.0 else self.neg(-x)

    def cdf(self, x: float) -> float:
        if x <= 0.0:
            return self.neg.definite_integral(-x, math.inf)
        return self.neg.total_mass() + self.pos.definite_integral(0.0, x) + self.pos.atom

    def total_mass(self) -> float:
        return self.neg.total_mass() + self.pos.total_mass()

    def char_function(self, phi: float) -> complex:
        """``E[e^{i phi Z}]`` for a random variable with this density.

        A point mass at 0 is counted once (through the positive part).
        """
        return self.pos.laplace(-1j * phi) + self.neg.laplace(1j * phi) - self.neg.atom

    def reflected(self) -> "TwoSidedMixture":
        return TwoSidedMixture(neg=self.pos, pos=self.neg)

    def segment_convolve(self, f: ExpMixFunction, v: float, c: float) -> float:
        """``int_0^c f(w) * density(v - w) dw`` for a half-line mixture ``f``.

        The argument of the two-sided density changes sign at ``w = v``; the
        integral is split there and each piece is evaluated in closed form.
        Exponential prefactors are carried in log form so far-tail arguments
        underflow to zero instead of overflowing through an intermediate.
        """
        if c <= 0.0:
            return 0.0
        total = 0.0 + 0.0j
        split = min(max(v, 0.0), c)
        # w in (0, split): v - w >= 0, positive branch
        if split > 0.0:
            for b, lam, l in self.pos.terms:
                # b (v-w)^l e^{-lam (v-w)}: expand (v-w)^l binomially
                for r in range(l + 1):
                    coef = b * binom(l, r) * (v ** (l - r)) * ((-1.0) ** r)
                    total += coef * f.weighted_integral(r, lam, 0.0, split, pref=-lam * v)
        # w in (split, c): v - w <= 0, reflected branch evaluated at w - v
        if c > split:
            if v <= 0.0:
                for b, lam, l in self.neg.terms:
                    # b (w-v)^l e^{-lam (w-v)}
                    for r in range(l + 1):
                        coef = b * binom(l, r) * ((-v) ** (l - r))
                        total += coef * f.weighted_integral(r, -lam, split, c, pref=lam * v)
            else:
                # substitute u = w - v and expand f(u + v) so every exponent decays
                for a, rho, k in f.terms:
                    for r in range(k + 1):
                        coef = a * binom(k, r) * (v ** (k - r))
                        total += coef * self.neg.weighted_integral(
                            r, -rho, 0.0, c - v, pref=-rho * v
                        )
        return float(total.real)


def product_integral(f: ExpMixFunction, g: ExpMixFunction, v: float, lo: float, hi: float) -> float:
    """``int_lo^hi f(v - z) g(z) dz`` for half-line mixtures ``f`` and ``g``.

    The integrand vanishes outside ``0 <= z <= v``; limits are clipped
    accordingly, so callers may pass natural (unclipped) bounds.
    """
    lo = max(lo, 0.0)
    hi = min(hi, v)
    if hi <= lo:
        return 0.0
    total = 0.0 + 0.0j
    for a, rho, j in f.terms:
        # a (v-z)^j e^{-rho (v-z)}
        for r in range(j + 1):
            coef = a * binom(j, r) * (v ** (j - r)) * ((-1.0) ** r)
            total += coef * g.weighted_integral(r, rho, lo, hi, pref=-rho * v)
    return float(total.real)
