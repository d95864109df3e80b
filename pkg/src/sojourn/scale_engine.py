"""Independent spectrally negative pipeline built on scale functions.

For rational models without upward jumps the scale function is an exact
exponential mixture (partial fractions of ``1/(psi(s) - q)``), and the
occupation-weighted joint density has a closed form in terms of two scale
functions, the dominant exponent ``Phi`` at the two killing rates, and a pair
of one-sided exponential factors.  This route shares no code with the
Wiener-Hopf convolution route beyond the root solver, which makes it an
independent cross-check of the same quantity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .expmix import ExpMixFunction, TwoSidedMixture, product_integral
from .model import LaplaceExponent
from .occupation import FKernel, convolution_density_below
from .wiener_hopf import solve_roots

_SMALL_P = 1e-4
_CANCEL_TOL = 1e-7


def _require_spectrally_negative(exponent: LaplaceExponent) -> None:
    if not exponent.model.spectrally_negative:
        raise ValidationError("scale-function engine requires a model without upward jumps")


def phi(exponent: LaplaceExponent, q: float) -> float:
    """Largest real root of ``psi(s) = q`` (the dominant transform pole)."""
    _require_spectrally_negative(exponent)
    if not q > 0.0:
        raise ValueError("killing rate q must be positive")
    roots = solve_roots(exponent, q)
    val = float(roots.betas[0].real)
    if exponent.derivative(val).real <= 0.0:
        raise ValidationError("exponent not increasing at its dominant root")
    return val


@dataclass(frozen=True)
class ScaleFunction:
    """``W^{(q)}``: zero on the negative axis, exponential mixture on [0, inf)."""

    q: float
    phi: float
    w: ExpMixFunction

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x >= 0.0, self.w(np.maximum(x, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def transform(self, s) -> complex:
        """Laplace transform; equals ``1/(psi(s) - q)`` for ``Re s > phi``."""
        return self.w.laplace(s)


def scale_w(exponent: LaplaceExponent, q: float) -> ScaleFunction:
    """Exact partial-fraction inversion of ``1/(psi(s) - q)``.

    One mixture term per root of the exponent equation: the dominant real
    root contributes the growing exponential, the remaining roots decay.
    """
    _require_spectrally_negative(exponent)
    roots = solve_roots(exponent, q)
    thetas = np.concatenate([roots.betas, -roots.gammas])
    terms = []
    for th in thetas:
        terms.append((1.0 / exponent.derivative(th), -th, 0))
    return ScaleFunction(q=q, phi=float(roots.betas[0].real), w=ExpMixFunction.from_terms(terms))


def sn_kernels(exponent: LaplaceExponent, q: float, p: float):
    """Closed-form kernels of the convolution identity on this subfamily.

    Returns ``(F1, f2hat, kq_reflected)``:

    * ``F1`` - correction kernel with atom ``Phi(q)/Phi(p+q)`` and a single
      exponential density;
    * ``f2hat`` - scale-type kernel on [0, inf) built from ``W^{(p+q)}``;
    * ``kq_reflected`` - the mixture ``u -> k_q(-u)`` on [0, inf) (the kernel
      itself lives on the negative axis).
    """
    _require_spectrally_negative(exponent)
    if not (p > 0.0 and q > 0.0):
        raise ValueError("this route requires p > 0 and q > 0")
    wq = scale_w(exponent, q)
    wxi = scale_w(exponent, p + q)
    phi_q, phi_xi = wq.phi, wxi.phi
    f1 = FKernel(
        atom_mass=phi_q / phi_xi,
        density=ExpMixFunction.single((phi_xi - phi_q) / phi_xi * phi_q, phi_q, 0),
        tag="F1",
    )
    grow_q = ExpMixFunction.single(1.0, -phi_q, 0)
    f2hat = wxi.w + grow_q.convolve(wxi.w).scale(phi_q - phi_xi)
    grow_xi = ExpMixFunction.single(1.0, -phi_xi, 0)
    kq_reflected = wq.w + grow_xi.convolve(wq.w).scale(phi_xi - phi_q)
    return f1, f2hat, kq_reflected


@dataclass(frozen=True)
class SnOccupationDensity:
    """Evaluator of the occupation-weighted joint density, scale-function route."""

    exponent: LaplaceExponent
    p: float
    q: float
    w_q: ScaleFunction
    w_xi: ScaleFunction

    @property
    def phi_q(self) -> float:
        return self.w_q.phi

    @property
    def phi_xi(self) -> float:
        return self.w_xi.phi

    def start_factor(self, u: float) -> float:
        """Exponential factor in the starting position, normalized to 1 at 0.

        For ``u > 0`` evaluated through the tail integral of ``W^{(q)}``
        against ``exp(-Phi(p+q) z)``, which avoids cancellation between the
        growing exponential and the compensating integral.
        """
        if u <= 0.0:
            return math.exp(self.phi_xi * u)
        tail = self.w_q.w.weighted_integral(0, -self.phi_xi, u, math.inf).real
        return math.exp(self.phi_xi * u) * self.p * tail

    def target_factor(self, v: float) -> float:
        """Exponential factor in the terminal position, normalized to 1 at 0."""
        if v <= 0.0:
            return math.exp(self.phi_q * v)
        inner = self.w_xi.w.weighted_integral(0, -self.phi_q, 0.0, v).real
        return math.exp(self.phi_q * v) * (1.0 + self.p * inner)

    def occupation_scale(self, u: float, v: float) -> float:
        """Barrier-corrected scale value ``W^{(q)}(v) + p int_u^v W^{(p+q)}(v-z) W^{(q)}(z) dz``.

        Reduces to the plain scale function when the integration window is
        empty (target above the barrier).
        """
        base = float(self.w_q(v))
        corr = product_integral(self.w_xi.w, self.w_q.w, v, u, v)
        return base + self.p * corr

    def density(self, x: float, b: float, y: float) -> float:
        q, p = self.q, self.p
        if p >= _SMALL_P:
            coef = q / p * (self.phi_xi - self.phi_q)
        else:
            # first-order expansion of Phi(p+q) - Phi(q) removes the 0/0
            coef = q / self.exponent.derivative(self.phi_q).real
        val = -q * self.occupation_scale(x - b, x - y) + coef * self.start_factor(
            x - b
        ) * self.target_factor(b - y)
        return val


def sn_density(exponent: LaplaceExponent, p: float, q: float) -> SnOccupationDensity:
    _require_spectrally_negative(exponent)
    if not (p > 0.0 and q > 0.0):
        raise ValueError("this route requires p > 0 and q > 0")
    return SnOccupationDensity(
        exponent=exponent, p=p, q=q, w_q=scale_w(exponent, q), w_xi=scale_w(exponent, p + q)
    )


def sn_joint_density(
    exponent: LaplaceExponent, x: float, b: float, y: float, p: float, q: float
) -> float:
    """Density in y of the below-weighted killed law, scale-function route."""
    return sn_density(exponent, p, q).density(x, b, y)


def _drop_growing(mix: ExpMixFunction, label: str) -> ExpMixFunction:
    """Strip terms with nonpositive decay after checking they cancelled.

    The scale-function representation writes decaying densities as
    differences of growing exponentials; once combined in coefficient space
    the growing rates must carry negligible weight.
    """
    keep, dropped = [], 0.0
    scale = max((abs(a) for a, _, _ in mix.terms), default=0.0)
    for a, rho, k in mix.terms:
        if rho.real > 1e-9:
            keep.append((a, rho, k))
        else:
            dropped = max(dropped, abs(a))
    if scale and dropped > _CANCEL_TOL * scale:
        raise NumericalError(
            f"{label}: growing exponential failed to cancel (residual {dropped:.3e})"
        )
    return ExpMixFunction.from_terms(keep, mix.atom)


@dataclass(frozen=True)
class SnConvolutionKernels:
    """Convolution-form kernels built purely from scale functions.

    Same three objects the rational route produces from the factor
    coefficients, here assembled from ``W`` and ``Phi`` with the growing
    exponentials cancelled in coefficient space; evaluation is therefore
    stable arbitrarily far into the tails.
    """

    q: float
    xi: float
    f1: FKernel
    f2hat: FKernel
    kq: TwoSidedMixture

    def density_below(self, x: float, b: float, y: float) -> float:
        return convolution_density_below(
            self.f1, self.f2hat, self.kq, self.q, self.xi, x, b, y
        )

    def occupation_transform(self, x: float, b: float) -> float:
        return 1.0 - (self.xi - self.q) / self.xi * self.kq.cdf(b - x)


def sn_convolution_kernels(exponent: LaplaceExponent, q: float, p: float) -> SnConvolutionKernels:
    """Assemble the correction kernels and the sum law on the scale route.

    Needs ``p`` not too small: the growing-term cancellation divides by p
    through the sum-law prefactor.
    """
    _require_spectrally_negative(exponent)
    if not (q > 0.0 and p >= 1e-6):
        raise ValueError("this construction requires q > 0 and p >= 1e-6")
    xi = p + q
    wq = scale_w(exponent, q)
    wxi = scale_w(exponent, xi)
    phi_q, phi_xi = wq.phi, wxi.phi

    f1 = FKernel(
        atom_mass=phi_q / phi_xi,
        density=ExpMixFunction.single((phi_xi - phi_q) / phi_xi * phi_q, phi_q, 0),
        tag="F1",
    )

    grow_q = ExpMixFunction.single(1.0, -phi_q, 0)
    f2hat_core = wxi.w + grow_q.convolve(wxi.w).scale(phi_q - phi_xi)
    pref = xi * phi_q / (q * phi_xi)
    f2hat_density = (
        ExpMixFunction.single(phi_q - phi_xi, -phi_q, 0) + f2hat_core.scale(p)
    ).scale(pref)
    f2hat = FKernel(
        atom_mass=pref, density=_drop_growing(f2hat_density, "f2hat density"), tag="F2hat"
    )

    grow_xi = ExpMixFunction.single(1.0, -phi_xi, 0)
    kq_reflected = wq.w + grow_xi.convolve(wq.w).scale(phi_xi - phi_q)
    amp = q / p * phi_xi * (phi_xi / phi_q - 1.0)
    neg = ExpMixFunction.single(amp, -phi_xi, 0) + kq_reflected.scale(-q * phi_xi / phi_q)
    kq = TwoSidedMixture(
        neg=_drop_growing(neg, "sum-law negative side"),
        pos=ExpMixFunction.single(amp, phi_xi, 0),
    )
    return SnConvolutionKernels(q=q, xi=xi, f1=f1, f2hat=f2hat, kq=kq)
