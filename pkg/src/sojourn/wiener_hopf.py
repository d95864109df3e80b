"""Root systems of the exponent equation and rational Wiener-Hopf factors.

For a rational-jump diffusion the equation ``psi(s) = q`` has, for almost all
``q > 0``, exactly ``M = sum m_k + 1`` simple roots with positive real part
(``beta``) and ``N = sum n_k + 1`` with negative real part (stored negated as
``gamma``).  The running supremum/infimum of the killed process then have
exponential-mixture laws whose coefficients are products over the roots, and
the one-sided exit laws follow from a rational expansion against the factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as npoly

from ._ratfun import pole_expansion
from .errors import NearMultipleRoots, NumericalError
from .expmix import ExpMixFunction
from .model import LaplaceExponent

_SEPARATION_TOL = 1e-7
_RESIDUAL_TOL = 1e-10
_PERTURB = 1e-6
_CONJ_TOL = 1e-9


@dataclass(frozen=True)
class RootSystem:
    """Roots of ``psi(s) = q`` split by half-plane.

    ``betas`` have positive real part; ``gammas`` are the negated roots from
    the left half-plane, so they also have positive real part.  The first
    entry of each is the unique real root closest to zero.
    """

    q: float
    betas: np.ndarray
    gammas: np.ndarray

    @property
    def m_up(self) -> int:
        return len(self.betas)

    @property
    def n_down(self) -> int:
        return len(self.gammas)


def _pair_conjugates(roots: np.ndarray, label: str) -> np.ndarray:
    """Symmetrize a root cloud into exact reals and exact conjugate pairs."""
    out = []
    used = np.zeros(len(roots), dtype=bool)
    order = np.lexsort((np.abs(roots.imag), roots.real))
    roots = roots[order]
    for i, r in enumerate(roots):
        if used[i]:
            continue
        if abs(r.imag) <= _CONJ_TOL * (1.0 + abs(r.real)):
            out.append(complex(r.real, 0.0))
            used[i] = True
            continue
        partner = None
        for j in range(i + 1, len(roots)):
            if used[j]:
                continue
            if abs(roots[j] - np.conj(r)) <= 1e-6 * (1.0 + abs(r)):
                partner = j
                break
        if partner is None:
            raise NumericalError(f"unpaired complex {label} root {r}")
        z = 0.5 * (r + np.conj(roots[partner]))
        out.extend([z, np.conj(z)])
        used[i] = True
        used[partner] = True
    out.sort(key=lambda z: (z.real, z.imag))
    return np.array(out, dtype=complex)


def _solve_once(exponent: LaplaceExponent, q: float) -> RootSystem:
    coeffs = exponent.shifted_numerator(q)
    coeffs = np.trim_zeros(coeffs, "b")
    raw = npoly.polyroots(coeffs)
    # Newton polish on the analytic form restores accuracy lost in the
    # coefficient representation.
    roots = raw.astype(complex)
    for _ in range(4):
        f = exponent(roots) - q
        fp = exponent.derivative(roots)
        step = np.where(np.abs(fp) > 0, f / fp, 0.0)
        roots = roots - step
    resid = np.abs(exponent(roots) - q)
    if np.any(resid > _RESIDUAL_TOL * (1.0 + q)):
        raise NumericalError(
            f"root polish failed: residual {float(np.max(resid)):.3e} at q={q}"
        )
    scale = 1.0 + float(np.max(np.abs(roots)))
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < _SEPARATION_TOL * scale:
                raise NearMultipleRoots(
                    f"roots {roots[i]:.8g} and {roots[j]:.8g} nearly coincide at q={q}"
                )
    betas = _pair_conjugates(roots[roots.real > 0], "positive")
    gammas = _pair_conjugates(-roots[roots.real < 0], "negative")
    model = exponent.model
    M = model.total_multiplicity_up + 1
    N = model.total_multiplicity_down + 1
    if len(betas) != M or len(gammas) != N:
        raise NumericalError(
            f"root split {len(betas)}/{len(gammas)} differs from expected {M}/{N} at q={q}"
        )
    if betas[0].imag != 0.0 or gammas[0].imag != 0.0:
        raise NumericalError("leading root is not real")
    return RootSystem(q=q, betas=betas, gammas=gammas)


def solve_roots(exponent: LaplaceExponent, q: float, strict: bool = False) -> RootSystem:
    """Solve ``psi(s) = q`` and classify the roots by half-plane.

    Near-multiple roots signal a killing rate in the exceptional (measure
    zero) set; unless ``strict``, the rate is perturbed once by
    ``1e-6 * (1 + q)`` and the solve retried.
    """
    if not (q > 0.0):
        raise ValueError("killing rate q must be positive")
    try:
        return _solve_once(exponent, q)
    except NearMultipleRoots:
        if strict:
            raise
        return _solve_once(exponent, q + _PERTURB * (1.0 + q))


@dataclass(frozen=True)
class WienerHopfFactors:
    """Coefficients of the supremum/infimum laws at an exponential time.

    ``sup_density`` is the law of the running maximum on [0, inf);
    ``inf_density`` is the law of the negated running minimum on [0, inf).
    """

    exponent: LaplaceExponent
    roots: RootSystem
    C: np.ndarray
    D: np.ndarray
    sup_density: ExpMixFunction
    inf_density: ExpMixFunction

    @property
    def q(self) -> float:
        return self.roots.q

    def psi_plus(self, s):
        """Transform of the supremum law, partial-fraction form."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for c, b in zip(self.C, self.roots.betas):
            out = out + c / (s + b)
        return out if out.ndim else complex(out)

    def psi_minus(self, s):
        """Transform of the infimum law (in ``E[e^{s inf}]`` orientation)."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for d, g in zip(self.D, self.roots.gammas):
            out = out + d / (s + g)
        return out if out.ndim else complex(out)

    def psi_plus_product(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.ones_like(s)
        for comp in self.exponent.model.up_components:
            out = out * ((s + comp.rate) / comp.rate) ** comp.multiplicity
        for b in self.roots.betas:
            out = out * b / (s + b)
        return out if out.ndim else complex(out)

    def psi_minus_product(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.ones_like(s)
        for comp in self.exponent.model.down_components:
            out = out * ((s + comp.rate) / comp.rate) ** comp.multiplicity
        for g in self.roots.gammas:
            out = out * g / (s + g)
        return out if out.ndim else complex(out)


def factors(rootsys: RootSystem, exponent: LaplaceExponent) -> WienerHopfFactors:
    """Assemble the factor coefficients from a solved root system."""
    model = exponent.model
    betas, gammas = rootsys.betas, rootsys.gammas
    C = np.empty(len(betas), dtype=complex)
    for i, b in enumerate(betas):
        val = b + 0.0j
        for comp in model.up_components:
            val *= ((comp.rate - b) / comp.rate) ** comp.multiplicity
        for k, bk in enumerate(betas):
            if k != i:
                val *= bk / (bk - b)
        C[i] = val
    D = np.empty(len(gammas), dtype=complex)
    for j, g in enumerate(gammas):
        val = g + 0.0j
        for comp in model.down_components:
            val *= ((comp.rate - g) / comp.rate) ** comp.multiplicity
        for k, gk in enumerate(gammas):
            if k != j:
                val *= gk / (gk - g)
        D[j] = val
    sup = ExpMixFunction.from_terms([(C[i], betas[i], 0) for i in range(len(betas))])
    inf = ExpMixFunction.from_terms([(D[j], gammas[j], 0) for j in range(len(gammas))])
    return WienerHopfFactors(
        exponent=exponent, roots=rootsys, C=C, D=D, sup_density=sup, inf_density=inf
    )


def solve_factors(exponent: LaplaceExponent, q: float, strict: bool = False) -> WienerHopfFactors:
    return factors(solve_roots(exponent, q, strict=strict), exponent)


def wh_product_residual(f: WienerHopfFactors, phi) -> np.ndarray:
    """|psi_q^+(-i phi) psi_q^-(i phi) (q - psi(i phi)) - q| on a grid."""
    phi = np.asarray(phi, dtype=float)
    prod = f.psi_plus(-1j * phi) * f.psi_minus(1j * phi)
    return np.abs(prod * (f.q - f.exponent(1j * phi)) - f.q)


def _passage_expansion(coeffs, roots, pole_rates, pole_mults, weights):
    """Shared rational expansion behind both one-sided exit laws.

    Solves ``atom + sum_{k,j} c_{kj} (rate_k/(rate_k+s))^j =
    (1/factor(s)) * sum_i coeffs_i w_i/(s+root_i)`` for the atom and the
    ladder coefficients, returning ``(atom, ExpMixFunction)``.
    """
    n = len(roots)
    prefactor = 1.0 + 0.0j
    for rate, mult in zip(pole_rates, pole_mults):
        prefactor *= rate**mult
    prefactor /= np.prod(roots)
    # numerator polynomial sum_i coeffs_i w_i prod_{k != i} (s + root_k)
    num = np.zeros(n, dtype=complex)
    for i in range(n):
        poly = np.array([1.0 + 0.0j])
        for k in range(n):
            if k != i:
                poly = npoly.polymul(poly, np.array([roots[k], 1.0 + 0.0j]))
        num = npoly.polyadd(num, coeffs[i] * weights[i] * poly)
    num = num * prefactor
    atom = num[-1] if len(num) == sum(pole_mults) + 1 else 0.0
    # when the numerator degenerates (leading coefficient ~ 0) the atom is 0
    atom = complex(atom)
    den_factors = [(-rate, mult) for rate, mult in zip(pole_rates, pole_mults)]
    terms = []
    for idx, (rate, mult) in enumerate(zip(pole_rates, pole_mults)):
        pf = pole_expansion(num, den_factors, idx)
        for j in range(1, mult + 1):
            terms.append((pf[j - 1] / math.factorial(j - 1), rate, j - 1))
    density = ExpMixFunction.from_terms(terms)
    if abs(atom.imag) > 1e-9 * (1.0 + abs(atom)):
        raise NumericalError(f"exit-law atom came out complex: {atom}")
    return float(atom.real), density


def first_passage_up(f: WienerHopfFactors, x: float):
    """Law of the first passage above level ``x >= 0`` killed at rate q.

    Returns ``(atom, overshoot_density)``: the atom is the (defective) mass of
    crossing by creeping, the density is the overshoot law on (0, inf); the
    pair integrates to ``E[e^{-q tau_x}] <= 1``.
    """
    if x < 0:
        raise ValueError("level must be nonnegative for upward passage")
    model = f.exponent.model
    betas = f.roots.betas
    weights = np.exp(-betas * x)
    rates = [c.rate for c in model.up_components]
    mults = [c.multiplicity for c in model.up_components]
    return _passage_expansion(f.C, betas, rates, mults, weights)


def first_passage_down(f: WienerHopfFactors, x: float):
    """Law of the first passage below level ``x <= 0`` killed at rate q.

    Returns ``(atom, undershoot_density)`` with the undershoot recorded as a
    density in the positive distance below the level.
    """
    if x > 0:
        raise ValueError("level must be nonpositive for downward passage")
    model = f.exponent.model
    gammas = f.roots.gammas
    weights = np.exp(gammas * x)
    rates = [c.rate for c in model.down_components]
    mults = [c.multiplicity for c in model.down_components]
    return _passage_expansion(f.D, gammas, rates, mults, weights)
