"""Occupation-time-weighted laws at an independent exponential horizon.

Everything here computes pieces of

    E_x[ exp(-p * time spent at or below b before e(q)) ; X_{e(q)} in . ]

for rational-jump diffusions.  Two equivalent routes are covered:

* the piecewise exponential representation of the weighted tail
  ``v_q(x) = E_x[e^{-p A_{e(q)}} 1{X_{e(q)} > y}]`` with coefficient vectors
  ``U, H, Q, P`` tied together by continuity and smooth-fit constraints, and

* the convolution form: a correction kernel with an atom at zero (one of four
  orientations) convolved against the law of an independent infimum/supremum
  sum, yielding the joint density directly.

The "above" weighting is obtained from the "below" one on the reflected
process; the negative-weight range ``-q < p < 0`` is supported through
``v_q`` only, the density form requires ``p > 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, NumericalError
from .expmix import ExpMixFunction, TwoSidedMixture
from .model import LaplaceExponent, build_exponent, dual_model
from .wiener_hopf import WienerHopfFactors, solve_factors

_COLLISION_TOL = 1e-9
_PERTURB = 1e-6

_KERNEL_TAGS = ("F1", "F2", "F1hat", "F2hat")


@dataclass(frozen=True)
class FKernel:
    """Correction distribution with an atom at 0 and a mixture density on (0, inf).

    ``atom_mass + integral(density)`` is 1; the Laplace transform of the pair
    equals a ratio of supremum (or infimum) transforms at the two killing
    rates, which is the defining property checked in the tests.
    """

    atom_mass: float
    density: ExpMixFunction
    tag: str

    def transform(self, s) -> complex:
        return self.atom_mass + self.density.laplace(s)

    def shifted_cdf(self, x: float) -> float:
        """The bounded continuous function F with F(dx) = density, F(inf) = 0."""
        if x < 0:
            return -1.0
        return self.atom_mass - 1.0 + self.density.definite_integral(0.0, x)


def f_kernel(
    factors_q: WienerHopfFactors, factors_pq: WienerHopfFactors, which: str
) -> FKernel:
    """One of the four ratio kernels between killing rates q and p+q.

    ``F1`` uses the supremum transforms (poles at the q-roots), ``F1hat`` the
    same ratio inverted; ``F2``/``F2hat`` mirror these on the infimum side.
    """
    if which not in _KERNEL_TAGS:
        raise ValueError(f"unknown kernel tag {which!r}")
    if which == "F1":
        a, bb = factors_q.roots.betas, factors_pq.roots.betas
    elif which == "F1hat":
        a, bb = factors_pq.roots.betas, factors_q.roots.betas
    elif which == "F2":
        a, bb = factors_q.roots.gammas, factors_pq.roots.gammas
    else:
        a, bb = factors_pq.roots.gammas, factors_q.roots.gammas
    if factors_q is factors_pq or abs(factors_q.q - factors_pq.q) == 0.0:
        return FKernel(atom_mass=1.0, density=ExpMixFunction.zero(), tag=which)
    # a zero approaching a pole is benign here: the matching residue shrinks
    # to zero smoothly, so no degeneracy guard is needed
    atom = complex(np.prod(a / bb))
    terms = []
    for i, ai in enumerate(a):
        res = atom * np.prod(bb - ai)
        for k, ak in enumerate(a):
            if k != i:
                res /= ak - ai
        terms.append((res, ai, 0))
    if abs(atom.imag) > 1e-10 * (1.0 + abs(atom)):
        raise NumericalError(f"kernel atom came out complex: {atom}")
    return FKernel(atom_mass=float(atom.real), density=ExpMixFunction.from_terms(terms), tag=which)


def hq_coefficients(factors_q: WienerHopfFactors):
    """Coefficient vectors of the unweighted barrier-restricted tail.

    Returns ``(H, Q, Phat)``: ``H`` and ``Q`` drive the exponential terms in
    the tail of the killed process restricted to staying above the barrier;
    ``Phat[k, i]`` carries the barrier/tail cross terms so that the k-th
    barrier coefficient is ``sum_i Phat[k, i] * exp(beta_i (b - y))``.  Only
    the factors at rate q enter these formulas.
    """
    betas, gammas = factors_q.roots.betas, factors_q.roots.gammas
    C, D = factors_q.C, factors_q.D
    M, N = len(betas), len(gammas)
    H = np.empty(M, dtype=complex)
    for k in range(M):
        H[k] = C[k] / betas[k] * np.sum(D / (betas[k] + gammas))
    Q = np.empty(N, dtype=complex)
    for k in range(N):
        Q[k] = D[k] * np.sum(C / (betas * (betas + gammas[k]))) - D[k] / gammas[k]
    Phat = np.empty((N, M), dtype=complex)
    for k in range(N):
        for i in range(M):
            Phat[k, i] = -(C[i] / betas[i]) * D[k] / (betas[i] + gammas[k])
    return H, Q, Phat


def residue_expansion(
    b: float,
    y: float,
    p: float,
    q: float,
    factors_q: WienerHopfFactors,
    factors_pq: WienerHopfFactors,
    H: np.ndarray,
):
    """Coefficients ``(U, P)`` of the weighted tail via residue extraction.

    The generating rational function has known poles: its residues at the
    shifted roots give ``U`` (region below the barrier), those at the negated
    unshifted roots give ``P``.  Collisions between shifted and unshifted
    roots are rejected as degenerate (the caller may perturb q and retry).
    """
    model = factors_q.exponent.model
    betas_q, gammas_q = factors_q.roots.betas, factors_q.roots.gammas
    betas_xi = factors_pq.roots.betas
    M = len(betas_q)
    if p == 0.0 or factors_q is factors_pq:
        U = H * np.exp(betas_q * (b - y))
        return U, np.zeros(len(gammas_q), dtype=complex)
    # The generating function's pole at a shifted root cancels the matching
    # factor in each numerator product, so the expansion below involves no
    # small divisions and stays stable as p -> 0 (shifted roots approaching
    # unshifted ones).  A collision between a shifted root and a *different*
    # unshifted root would be a genuine double pole; reject those.
    scale = 1.0 + float(np.max(np.abs(np.concatenate([betas_q, betas_xi]))))
    for i, bx in enumerate(betas_xi):
        for k, bq in enumerate(betas_q):
            if k != i and abs(bx - bq) < _COLLISION_TOL * scale:
                raise DegenerateConfiguration(
                    f"shifted root {bx:.8g} collides with unshifted root {bq:.8g}"
                )

    up = [(c.rate, c.multiplicity) for c in model.up_components]
    down = [(c.rate, c.multiplicity) for c in model.down_components]

    def pole_free_part(z: complex) -> complex:
        val = 1.0 + 0.0j
        for rate, mult in up:
            val *= (z - rate) ** mult
        for rate, mult in down:
            val *= (z + rate) ** mult
        return val

    t = np.empty(M, dtype=complex)
    for k, bq in enumerate(betas_q):
        t[k] = H[k] * np.exp(bq * (b - y)) * np.prod(bq + gammas_q) / pole_free_part(bq)

    U = np.empty(len(betas_xi), dtype=complex)
    for i, bx in enumerate(betas_xi):
        pref = pole_free_part(bx)
        for l, other in enumerate(betas_xi):
            if l != i:
                pref /= bx - other
        pref /= np.prod(bx + gammas_q)
        acc = 0.0 + 0.0j
        for k, bq in enumerate(betas_q):
            prod = 1.0 + 0.0j
            for l, other in enumerate(betas_xi):
                if l != i:
                    prod *= bq - other
            acc += t[k] * prod
        U[i] = pref * acc
    P = np.empty(len(gammas_q), dtype=complex)
    for i, gq in enumerate(gammas_q):
        z = -gq
        pref = pole_free_part(z)
        pref /= np.prod(z - betas_xi)
        for l, other in enumerate(gammas_q):
            if l != i:
                pref /= z + other
        acc = 0.0 + 0.0j
        for k, bq in enumerate(betas_q):
            acc += t[k] * np.prod(bq - betas_xi) / (gq + bq)
        P[i] = -pref * acc
    return U, P


@dataclass(frozen=True)
class OccupationSolution:
    """Solved coefficient system of the weighted tail for one parameter block."""

    b: float
    y: float
    p: float
    q: float
    factors_q: WienerHopfFactors
    factors_pq: WienerHopfFactors
    U: np.ndarray
    H: np.ndarray
    Q: np.ndarray
    P: np.ndarray

    def continuity_residuals(self) -> tuple[float, float, float]:
        """Absolute defects of the barrier/level matching constraints."""
        betas_q = self.factors_q.roots.betas
        gammas_q = self.factors_q.roots.gammas
        betas_xi = self.factors_pq.roots.betas
        eby = np.exp(betas_q * (self.b - self.y))
        value_fit = abs(np.sum(self.U) - np.sum(self.H * eby) - np.sum(self.P))
        slope_fit = abs(
            np.sum(self.U * betas_xi)
            - np.sum(self.H * betas_q * eby)
            + np.sum(self.P * gammas_q)
        )
        mass_fit = abs(np.sum(self.H) - np.sum(self.Q) - 1.0)
        return float(value_fit), float(slope_fit), float(mass_fit)


def solve_occupation(
    exponent: LaplaceExponent, b: float, y: float, p: float, q: float, strict: bool = False
) -> OccupationSolution:
    """Assemble the full coefficient system for ``v_q``.

    Requires ``y >= b`` and ``p > -q``.  Degenerate root collisions trigger a
    single perturb-and-retry on q unless ``strict``.
    """
    if y < b:
        raise ValueError("level y must satisfy y >= b")
    if not q > 0.0:
        raise ValueError("killing rate q must be positive")
    if not p > -q:
        raise ValueError("weight p must exceed -q")

    def attempt(q_try: float) -> OccupationSolution:
        factors_q = solve_factors(exponent, q_try, strict=strict)
        if p == 0.0:
            factors_pq = factors_q
        else:
            factors_pq = solve_factors(exponent, p + q_try, strict=strict)
        H, Q, _ = hq_coefficients(factors_q)
        U, P = residue_expansion(b, y, p, q_try, factors_q, factors_pq, H)
        return OccupationSolution(
            b=b, y=y, p=p, q=factors_q.q, factors_q=factors_q, factors_pq=factors_pq,
            U=U, H=H, Q=Q, P=P,
        )

    try:
        return attempt(q)
    except DegenerateConfiguration:
        if strict:
            raise
        return attempt(q + _PERTURB * (1.0 + q))


def v_q(x, solution: OccupationSolution):
    """Evaluate the weighted tail at one or many starting points.

    Piecewise exponential in the three regions split at the barrier and the
    level; continuous across both joins.
    """
    sol = solution
    betas_q = sol.factors_q.roots.betas
    gammas_q = sol.factors_q.roots.gammas
    betas_xi = sol.factors_pq.roots.betas

    def single(xx: float) -> float:
        if xx < sol.b:
            val = np.sum(sol.U * np.exp(betas_xi * (xx - sol.b)))
        elif xx <= sol.y:
            val = np.sum(sol.H * np.exp(betas_q * (xx - sol.y))) + np.sum(
                sol.P * np.exp(gammas_q * (sol.b - xx))
            )
        else:
            val = (
                1.0
                + np.sum(sol.Q * np.exp(gammas_q * (sol.y - xx)))
                + np.sum(sol.P * np.exp(gammas_q * (sol.b - xx)))
            )
        if abs(val.imag) > 1e-8 * (1.0 + abs(val)):
            raise NumericalError(f"weighted tail came out complex at x={xx}: {val}")
        return float(val.real)

    if np.ndim(x) == 0:
        return single(float(x))
    return np.array([single(float(xx)) for xx in np.asarray(x, dtype=float)])


def killed_tail(factors_q: WienerHopfFactors, x: float, y: float) -> float:
    """``P_x(X_{e(q)} > y)`` from the supremum/infimum mixture laws."""
    H, Q, _ = hq_coefficients(factors_q)
    betas = factors_q.roots.betas
    gammas = factors_q.roots.gammas
    if x <= y:
        val = np.sum(H * np.exp(betas * (x - y)))
    else:
        val = 1.0 + np.sum(Q * np.exp(gammas * (y - x)))
    return float(np.real(val))


def kq_density(
    factors_q: WienerHopfFactors, factors_pq: WienerHopfFactors
) -> TwoSidedMixture:
    """Density of the independent sum: infimum at rate q plus supremum at rate p+q.

    A continuous two-sided probability density; with equal rates it is the
    density of the killed process itself (the factorization identity).
    """
    C_xi = factors_pq.C
    betas_xi = factors_pq.roots.betas
    D_q = factors_q.D
    gammas_q = factors_q.roots.gammas
    pos_terms = []
    for k, bk in enumerate(betas_xi):
        coef = C_xi[k] * np.sum(D_q / (gammas_q + bk))
        pos_terms.append((coef, bk, 0))
    neg_terms = []
    for j, gj in enumerate(gammas_q):
        coef = D_q[j] * np.sum(C_xi / (betas_xi + gj))
        neg_terms.append((coef, gj, 0))
    return TwoSidedMixture(
        neg=ExpMixFunction.from_terms(neg_terms), pos=ExpMixFunction.from_terms(pos_terms)
    )


def convolution_density_below(
    f1: FKernel,
    f2hat: FKernel,
    kq: TwoSidedMixture,
    q: float,
    xi: float,
    x: float,
    b: float,
    y: float,
) -> float:
    """Density in y of the below-weighted law from its convolution pieces.

    Shared by the rational route and the spectrally negative route, which
    build the same three kernels by different means.
    """
    if y >= b:
        direct = f1.atom_mass * kq.density(y - x)
        conv = kq.segment_convolve(f1.density, y - x, y - b)
        return direct + conv
    lhat = kq.reflected()
    direct = f2hat.atom_mass * lhat.density(x - y)
    conv = lhat.segment_convolve(f2hat.density, x - y, b - y)
    return (q / xi) * (direct + conv)


@dataclass(frozen=True)
class OccupationKernels:
    """Kernel bundle for one (exponent, p, q); evaluates densities on (x, y) grids.

    Precomputes the factor pairs, the two correction kernels and the sum law,
    so grid evaluation only runs closed-form segment integrals.
    """

    exponent: LaplaceExponent
    p: float
    factors_q: WienerHopfFactors
    factors_pq: WienerHopfFactors
    f1: FKernel
    f2hat: FKernel
    kq: TwoSidedMixture

    @property
    def q(self) -> float:
        return self.factors_q.q

    @property
    def xi(self) -> float:
        return self.factors_pq.q

    def density_below(self, x: float, b: float, y: float) -> float:
        """Density in y of the below-weighted law started at x."""
        return convolution_density_below(
            self.f1, self.f2hat, self.kq, self.q, self.xi, x, b, y
        )

    def occupation_transform(self, x: float, b: float) -> float:
        """``E_x[e^{-p A_{e(q)}}]``: closed form via the sum-law distribution.

        Integrating the joint density over all y collapses to
        ``1 - p/(p+q) * P(Z <= b - x)`` with Z the infimum/supremum sum.
        """
        return 1.0 - (self.xi - self.q) / self.xi * self.kq.cdf(b - x)


def occupation_kernels(
    exponent: LaplaceExponent, p: float, q: float, strict: bool = False
) -> OccupationKernels:
    if not p > 0.0:
        raise ValueError("density form requires p > 0")
    if not q > 0.0:
        raise ValueError("killing rate q must be positive")

    def attempt(q_try: float) -> OccupationKernels:
        factors_q = solve_factors(exponent, q_try, strict=strict)
        factors_pq = solve_factors(exponent, p + q_try, strict=strict)
        return OccupationKernels(
            exponent=exponent,
            p=p,
            factors_q=factors_q,
            factors_pq=factors_pq,
            f1=f_kernel(factors_q, factors_pq, "F1"),
            f2hat=f_kernel(factors_q, factors_pq, "F2hat"),
            kq=kq_density(factors_q, factors_pq),
        )

    try:
        return attempt(q)
    except DegenerateConfiguration:
        if strict:
            raise
        return attempt(q + _PERTURB * (1.0 + q))


def joint_density(
    exponent: LaplaceExponent,
    x: float,
    b: float,
    y: float,
    p: float,
    q: float,
    side: str = "below",
    strict: bool = False,
) -> float:
    """Density in y of the occupation-weighted killed law.

    ``side='below'`` weights time spent at or below the barrier; ``'above'``
    weights time at or above it and is evaluated on the reflected process.
    Requires ``p > 0`` (the tail ``v_q`` covers ``-q < p <= 0``).
    """
    if side == "below":
        ker = occupation_kernels(exponent, p, q, strict=strict)
        return ker.density_below(x, b, y)
    if side == "above":
        refl = build_exponent(dual_model(exponent.model))
        ker = occupation_kernels(refl, p, q, strict=strict)
        return ker.density_below(-x, -b, -y)
    raise ValueError("side must be 'below' or 'above'")


def occupation_lt(
    exponent: LaplaceExponent, x: float, b: float, p: float, q: float, strict: bool = False
) -> float:
    """``E_x[exp(-p * time at or below b up to e(q))]``.

    Lies in ``(q/(p+q), 1)`` and increases with the starting point.
    """
    ker = occupation_kernels(exponent, p, q, strict=strict)
    return ker.occupation_transform(x, b)


def marginal_density(factors_q: WienerHopfFactors, u: float) -> float:
    """Density of the killed process at displacement u (no occupation weight)."""
    return kq_density(factors_q, factors_q).density(u)
