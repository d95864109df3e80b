"""Small helpers for rational-function algebra.

Polynomials are coefficient arrays in ascending order (numpy.polynomial
convention), over the complex field.  Everything here is exact in the
coefficient algebra up to floating round-off; no symbolic dependencies.
"""

from __future__ import annotations

import math

import numpy as np


def poly_taylor(coeffs: np.ndarray, s0: complex, order: int) -> np.ndarray:
    """Taylor coefficients of a polynomial around ``s0``, up to ``order``.

    Returns ``t`` with ``p(s0 + h) = sum_r t[r] h^r``; ``len(t) == order + 1``.
    """
    c = np.asarray(coeffs, dtype=complex)
    n = len(c)
    out = np.zeros(order + 1, dtype=complex)
    # Horner-style shift: repeatedly deflate by (s - s0); each remainder is
    # the next Taylor coefficient.
    work = c.copy()
    for r in range(min(order + 1, n)):
        if len(work) == 1:
            out[r] = work[0]
            work = np.zeros(1, dtype=complex)
            continue
        quot = np.zeros(len(work) - 1, dtype=complex)
        rem = 0.0 + 0.0j
        for i in range(len(work) - 1, 0, -1):
            rem = work[i] + rem * s0
            quot[i - 1] = rem
        out[r] = work[0] + rem * s0
        work = quot
    return out


def series_mul(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    """Product of two truncated power series, truncated at ``order``."""
    out = np.zeros(order + 1, dtype=complex)
    for i, ai in enumerate(a[: order + 1]):
        if ai == 0:
            continue
        hi = min(order - i, len(b) - 1)
        out[i : i + hi + 1] += ai * np.asarray(b[: hi + 1], dtype=complex)
    return out


def series_inv(a: np.ndarray, order: int) -> np.ndarray:
    """Reciprocal of a truncated power series with ``a[0] != 0``."""
    a = np.asarray(a, dtype=complex)
    if a[0] == 0:
        raise ZeroDivisionError("series has no reciprocal: constant term is zero")
    out = np.zeros(order + 1, dtype=complex)
    out[0] = 1.0 / a[0]
    for r in range(1, order + 1):
        acc = 0.0 + 0.0j
        for i in range(1, min(r, len(a) - 1) + 1):
            acc += a[i] * out[r - i]
        out[r] = -acc / a[0]
    return out


def pole_expansion(
    num: np.ndarray, den_factors: list[tuple[complex, int]], pole_index: int
) -> np.ndarray:
    """Principal-part coefficients of ``num / prod (s - p_i)^{m_i}`` at one pole.

    ``den_factors`` lists ``(p_i, m_i)``.  For the chosen pole ``(p, m)`` the
    return value ``c`` has length ``m`` and satisfies: the principal part at
    ``p`` is ``sum_{j=1}^{m} c[j-1] / (s - p)^j``.
    """
    p, m = den_factors[pole_index]
    top = poly_taylor(np.asarray(num, dtype=complex), p, m - 1)
    rest = np.array([1.0 + 0.0j])
    for i, (pi, mi) in enumerate(den_factors):
        if i == pole_index:
            continue
        base = poly_taylor(np.array([-pi, 1.0], dtype=complex), p, m - 1)
        fac = np.array([1.0 + 0.0j])
        for _ in range(mi):
            fac = series_mul(fac, base, m - 1)
        rest = series_mul(rest, fac, m - 1)
    series = series_mul(top, series_inv(rest, m - 1), m - 1)
    # series[r] is the coefficient of (s-p)^r in num/rest; the principal-part
    # coefficient of 1/(s-p)^{m-r} is series[r].
    out = np.zeros(m, dtype=complex)
    for r in range(m):
        out[m - r - 1] = series[r]
    return out


def alternant_sum(nodes: np.ndarray, shifts: np.ndarray) -> complex:
    """``sum_i prod_k (x_i - c_k) / prod_{k != i} (x_i - x_k)``.

    Vanishes whenever ``len(shifts) < len(nodes) - 1``; used as a numerical
    identity check for the partial-fraction machinery.
    """
    nodes = np.asarray(nodes, dtype=complex)
    shifts = np.asarray(shifts, dtype=complex)
    total = 0.0 + 0.0j
    for i, xi in enumerate(nodes):
        num = np.prod(xi - shifts) if len(shifts) else 1.0
        den = np.prod(np.delete(nodes, i) * (-1.0) + xi)
        total += num / den
    return total


def binom(n: int, k: int) -> float:
    return float(math.comb(n, k))
