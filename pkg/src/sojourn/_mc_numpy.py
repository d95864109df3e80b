"""Vectorized NumPy path kernel: the portable Monte Carlo backend.

Simulates the grid skeleton of a rational-jump diffusion exactly in
distribution: Gaussian increments per grid step, Poisson jump counts per
step with mixed-Erlang sizes, and a final partial step to the horizon.
Occupation time accumulates one indicator per grid cell, ``dt * 1{X_tau <=
b}`` with ``tau`` uniform inside the cell; the jitter makes the cell
contribution conditionally unbiased, removing the endpoint artifact a fixed
evaluation point shows when a path starts on the barrier.

Mixtures with negative weights cannot be sampled by composition; those draw
through a vectorized bisection/Newton inversion of the jump-size CDF.
"""

from __future__ import annotations

import math

import numpy as np


def jump_tables(comps):
    """Flatten components into (weights, shapes, rates) arrays."""
    w, shp, rate = [], [], []
    for c in comps:
        for j, wj in enumerate(c.weights, start=1):
            w.append(wj)
            shp.append(float(j))
            rate.append(c.rate)
    return np.asarray(w), np.asarray(shp), np.asarray(rate)


def _tail_tables(comps):
    """Term arrays of the mixture tail ``P(Z > z)`` for CDF inversion."""
    coef, rate, powr = [], [], []
    for c in comps:
        for j, wj in enumerate(c.weights, start=1):
            for i in range(j):
                coef.append(wj / math.factorial(i))
                rate.append(c.rate)
                powr.append(i)
    return np.asarray(coef), np.asarray(rate), np.asarray(powr)


def _mixture_tail(z, coef, rate, powr):
    out = np.zeros_like(z)
    for c, r, k in zip(coef, rate, powr):
        out += c * (r * z) ** k * np.exp(-r * z)
    return out


def _mixture_density(z, comps):
    out = np.zeros_like(z)
    for c in comps:
        for j, wj in enumerate(c.weights, start=1):
            out += wj * c.rate**j * z ** (j - 1) * np.exp(-c.rate * z) / math.factorial(j - 1)
    return out


def sample_jump_sizes(rng, comps, size: int) -> np.ndarray:
    """Draw mixed-Erlang jump sizes; negative weights go through CDF inversion."""
    if size == 0:
        return np.empty(0)
    weights, shapes, rates = jump_tables(comps)
    if np.all(weights >= 0.0):
        cum = np.cumsum(weights)
        cum /= cum[-1]
        idx = np.searchsorted(cum, rng.random(size))
        return rng.standard_gamma(shapes[idx]) / rates[idx]
    u = rng.random(size)
    coef, rate, powr = _tail_tables(comps)
    target = 1.0 - u  # solve tail(z) = 1 - u
    hi = float(np.max((np.max(shapes) + 60.0) / rates))
    while np.any(_mixture_tail(np.array([hi]), coef, rate, powr) > np.min(target)):
        hi *= 2.0
    lo = np.zeros(size)
    hi = np.full(size, hi)
    for _ in range(45):
        mid = 0.5 * (lo + hi)
        too_high = _mixture_tail(mid, coef, rate, powr) > target
        lo = np.where(too_high, mid, lo)
        hi = np.where(too_high, hi, mid)
    z = 0.5 * (lo + hi)
    for _ in range(3):
        f = _mixture_density(z, comps)
        step = np.where(f > 0, (_mixture_tail(z, coef, rate, powr) - target) / np.maximum(f, 1e-300), 0.0)
        z = np.clip(z + step, lo, hi)
    return z


def _add_jumps(rng, dX, lam, comps, spans, sign: float) -> None:
    """Accumulate compound-Poisson increments over per-path spans (in place)."""
    if lam <= 0.0:
        return
    counts = rng.poisson(lam * spans)
    total = int(counts.sum())
    if total == 0:
        return
    sizes = sample_jump_sizes(rng, comps, total)
    owner = np.repeat(np.arange(len(dX)), counts)
    dX += sign * np.bincount(owner, weights=sizes, minlength=len(dX))


def _advance(model, X, spans, rng) -> None:
    """Move paths forward over per-path spans (in place)."""
    dX = model.mu * spans + model.sigma * np.sqrt(spans) * rng.standard_normal(len(X))
    _add_jumps(rng, dX, model.lambda_plus, model.up_components, spans, +1.0)
    _add_jumps(rng, dX, model.lambda_minus, model.down_components, spans, -1.0)
    X += dX


def simulate_paths(model, x0: float, b: float, horizons: np.ndarray, dt: float, rng):
    """Simulate one block; returns ``(occupation, x_end)`` in input path order."""
    n = len(horizons)
    n_full = np.floor(horizons / dt).astype(np.int64)
    residual = horizons - n_full * dt
    order = np.argsort(-n_full, kind="stable")
    n_full_sorted = n_full[order]
    residual_sorted = residual[order]
    asc = np.sort(n_full)

    X = np.full(n, float(x0))
    occ = np.zeros(n)
    max_steps = int(n_full_sorted[0]) if n else 0
    for k in range(max_steps):
        m = n - int(np.searchsorted(asc, k, side="right"))
        if m == 0:
            break
        sl = slice(0, m)
        u = rng.random(m)
        _advance(model, X[sl], u * dt, rng)
        occ[sl] += dt * (X[sl] <= b)
        _advance(model, X[sl], (1.0 - u) * dt, rng)

    u = rng.random(n)
    _advance(model, X, u * residual_sorted, rng)
    occ += residual_sorted * (X <= b)
    _advance(model, X, (1.0 - u) * residual_sorted, rng)

    inv = np.empty(n, dtype=np.int64)
    inv[order] = np.arange(n)
    return occ[inv], X[inv]
