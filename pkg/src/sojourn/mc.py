"""Monte Carlo oracle for occupation-time functionals.

Estimates ``E_x[e^{-p A_H} 1{X_H > y}]`` and weighted terminal histograms by
direct path simulation, where ``A_H`` is the grid-sampled time at or below
the barrier up to the horizon ``H`` (fixed, or an exponential time drawn per
path).  The occupation grid induces a bias of order ``sqrt(dt)``; acceptance
runs bound it empirically by halving ``dt``.

Two interchangeable path kernels exist: a compiled event-driven one (exact
jump epochs; built from the Cython source at install time) and a vectorized
NumPy fallback (Poisson counts per grid step, identical in distribution at
the grid times).  Selection: ``backend=`` argument, else the
``SOJOURN_MC_BACKEND`` environment variable (``compiled`` | ``numpy``), else
compiled when available.  Streams are split per 65536-path block with
``Philox(seed).jumped(block)``, so results are reproducible for a fixed seed
and backend regardless of how blocks are scheduled; the two backends consume
the stream differently and so give different (equally valid) draws.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _mc_numpy
from .errors import ValidationError
from .model import RationalJumpModel

try:
    from . import _mc_kernel

    _HAVE_KERNEL = True
except ImportError:  # pragma: no cover - depends on build environment
    _mc_kernel = None
    _HAVE_KERNEL = False

_BLOCK = 1 << 16


def available_backends() -> tuple[str, ...]:
    return ("compiled", "numpy") if _HAVE_KERNEL else ("numpy",)


def default_backend() -> str:
    env = os.environ.get("SOJOURN_MC_BACKEND")
    if env:
        if env not in ("compiled", "numpy"):
            raise ValidationError(f"unknown backend {env!r}")
        if env == "compiled" and not _HAVE_KERNEL:
            raise ValidationError("compiled backend requested but extension not built")
        return env
    return "compiled" if _HAVE_KERNEL else "numpy"


@dataclass(frozen=True)
class SimConfig:
    """Simulation parameters; exactly one of ``horizon_t``/``horizon_q`` is set."""

    n_paths: int
    dt: float = 1e-3
    seed: int = 0
    horizon_t: float | None = None
    horizon_q: float | None = None

    def validate(self) -> "SimConfig":
        if self.n_paths < 1:
            raise ValidationError("n_paths must be at least 1")
        if not (0.0 < self.dt <= 1e-2):
            raise ValidationError("dt must lie in (0, 1e-2]")
        if (self.horizon_t is None) == (self.horizon_q is None):
            raise ValidationError("set exactly one of horizon_t / horizon_q")
        if self.horizon_t is not None and not self.horizon_t > 0.0:
            raise ValidationError("horizon_t must be positive")
        if self.horizon_q is not None and not self.horizon_q > 0.0:
            raise ValidationError("horizon_q must be positive")
        return self


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n_effective: int


def _signed_weights(model: RationalJumpModel) -> bool:
    return any(w < 0.0 for c in model.up_components + model.down_components for w in c.weights)


def _resolve_backend(model: RationalJumpModel, backend: str | None) -> str:
    chosen = backend or default_backend()
    if chosen == "compiled":
        if not _HAVE_KERNEL:
            raise ValidationError("compiled backend requested but extension not built")
        if _signed_weights(model):
            # categorical sampling needs nonnegative weights
            chosen = "numpy"
    return chosen


def _iter_blocks(
    model: RationalJumpModel, x: float, b: float, config: SimConfig, backend: str | None
):
    """Yield ``(occupation, x_end)`` per block, deterministically per seed."""
    config.validate()
    model.validate()
    chosen = _resolve_backend(model, backend)
    if chosen == "compiled":
        wu, su, ru = _mc_numpy.jump_tables(model.up_components)
        wd, sd, rd = _mc_numpy.jump_tables(model.down_components)
        cum_up = np.cumsum(wu) / np.sum(wu) if len(wu) else np.empty(0)
        cum_dn = np.cumsum(wd) / np.sum(wd) if len(wd) else np.empty(0)
    remaining = config.n_paths
    block_index = 0
    while remaining > 0:
        size = min(_BLOCK, remaining)
        bitgen = np.random.Philox(key=config.seed).jumped(block_index)
        rng = np.random.Generator(bitgen)
        if config.horizon_t is not None:
            horizons = np.full(size, float(config.horizon_t))
        else:
            horizons = rng.exponential(1.0 / config.horizon_q, size)
        if chosen == "compiled":
            occ, xe = _mc_kernel.simulate_paths(
                bitgen, x, b, model.mu, model.sigma,
                model.lambda_plus, cum_up, su, ru,
                model.lambda_minus, cum_dn, sd, rd,
                horizons, config.dt,
            )
        else:
            occ, xe = _mc_numpy.simulate_paths(model, x, b, horizons, config.dt, rng)
        yield occ, xe
        remaining -= size
        block_index += 1


def simulate_functional(
    model: RationalJumpModel,
    x: float,
    b: float,
    y: float,
    p: float,
    config: SimConfig,
    backend: str | None = None,
) -> McEstimate:
    """Estimate ``E_x[e^{-p A_H} 1{X_H > y}]``; pass ``y = -inf`` to drop the indicator."""
    total = 0.0
    total_sq = 0.0
    n = 0
    for occ, xe in _iter_blocks(model, x, b, config, backend):
        w = np.exp(-p * occ)
        if y != -math.inf:
            w = w * (xe > y)
        total += float(np.sum(w))
        total_sq += float(np.sum(w * w))
        n += len(w)
    mean = total / n
    if n > 1:
        var = max(total_sq - n * mean * mean, 0.0) / (n - 1)
        stderr = math.sqrt(var / n)
    else:
        stderr = math.nan
    return McEstimate(mean=mean, stderr=stderr, n_effective=n)


def simulate_density_histogram(
    model: RationalJumpModel,
    x: float,
    b: float,
    p: float,
    config: SimConfig,
    bins: np.ndarray,
    backend: str | None = None,
) -> list[tuple[tuple[float, float], float, float]]:
    """Weighted histogram of the terminal position.

    ``bins`` is an increasing edge array; underflow/overflow cells are
    appended so the masses sum to the no-indicator functional estimate on the
    same paths.  Returns ``[((lo, hi), mass, stderr), ...]``.
    """
    edges = np.asarray(bins, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
        raise ValidationError("bins must be an increasing 1-d edge array")
    k = len(edges) + 1
    total = np.zeros(k)
    total_sq = np.zeros(k)
    n = 0
    for occ, xe in _iter_blocks(model, x, b, config, backend):
        w = np.exp(-p * occ)
        cell = np.searchsorted(edges, xe, side="right")
        total += np.bincount(cell, weights=w, minlength=k)
        total_sq += np.bincount(cell, weights=w * w, minlength=k)
        n += len(w)
    out = []
    full_edges = np.concatenate([[-math.inf], edges, [math.inf]])
    for i in range(k):
        mean = total[i] / n
        if n > 1:
            var = max(total_sq[i] - n * mean * mean, 0.0) / (n - 1)
            stderr = math.sqrt(var / n)
        else:
            stderr = math.nan
        out.append(((float(full_edges[i]), float(full_edges[i + 1])), mean, stderr))
    return out
