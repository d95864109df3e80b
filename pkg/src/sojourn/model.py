"""Rational-jump diffusions and their Laplace exponents.

The model family: Brownian motion with drift plus two independent compound
Poisson streams whose jump sizes follow signed mixed-Erlang mixtures

    p+(z) = sum_k sum_j c_{kj} eta_k^j z^{j-1} e^{-eta_k z} / (j-1)!,   z > 0,

and the mirror image for downward jumps.  Mixture weights may be negative as
long as the density stays nonnegative; nonnegativity is checked pointwise on
a log-spaced grid.  The cumulant transform

    psi(s) = log E[e^{s X_1}]
           = mu s + sigma^2 s^2 / 2
             + lam+ (sum c_{kj} (eta_k/(eta_k - s))^j - 1)
             + lam- (sum d_{kj} (theta_k/(theta_k + s))^j - 1)

is rational; both the callable form and the numerator/denominator coefficient
arrays are exposed, the latter feeding the root solver.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import ValidationError

_WEIGHT_TOL = 1e-12
_RATE_TOL = 1e-9
_MAX_DEGREE = 64
_DENSITY_GRID = 512


@dataclass(frozen=True)
class JumpComponent:
    """One Erlang base rate with its weight ladder.

    ``weights[j-1]`` multiplies the Erlang(j, rate) density; the component
    multiplicity is ``len(weights)``.
    """

    rate: float
    weights: tuple[float, ...]

    @property
    def multiplicity(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class RationalJumpModel:
    mu: float
    sigma: float
    lambda_plus: float = 0.0
    up_components: tuple[JumpComponent, ...] = field(default_factory=tuple)
    lambda_minus: float = 0.0
    down_components: tuple[JumpComponent, ...] = field(default_factory=tuple)

    def validate(self, density_grid: int = _DENSITY_GRID) -> "RationalJumpModel":
        if not (self.sigma > 0.0):
            raise ValidationError("sigma must be strictly positive")
        for lam, comps, label in (
            (self.lambda_plus, self.up_components, "up"),
            (self.lambda_minus, self.down_components, "down"),
        ):
            if lam < 0.0:
                raise ValidationError(f"{label} intensity must be nonnegative")
            if lam > 0.0 and not comps:
                raise ValidationError(f"{label} intensity positive but no components given")
            if lam == 0.0 and comps:
                raise ValidationError(f"{label} components given but intensity is zero")
            if not comps:
                continue
            rates = [c.rate for c in comps]
            if any(r <= 0.0 for r in rates):
                raise ValidationError(f"{label} rates must be positive")
            for i in range(len(rates)):
                for j in range(i + 1, len(rates)):
                    if abs(rates[i] - rates[j]) <= _RATE_TOL * max(rates[i], rates[j]):
                        raise ValidationError(f"duplicated {label} rate {rates[i]}")
            wsum = sum(sum(c.weights) for c in comps)
            if abs(wsum - 1.0) > _WEIGHT_TOL * max(
                1.0, sum(abs(w) for c in comps for w in c.weights)
            ):
                raise ValidationError(f"{label} mixture weights sum to {wsum}, expected 1")
            if any(c.multiplicity == 0 for c in comps):
                raise ValidationError(f"{label} component with empty weight ladder")
            _check_density_nonneg(comps, label, density_grid)
        degree = self.total_multiplicity_up + self.total_multiplicity_down + 2
        if degree > _MAX_DEGREE:
            raise ValidationError(f"exponent degree {degree} exceeds cap {_MAX_DEGREE}")
        return self

    @property
    def total_multiplicity_up(self) -> int:
        return sum(c.multiplicity for c in self.up_components)

    @property
    def total_multiplicity_down(self) -> int:
        return sum(c.multiplicity for c in self.down_components)

    @property
    def spectrally_negative(self) -> bool:
        return self.lambda_plus == 0.0

    def jump_density_up(self, z):
        return _mixture_density(self.up_components, z)

    def jump_density_down(self, z):
        return _mixture_density(self.down_components, z)

    def variance_rate(self) -> float:
        """Var[X_1]; handy scale for grids and Monte Carlo sanity checks."""
        v = self.sigma**2
        for lam, comps in ((self.lambda_plus, self.up_components), (self.lambda_minus, self.down_components)):
            for c in comps:
                for j, w in enumerate(c.weights, start=1):
                    v += lam * w * j * (j + 1) / c.rate**2
        return v


def _mixture_density(comps, z):
    z = np.asarray(z, dtype=float)
    out = np.zeros_like(z)
    for c in comps:
        for j, w in enumerate(c.weights, start=1):
            out += w * c.rate**j * z ** (j - 1) * np.exp(-c.rate * z) / math.factorial(j - 1)
    return out


def _check_density_nonneg(comps, label: str, n_grid: int) -> None:
    for c in comps:
        z = np.geomspace(1e-4 / c.rate, 50.0 / c.rate, n_grid)
        vals = _mixture_density(comps, z)
        floor = -1e-12 * max(1.0, float(np.max(np.abs(vals))))
        if np.any(vals < floor):
            zbad = z[np.argmin(vals)]
            raise ValidationError(
                f"{label} jump density negative near z={zbad:.6g} ({float(np.min(vals)):.3e})"
            )


@dataclass(frozen=True)
class LaplaceExponent:
    """Rational representation of ``psi(s) = log E[e^{s X_1}]``.

    ``num``/``den`` are ascending complex coefficient arrays with
    ``psi = num/den`` and ``deg num = deg den + 2``; ``poles`` lists
    ``(location, multiplicity)`` with locations ``eta_k`` and ``-theta_k``.
    """

    model: RationalJumpModel
    num: np.ndarray
    den: np.ndarray
    poles: tuple[tuple[float, int], ...]

    def __call__(self, s):
        """Evaluate psi from the analytic mixture form (stable at any s)."""
        m = self.model
        s = np.asarray(s, dtype=complex)
        out = m.mu * s + 0.5 * m.sigma**2 * s**2
        if m.lambda_plus:
            acc = np.zeros_like(s)
            for c in m.up_components:
                base = c.rate / (c.rate - s)
                for j, w in enumerate(c.weights, start=1):
                    acc = acc + w * base**j
            out = out + m.lambda_plus * (acc - 1.0)
        if m.lambda_minus:
            acc = np.zeros_like(s)
            for c in m.down_components:
                base = c.rate / (c.rate + s)
                for j, w in enumerate(c.weights, start=1):
                    acc = acc + w * base**j
            out = out + m.lambda_minus * (acc - 1.0)
        return out if out.ndim else complex(out)

    def derivative(self, s):
        m = self.model
        s = np.asarray(s, dtype=complex)
        out = m.mu + m.sigma**2 * s
        for c in m.up_components:
            for j, w in enumerate(c.weights, start=1):
                out = out + m.lambda_plus * w * j * c.rate**j / (c.rate - s) ** (j + 1)
        for c in m.down_components:
            for j, w in enumerate(c.weights, start=1):
                out = out - m.lambda_minus * w * j * c.rate**j / (c.rate + s) ** (j + 1)
        return out if out.ndim else complex(out)

    def shifted_numerator(self, q: float) -> np.ndarray:
        """Ascending coefficients of the numerator polynomial of ``psi(s) - q``."""
        return npoly.polysub(self.num, q * self.den)


def build_exponent(model: RationalJumpModel) -> LaplaceExponent:
    """Assemble the rational form of the cumulant transform.

    Fails on invalid models (distinctness, weight sums, sigma <= 0, ...).
    """
    model.validate()
    one = np.array([1.0 + 0.0j])
    up_facs = [
        npoly.polypow(np.array([c.rate, -1.0 + 0.0j]), c.multiplicity)
        for c in model.up_components
    ]
    down_facs = [
        npoly.polypow(np.array([c.rate, 1.0 + 0.0j]), c.multiplicity)
        for c in model.down_components
    ]
    den = one
    for f in up_facs + down_facs:
        den = npoly.polymul(den, f)

    base = npoly.polymul(
        np.array([-model.lambda_plus - model.lambda_minus, model.mu, 0.5 * model.sigma**2]),
        den,
    )
    num = base
    for idx, c in enumerate(model.up_components):
        inner = np.zeros(1, dtype=complex)
        for j, w in enumerate(c.weights, start=1):
            piece = npoly.polymul(
                np.array([w * c.rate**j + 0.0j]),
                npoly.polypow(np.array([c.rate, -1.0 + 0.0j]), c.multiplicity - j),
            )
            inner = npoly.polyadd(inner, piece)
        rest = one
        for l, f in enumerate(up_facs):
            if l != idx:
                rest = npoly.polymul(rest, f)
        for f in down_facs:
            rest = npoly.polymul(rest, f)
        num = npoly.polyadd(num, model.lambda_plus * npoly.polymul(inner, rest))
    for idx, c in enumerate(model.down_components):
        inner = np.zeros(1, dtype=complex)
        for j, w in enumerate(c.weights, start=1):
            piece = npoly.polymul(
                np.array([w * c.rate**j + 0.0j]),
                npoly.polypow(np.array([c.rate, 1.0 + 0.0j]), c.multiplicity - j),
            )
            inner = npoly.polyadd(inner, piece)
        rest = one
        for f in up_facs:
            rest = npoly.polymul(rest, f)
        for l, f in enumerate(down_facs):
            if l != idx:
                rest = npoly.polymul(rest, f)
        num = npoly.polyadd(num, model.lambda_minus * npoly.polymul(inner, rest))

    poles = tuple(
        [(c.rate, c.multiplicity) for c in model.up_components]
        + [(-c.rate, c.multiplicity) for c in model.down_components]
    )
    return LaplaceExponent(model=model, num=np.asarray(num, dtype=complex), den=np.asarray(den, dtype=complex), poles=poles)


def dual_model(model: RationalJumpModel) -> RationalJumpModel:
    """The model of the reflected process -X: drift negated, jump sides swapped."""
    return RationalJumpModel(
        mu=-model.mu,
        sigma=model.sigma,
        lambda_plus=model.lambda_minus,
        up_components=model.down_components,
        lambda_minus=model.lambda_plus,
        down_components=model.up_components,
    ).validate()


# -- model files -------------------------------------------------------------


def model_from_dict(doc: dict) -> RationalJumpModel:
    def comps(key, rate_key):
        out = []
        for entry in doc.get(key, []) or []:
            out.append(JumpComponent(rate=float(entry[rate_key]), weights=tuple(float(w) for w in entry["weights"])))
        return tuple(out)

    try:
        model = RationalJumpModel(
            mu=float(doc["mu"]),
            sigma=float(doc["sigma"]),
            lambda_plus=float(doc.get("lambda_plus", 0.0)),
            up_components=comps("up_components", "eta"),
            lambda_minus=float(doc.get("lambda_minus", 0.0)),
            down_components=comps("down_components", "theta"),
        )
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed model document: {exc}") from exc
    return model.validate()


def model_to_dict(model: RationalJumpModel) -> dict:
    return {
        "mu": model.mu,
        "sigma": model.sigma,
        "lambda_plus": model.lambda_plus,
        "up_components": [
            {"eta": c.rate, "weights": list(c.weights)} for c in model.up_components
        ],
        "lambda_minus": model.lambda_minus,
        "down_components": [
            {"theta": c.rate, "weights": list(c.weights)} for c in model.down_components
        ],
    }


def load_model(path) -> RationalJumpModel:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))


def save_model(model: RationalJumpModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_dict(model), fh, indent=2)
        fh.write("\n")
