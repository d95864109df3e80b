"""Batch command-line surface.

One JSON model file plus flat scalar flags per command; every command writes
a CSV table (17 significant digits, LF endings) to ``--out`` or stdout.
Exit codes: 0 success, 2 validation failure, 3 numerical failure, 4 I/O
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .errors import NumericalError, SojournError, ValidationError
from .inversion import fixed_time_expectation, invert, stehfest_weights
from .mc import SimConfig, simulate_density_histogram, simulate_functional
from .model import build_exponent, load_model
from .occupation import (
    joint_density,
    marginal_density,
    occupation_kernels,
    solve_occupation,
    v_q,
)
from .scale_engine import sn_density
from .wiener_hopf import solve_factors, solve_roots

_FMT = "%.17g"


def _write_csv(path, header, rows):
    def fmt(v):
        if isinstance(v, str):
            return v
        return _FMT % float(v)

    lines = [",".join(header)]
    lines.extend(",".join(fmt(v) for v in row) for row in rows)
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _grid(spec: str) -> np.ndarray:
    try:
        start, stop, count = spec.split(",")
        n = int(count)
        if n < 1:
            raise ValueError
        return np.linspace(float(start), float(stop), n)
    except ValueError as exc:
        raise ValidationError(f"bad grid spec {spec!r}; expected start,stop,count") from exc


def cmd_roots(args) -> int:
    exponent = build_exponent(load_model(args.model))
    roots = solve_roots(exponent, args.q, strict=args.strict_roots)
    rows = [("beta", b.real, b.imag) for b in roots.betas]
    rows += [("gamma", g.real, g.imag) for g in roots.gammas]
    _write_csv(args.out, ("kind", "re", "im"), rows)
    return 0


def cmd_factors(args) -> int:
    exponent = build_exponent(load_model(args.model))
    f = solve_factors(exponent, args.q, strict=args.strict_roots)
    rows = [
        ("beta", b.real, b.imag, c.real, c.imag) for b, c in zip(f.roots.betas, f.C)
    ]
    rows += [
        ("gamma", g.real, g.imag, d.real, d.imag) for g, d in zip(f.roots.gammas, f.D)
    ]
    _write_csv(args.out, ("kind", "root_re", "root_im", "coef_re", "coef_im"), rows)
    return 0


def cmd_vq(args) -> int:
    exponent = build_exponent(load_model(args.model))
    if args.y < args.b:
        raise ValidationError("requires y >= b")
    sol = solve_occupation(exponent, args.b, args.y, args.p, args.q, strict=args.strict_roots)
    xs = _grid(args.x_grid)
    _write_csv(args.out, ("x", "v_q"), [(x, v_q(x, sol)) for x in xs])
    return 0


def cmd_density(args) -> int:
    exponent = build_exponent(load_model(args.model))
    if not args.p > 0:
        raise ValidationError("density form requires p > 0")
    ys = _grid(args.y_grid)
    rows = [
        (y, joint_density(exponent, args.x, args.b, y, args.p, args.q,
                          side=args.side, strict=args.strict_roots))
        for y in ys
    ]
    _write_csv(args.out, ("y", "density"), rows)
    return 0


def cmd_sn_density(args) -> int:
    exponent = build_exponent(load_model(args.model))
    if not args.p > 0:
        raise ValidationError("density form requires p > 0")
    d = sn_density(exponent, args.p, args.q)
    ys = _grid(args.y_grid)
    _write_csv(args.out, ("y", "density"), [(y, d.density(args.x, args.b, y)) for y in ys])
    return 0


def cmd_fixed_time(args) -> int:
    exponent = build_exponent(load_model(args.model))
    if args.y < args.b:
        raise ValidationError("requires y >= b")
    xs = _grid(args.x_grid)
    rows = [
        (x, fixed_time_expectation(exponent, x, args.b, args.y, args.p, args.t, terms=args.terms))
        for x in xs
    ]
    _write_csv(args.out, ("x", "value"), rows)
    return 0


def cmd_mc(args) -> int:
    model = load_model(args.model)
    if (args.q is None) == (args.t is None):
        raise ValidationError("set exactly one of --q / --t")
    config = SimConfig(
        n_paths=args.paths, dt=args.dt, seed=args.seed,
        horizon_t=args.t, horizon_q=args.q,
    ).validate()
    if args.bins is not None:
        edges = _grid(args.bins)
        rows = [
            (lo, hi, mass, err)
            for (lo, hi), mass, err in simulate_density_histogram(
                model, args.x, args.b, args.p, config, edges, backend=args.backend
            )
        ]
        _write_csv(args.out, ("bin_lo", "bin_hi", "mass", "stderr"), rows)
        return 0
    y = -math.inf if args.y is None else args.y
    est = simulate_functional(model, args.x, args.b, y, args.p, config, backend=args.backend)
    _write_csv(args.out, ("mean", "stderr", "n"), [(est.mean, est.stderr, est.n_effective)])
    return 0


def _payoff(kind: str, strike: float):
    if kind == "call":
        return lambda s: np.maximum(s - strike, 0.0)
    if kind == "put":
        return lambda s: np.maximum(strike - s, 0.0)
    if kind == "digital":
        return lambda s: (s > strike).astype(float)
    raise ValidationError(f"unknown payoff {kind!r}")


def cmd_price_step(args) -> int:
    """Price a claim whose payout decays with time spent below a price level.

    The weighted terminal density at maturity comes from inverting the
    exponential-horizon density in the killing rate; the payoff integral runs
    on a fixed Gauss-Legendre rule over the terminal log-price range.
    """
    model = load_model(args.model)
    exponent = build_exponent(model)
    if args.rho < 0.0:
        raise ValidationError("occupation penalty rho must be nonnegative")
    if not (args.spot > 0 and args.strike > 0 and args.barrier > 0 and args.maturity > 0):
        raise ValidationError("spot, strike, barrier and maturity must be positive")
    x0 = math.log(args.spot)
    b = math.log(args.barrier)
    t = args.maturity
    terms = args.terms
    ln2 = math.log(2.0)
    weights = stehfest_weights(terms)
    qs = [(k + 1) * ln2 / t for k in range(terms)]
    if args.rho > 0.0:
        kernels = [occupation_kernels(exponent, args.rho, q) for q in qs]

        def density_hat(j: int, y: float) -> float:
            return kernels[j].density_below(x0, b, y)

    else:
        factor_list = [solve_factors(exponent, q) for q in qs]

        def density_hat(j: int, y: float) -> float:
            return marginal_density(factor_list[j], y - x0)

    mean = x0 + exponent.derivative(0.0).real * t
    sd = math.sqrt(model.variance_rate() * t)
    lo, hi = mean - 12.0 * sd, mean + 12.0 * sd
    k = math.log(args.strike)
    if args.payoff in ("call", "digital"):
        lo = max(lo, k)
    else:
        hi = min(hi, k)
    if hi <= lo:
        _write_csv(args.out, ("strike", "price"), [(args.strike, 0.0)])
        return 0
    nodes, gl_w = np.polynomial.legendre.leggauss(args.y_points)
    ys = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
    gl_w = 0.5 * (hi - lo) * gl_w
    pay = _payoff(args.payoff, args.strike)(np.exp(ys))
    dens = np.zeros_like(ys)
    for j in range(terms):
        vals = np.array([density_hat(j, y) for y in ys])
        dens += weights[j] * vals / qs[j]
    dens *= ln2 / t
    price = math.exp(-args.rate * t) * float(np.sum(gl_w * pay * dens))
    _write_csv(args.out, ("strike", "price"), [(args.strike, price)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sojourn",
        description="Occupation-time functionals of rational-jump Levy diffusions",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, *, q=False, p_flag=False, b=False, y=False, x=False, out=True):
        p.add_argument("--model", required=True, help="JSON model file")
        if q:
            p.add_argument("--q", type=float, required=True, help="killing rate")
        if p_flag:
            p.add_argument("--p", type=float, required=True, help="occupation weight")
        if b:
            p.add_argument("--b", type=float, required=True, help="barrier level")
        if y:
            p.add_argument("--y", type=float, required=True, help="terminal level")
        if x:
            p.add_argument("--x", type=float, required=True, help="starting point")
        if out:
            p.add_argument("--out", default=None, help="CSV output path (default stdout)")
        p.add_argument("--strict-roots", action="store_true",
                       help="fail instead of perturbing near-multiple roots")

    p = sub.add_parser("roots", help="roots of the exponent equation")
    common(p, q=True)
    p.set_defaults(func=cmd_roots)

    p = sub.add_parser("factors", help="Wiener-Hopf factor coefficients")
    common(p, q=True)
    p.set_defaults(func=cmd_factors)

    p = sub.add_parser("vq", help="weighted tail on a grid of starting points")
    common(p, q=True, p_flag=True, b=True, y=True)
    p.add_argument("--x-grid", required=True, help="start,stop,count")
    p.set_defaults(func=cmd_vq)

    p = sub.add_parser("density", help="occupation-weighted terminal density")
    common(p, q=True, p_flag=True, b=True, x=True)
    p.add_argument("--y-grid", required=True, help="start,stop,count")
    p.add_argument("--side", choices=("below", "above"), default="below")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("sn-density", help="terminal density via the scale-function route")
    common(p, q=True, p_flag=True, b=True, x=True)
    p.add_argument("--y-grid", required=True, help="start,stop,count")
    p.set_defaults(func=cmd_sn_density)

    p = sub.add_parser("fixed-time", help="fixed-horizon expectation by Laplace inversion")
    common(p, p_flag=True, b=True, y=True)
    p.add_argument("--t", type=float, required=True, help="horizon")
    p.add_argument("--x-grid", required=True, help="start,stop,count")
    p.add_argument("--terms", type=int, default=14, help="inversion terms (even, 8..20)")
    p.set_defaults(func=cmd_fixed_time)

    p = sub.add_parser("mc", help="Monte Carlo estimate (functional or histogram)")
    common(p, p_flag=True, b=True, x=True)
    p.add_argument("--q", type=float, default=None, help="exponential horizon rate")
    p.add_argument("--t", type=float, default=None, help="fixed horizon")
    p.add_argument("--y", type=float, default=None, help="terminal level (omit for none)")
    p.add_argument("--bins", default=None, help="histogram edges start,stop,count")
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", choices=("compiled", "numpy"), default=None)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("price-step", help="price an occupation-discounted claim")
    common(p, out=True)
    p.add_argument("--spot", type=float, required=True)
    p.add_argument("--strike", type=float, required=True)
    p.add_argument("--maturity", type=float, required=True)
    p.add_argument("--rate", type=float, default=0.0)
    p.add_argument("--rho", type=float, required=True, help="occupation penalty")
    p.add_argument("--barrier", type=float, required=True, help="price level")
    p.add_argument("--payoff", choices=("call", "put", "digital"), default="call")
    p.add_argument("--terms", type=int, default=14)
    p.add_argument("--y-points", type=int, default=240, help="payoff quadrature nodes")
    p.set_defaults(func=cmd_price_step)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (ValidationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except SojournError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
