#!/usr/bin/env python3
"""Benchmark the Monte Carlo path kernels (compiled vs NumPy fallback).

Runs the same functional on each available backend and reports throughput
plus the agreement z-score between the two estimates.

Usage: python benchmarks/bench_mc.py [--paths N] [--dt DT]
"""

from __future__ import annotations

import argparse
import math
import time

import sojourn as sj
import sojourn.mc as mc


def run(paths: int, dt: float) -> None:
    kou = sj.RationalJumpModel(
        mu=0.05, sigma=0.2,
        lambda_plus=2.0, up_components=(sj.JumpComponent(10.0, (1.0,)),),
        lambda_minus=3.0, down_components=(sj.JumpComponent(5.0, (1.0,)),),
    ).validate()
    bm = sj.RationalJumpModel(mu=0.0, sigma=1.0).validate()
    cases = [
        ("BM occupation (q=1, p=3)", bm, dict(x=0.0, b=0.0, y=-math.inf, p=3.0)),
        ("Kou weighted tail (q=1, p=0.5)", kou, dict(x=0.2, b=0.0, y=0.3, p=0.5)),
    ]
    for label, model, kw in cases:
        print(f"\n{label}, {paths} paths, dt={dt:g}")
        results = {}
        for backend in mc.available_backends():
            cfg = mc.SimConfig(n_paths=paths, dt=dt, seed=12345, horizon_q=1.0)
            t0 = time.perf_counter()
            est = mc.simulate_functional(model, config=cfg, backend=backend, **kw)
            elapsed = time.perf_counter() - t0
            results[backend] = est
            print(
                f"  {backend:9s} mean={est.mean:.6f} stderr={est.stderr:.2e} "
                f"{elapsed:7.2f}s  {paths / elapsed:10.0f} paths/s"
            )
        if len(results) == 2:
            a, b = results["compiled"], results["numpy"]
            z = (a.mean - b.mean) / math.hypot(a.stderr, b.stderr)
            print(f"  backend agreement z = {z:+.2f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--dt", type=float, default=1e-3)
    args = ap.parse_args()
    run(args.paths, args.dt)
