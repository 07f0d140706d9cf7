#!/usr/bin/env python3
"""Benchmark the hourly dispatch kernel: compiled extension vs NumPy fallback.

Usage: python benchmarks/bench_dispatch.py [--blocks 900] [--hours 8760]
       [--sweep 61] [--repeat 5]

The workload mirrors a carbon-price sweep: the same year of residual load is
dispatched against a freshly built stack once per sweep point.
"""

import argparse
import time

import numpy as np

from meritcef import _dispatch_py

try:
    from meritcef import _dispatch_core
except ImportError:
    _dispatch_core = None


def make_problem(n_blocks: int, n_hours: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    capacity = rng.uniform(5.0, 1500.0, n_blocks)
    emission = rng.uniform(0.0, 1.2, n_blocks)
    cost = np.sort(rng.uniform(5.0, 160.0, n_blocks))
    total = capacity.sum()
    residual = rng.uniform(0.1 * total, 0.9 * total, n_hours)
    total_gen = residual * rng.uniform(1.0, 1.8, n_hours)
    return capacity, emission, cost, residual, total_gen


def run(impl, args_tuple, sweep: int, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        started = time.perf_counter()
        for _ in range(sweep):
            impl.dispatch_hours(*args_tuple, 0.95, 1.0)
        best = min(best, time.perf_counter() - started)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--blocks", type=int, default=900)
    parser.add_argument("--hours", type=int, default=8760)
    parser.add_argument("--sweep", type=int, default=61)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    problem = make_problem(args.blocks, args.hours)
    total_hours = args.sweep * args.hours

    t_py = run(_dispatch_py, problem, args.sweep, args.repeat)
    print(f"python   backend: {t_py * 1e3:8.1f} ms for {args.sweep} sweep points "
          f"({total_hours / t_py / 1e6:6.1f} M hours/s)")

    if _dispatch_core is None:
        print("compiled backend: not built (pip install -e . rebuilds it)")
        return

    out_py = _dispatch_py.dispatch_hours(*problem, 0.95, 1.0)
    out_cy = _dispatch_core.dispatch_hours(*problem, 0.95, 1.0)
    for a, b in zip(out_py, out_cy):
        assert np.array_equal(a, b, equal_nan=True), "backend outputs differ"

    t_cy = run(_dispatch_core, problem, args.sweep, args.repeat)
    print(f"compiled backend: {t_cy * 1e3:8.1f} ms for {args.sweep} sweep points "
          f"({total_hours / t_cy / 1e6:6.1f} M hours/s)")
    print(f"speedup: {t_py / t_cy:.2f}x (outputs bit-identical)")


if __name__ == "__main__":
    main()
