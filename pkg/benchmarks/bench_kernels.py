"""Compare the compiled kernels against the pure-Python fallback.

Run with ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each row is the
best of ``N`` timings for the same inputs on both backends; the last column
is the speed-up of the compiled backend.
"""

import argparse
import math
import timeit

import numpy as np

from nvmix import kernels

TWO_PI = 2.0 * math.pi
G1, G2 = TWO_PI * 0.5e6, TWO_PI * 2e6


def cases():
    rng = np.random.default_rng(0)
    n = 20_000
    grid_args = (
        TWO_PI * 3.15e9 + rng.uniform(-50e6, 50e6, n) * TWO_PI,
        rng.uniform(0.0, 20.0, n) * TWO_PI * 10.5e6,
        np.full(n, TWO_PI * 10.5e6),
        np.full(n, TWO_PI * 5.6e6),
        np.full(n, TWO_PI * 3.15e9),
    )
    window_args = (
        (1.0, 0.0, 0.0, 0.0), 0.0, 2e-7,
        (TWO_PI * 1e9, 0.0, TWO_PI * 1e7, TWO_PI * 1e6, TWO_PI * 1e9, 1),
        (0.5 * G1, 0.0, G2), 1e-9, 1e-11, 50_000_000,
    )
    return {
        "bessel_jn x=12.3 n=60 (x1000)": lambda m: [m.bessel_jn(12.3, 60) for _ in range(1000)],
        "dominant_sideband single (x1000)": lambda m: [
            m.dominant_sideband(TWO_PI * 3.16e9, TWO_PI * 21e6, TWO_PI * 10.5e6, TWO_PI * 5.6e6,
                                TWO_PI * 3.15e9, G1, G2, 40) for _ in range(1000)
        ],
        "dominant_sideband_grid 20000 cells": lambda m: m.dominant_sideband_grid(*grid_args, G1, G2, 40),
        "two_level_window 200 ns at 1 GHz": lambda m: m.two_level_window(*window_args),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    found = kernels.backends()
    if "compiled" not in found:
        print("compiled extension not built; only the python backend is available")
    print(f"{'case':40s} {'python [s]':>12s} {'compiled [s]':>13s} {'speed-up':>9s}")
    for name, fn in cases().items():
        times = {k: min(timeit.repeat(lambda: fn(m), number=1, repeat=args.repeat)) for k, m in found.items()}
        py = times["python"]
        if "compiled" in times:
            c = times["compiled"]
            print(f"{name:40s} {py:12.4f} {c:13.4f} {py / c:8.1f}x")
        else:
            print(f"{name:40s} {py:12.4f} {'-':>13s} {'-':>9s}")


if __name__ == "__main__":
    main()
