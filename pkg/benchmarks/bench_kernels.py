"""Time the numba and numpy kernel implementations side by side.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]

Each kernel is called directly through its ``_numba`` and ``_numpy`` variant,
so the ``LUNARCOMM_NUMBA`` flag does not matter here. The numba variants are
warmed up once before timing so compilation is excluded. The last columns
report the largest disagreement between the two paths.
"""
from __future__ import annotations

import argparse
import math
import time

import numpy as np

from lunarcomm import kernels


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def cases(n, rng):
    m = rng.uniform(0, 2 * math.pi, n)
    e = rng.uniform(0, 0.95, n)
    p1, p2, c = (rng.normal(0, 8000, (n, 3)) for _ in range(3))
    r = rng.uniform(500, 6000, n)
    return [
        ("solve_kepler", lambda: kernels._solve_kepler_numba(m, e)[0], lambda: kernels._solve_kepler_numpy(m.copy(), e)[0]),
        ("segment_clear", lambda: kernels._segment_clear_numba(p1, p2, c, r), lambda: kernels._segment_clear_numpy(p1, p2, c, r)),
        ("elevation_deg", lambda: kernels._elevation_numba(p1, c, p2), lambda: kernels._elevation_numpy(p1, c, p2)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000, help="elements per call")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not kernels.USE_NUMBA and not hasattr(kernels._solve_kepler_numba, "py_func"):
        raise SystemExit("numba is not available; nothing to compare")

    rng = np.random.default_rng(0)
    print(f"n = {args.n:,}, best of {args.repeat}")
    print(f"{'kernel':<15}{'numba (ms)':>12}{'numpy (ms)':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, fast, slow in cases(args.n, rng):
        fast()  # compile
        t_fast, a = best_of(fast, args.repeat)
        t_slow, b = best_of(slow, args.repeat)
        diff = float(np.max(np.abs(a.astype(float) - b.astype(float))))
        print(f"{name:<15}{1e3 * t_fast:>12.2f}{1e3 * t_slow:>12.2f}{t_slow / t_fast:>9.1f}x{diff:>14.2e}")


if __name__ == "__main__":
    main()
