#!/usr/bin/env python3
"""Timing comparison of the compiled core against the NumPy fallback.

Runs the two hot kernels -- the exact weighted quantile-regression solver and
the weighted product-limit survival curve -- on identical random instances
through both implementations, checks that they agree, and prints median wall
times with the speedup:

    python benchmarks/bench_backends.py [--sizes 100,400,1600] [--repeats 7]
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from censout import _pycore

try:
    from censout import _core
except ImportError:
    _core = None


def wqr_instance(r, n, p=2):
    design = np.hstack([np.ones((n, 1)), r.uniform(0.0, 1.0, size=(n, p))])
    z = design @ r.normal(0.0, 2.0, size=p + 1) + r.normal(0.0, 1.0, size=n)
    c = r.uniform(0.05, 2.0, size=n)
    return design, z, c, 0.5


def km_instance(r, n):
    times = np.sort(np.round(r.uniform(0.0, 50.0, size=n), 1))  # forces ties
    b = r.uniform(0.0, 1.0, size=n)
    delta = (r.uniform(size=n) < 0.7).astype(np.int8)
    first = np.zeros(n, dtype=np.int64)
    for j in range(1, n):
        first[j] = first[j - 1] if times[j] == times[j - 1] else j
    return b, delta, first


def median_time(fn, args, repeats):
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="100,400,1600",
                        help="comma-separated instance sizes")
    parser.add_argument("--repeats", type=int, default=7,
                        help="timing repeats per cell (median reported)")
    opts = parser.parse_args(argv)
    sizes = [int(s) for s in opts.sizes.split(",") if s.strip()]

    if _core is None:
        print("compiled core not built; timing the pure backend only")
    header = f"{'kernel':<14}{'n':>6}{'pure (ms)':>12}{'compiled (ms)':>15}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    r = np.random.default_rng(20260817)
    for n in sizes:
        solver_args = wqr_instance(r, n)
        km_args = km_instance(r, n)
        for kernel, args in (("solve_wqr", solver_args), ("km_survival", km_args)):
            fn_pure = getattr(_pycore, kernel)
            t_pure = median_time(fn_pure, args, opts.repeats)
            if _core is None:
                print(f"{kernel:<14}{n:>6}{t_pure * 1e3:>12.3f}{'-':>15}{'-':>9}")
                continue
            fn_fast = getattr(_core, kernel)
            a = fn_pure(*args)
            b = fn_fast(*args)
            if kernel == "solve_wqr":
                np.testing.assert_allclose(a[0], b[0], rtol=0.0, atol=1e-12)
                assert a[4] == b[4]
            else:
                np.testing.assert_array_equal(a, b)
            t_fast = median_time(fn_fast, args, opts.repeats)
            print(f"{kernel:<14}{n:>6}{t_pure * 1e3:>12.3f}"
                  f"{t_fast * 1e3:>15.3f}{t_pure / t_fast:>9.1f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
