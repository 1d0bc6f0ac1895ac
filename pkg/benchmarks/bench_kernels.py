"""Timing comparison of the two kernel backends.

Runs each hot kernel on matched inputs through the jit backend and the
pure-NumPy reference, printing the median wall time per call and the
speedup. The jit backend is warmed before timing so compilation cost
never pollutes a measurement.

Usage: python3 benchmarks/bench_kernels.py [--rows 20000 100000] [--repeats 5]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from fraudlab.kernels import get_backend
from fraudlab.models.common import presort_columns


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def _make_data(n: int, f: int, seed: int):
    rng = np.random.default_rng(seed)
    x = rng.normal(0.0, 1.0, (n, f))
    # carve a minority pocket so trees have real structure to find
    y = ((x[:, 0] > 1.2) & (x[:, 1] < -0.4)).astype(np.uint8)
    return x, y


def bench_build_gini(backend, x, y, n_sub: int):
    xt, order = presort_columns(x)
    w = np.ones(y.size, dtype=np.float64)
    mult = np.ones(y.size, dtype=np.int32)
    return lambda: backend.build_gini_tree(
        xt, y, w, mult, order, -1, 2, 1, n_sub, np.uint64(42))


def bench_build_gbt(backend, x, y):
    xt, order = presort_columns(x)
    rng = np.random.default_rng(0)
    p = rng.uniform(0.05, 0.95, y.size)
    grad = p - y
    hess = p * (1.0 - p)
    return lambda: backend.build_gbt_tree(xt, grad, hess, order, 3, 1.0, 1.0)


def bench_apply(backend, x, y):
    ref = get_backend("numpy")
    xt, order = presort_columns(x)
    w = np.ones(y.size, dtype=np.float64)
    mult = np.ones(y.size, dtype=np.int32)
    feat, thr, left, right, _, _, n_nodes = ref.build_gini_tree(
        xt, y, w, mult, order, -1, 2, 1, x.shape[1], np.uint64(42))
    sl = slice(0, n_nodes)
    nodes = (feat[sl].copy(), thr[sl].copy(), left[sl].copy(), right[sl].copy())
    return lambda: backend.apply_tree(*nodes, x)


def bench_knn(backend, x, y):
    pts = x[: min(2000, x.shape[0])]
    return lambda: backend.knn_brute(pts, 5)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, nargs="+",
                        default=[20_000, 100_000])
    parser.add_argument("--features", type=int, default=6)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    numpy_be = get_backend("numpy")
    try:
        numba_be = get_backend("numba")
    except Exception as exc:
        print(f"jit backend unavailable ({exc}); nothing to compare")
        return 1

    f = args.features
    n_sub = max(1, math.isqrt(f) + (0 if math.isqrt(f) ** 2 == f else 1))
    header = f"{'kernel':<24}{'rows':>9}{'numpy':>12}{'numba':>12}{'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n in args.rows:
        x, y = _make_data(n, f, seed=1)
        cases = [
            ("build_gini_tree(all)", lambda be: bench_build_gini(be, x, y, f)),
            ("build_gini_tree(sqrt)",
             lambda be: bench_build_gini(be, x, y, n_sub)),
            ("build_gbt_tree", lambda be: bench_build_gbt(be, x, y)),
            ("apply_tree", lambda be: bench_apply(be, x, y)),
            ("knn_brute(2000x6,k=5)", lambda be: bench_knn(be, x, y)),
        ]
        for name, make in cases:
            fn_np = make(numpy_be)
            fn_nb = make(numba_be)
            fn_nb()                          # compile before timing
            t_np = _median_time(fn_np, args.repeats)
            t_nb = _median_time(fn_nb, args.repeats)
            print(f"{name:<24}{n:>9}{t_np * 1e3:>10.1f}ms"
                  f"{t_nb * 1e3:>10.1f}ms{t_np / t_nb:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
