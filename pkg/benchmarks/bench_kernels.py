#!/usr/bin/env python3
"""Compare the jitted and pure-numpy kernel flavours on synthetic data.

Run:  python benchmarks/bench_kernels.py [--repeats 200]

The same comparison can be made end to end by running the test suite with
HYDROSTATE_PURE_NUMPY=1, which forces the numpy flavour everywhere.
"""

import argparse
import time

import numpy as np

from hydrostate import _kernels


def timeit(fn, args, repeats):
    fn(*args)  # warm-up (and JIT compile for the numba flavour)
    start = time.perf_counter()
    for _ in range(repeats):
        fn(*args)
    return (time.perf_counter() - start) / repeats


def bench_loss_coefficients(repeats):
    # solver-scale arrays: one call per Newton/Gauss-Newton iteration
    rng = np.random.default_rng(0)
    n = 100
    q = rng.uniform(-5, 5, n)
    scale = rng.uniform(0.1, 30, n)
    exponent = rng.uniform(1.3, 2.2, n)
    args = (q, scale, exponent, 1e-6)
    return "loss_coefficients (n=100, solver scale)", args


def bench_loss_coefficients_large(repeats):
    # past ~1k pipes numpy's vectorized pow takes over; kept for honesty
    rng = np.random.default_rng(0)
    n = 20_000
    q = rng.uniform(-5, 5, n)
    scale = rng.uniform(0.1, 30, n)
    exponent = rng.uniform(1.3, 2.2, n)
    args = (q, scale, exponent, 1e-6)
    return "loss_coefficients (n=20k)", args


def bench_box_violations(repeats):
    rng = np.random.default_rng(1)
    cells, dims = 400, 60
    cell_min = rng.uniform(0, 0.6, (cells, dims))
    cell_max = cell_min + rng.uniform(0, 0.4, (cells, dims))
    p_inf = rng.uniform(0, 0.7, dims)
    p_sup = p_inf + rng.uniform(0, 0.3, dims)
    gamma = rng.uniform(0.5, 8.0, dims)
    args = (cell_min, cell_max, p_inf, p_sup, gamma)
    return "box_violations (400 cells x 60 dims)", args


def bench_expansion_metrics(repeats):
    rng = np.random.default_rng(2)
    cells, dims = 400, 60
    cell_min = rng.uniform(0, 0.6, (cells, dims))
    cell_max = cell_min + rng.uniform(0, 0.3, (cells, dims))
    p_inf = rng.uniform(0, 0.7, dims)
    p_sup = p_inf + rng.uniform(0, 0.2, dims)
    args = (cell_min, cell_max, p_inf, p_sup, 0.5)
    return "expansion_metrics (400 cells x 60 dims)", args


PAIRS = {
    "loss_coefficients": (
        bench_loss_coefficients,
        getattr(_kernels, "loss_coefficients_numba", None),
        _kernels.loss_coefficients_numpy,
    ),
    "loss_coefficients_large": (
        bench_loss_coefficients_large,
        getattr(_kernels, "loss_coefficients_numba", None),
        _kernels.loss_coefficients_numpy,
    ),
    "box_violations": (
        bench_box_violations,
        getattr(_kernels, "box_violations_numba", None),
        _kernels.box_violations_numpy,
    ),
    "expansion_metrics": (
        bench_expansion_metrics,
        getattr(_kernels, "expansion_metrics_numba", None),
        _kernels.expansion_metrics_numpy,
    ),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=200)
    args = parser.parse_args()

    print(f"active backend: {_kernels.backend()}")
    print(f"{'kernel':<42} {'numba':>12} {'numpy':>12} {'speedup':>9}")
    for name, (setup, numba_fn, numpy_fn) in PAIRS.items():
        label, call_args = setup(args.repeats)
        numpy_t = timeit(numpy_fn, call_args, args.repeats)
        if numba_fn is None:
            print(f"{label:<42} {'n/a':>12} {numpy_t * 1e6:>10.1f}us {'n/a':>9}")
            continue
        numba_t = timeit(numba_fn, call_args, args.repeats)
        print(
            f"{label:<42} {numba_t * 1e6:>10.1f}us {numpy_t * 1e6:>10.1f}us"
            f" {numpy_t / numba_t:>8.1f}x"
        )


if __name__ == "__main__":
    main()
