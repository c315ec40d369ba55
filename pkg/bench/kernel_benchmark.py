"""Benchmark of the compiled kernel extension against the NumPy fallback.

Times the five hot kernels on a range of problem sizes plus one end-to-end
ALS sweep per size, and prints a table with the speed ratio.  Run as

    python3 bench/kernel_benchmark.py [--repeats N]

The compiled backend is skipped (with a note) when the extension is absent.
"""

import argparse
import time

import numpy as np

from cpkit import _kernels_np

try:
    from cpkit import _kernels_cy
except ImportError:
    _kernels_cy = None

SIZES = [
    ("small", (6, 6, 6), 3),
    ("medium", (12, 14, 16), 5),
    ("large", (24, 28, 32), 8),
]


def _time(fn, repeats):
    fn()  # warm up
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def kernel_cases(impl, T, A, B, C):
    return {
        "khatri_rao": lambda: impl.khatri_rao(B, C),
        "mttkrp(1)": lambda: impl.mttkrp(T, B, C, 1),
        "cp_compose": lambda: impl.cp_compose(A, B, C),
        "residual_sq": lambda: impl.residual_sq(T, A, B, C),
        "gram_kernel": lambda: impl.gram_kernel(T),
    }


def als_sweep_case(impl, T, A, B, C):
    def sweep():
        fa = A
        for mode, (X, Y) in ((1, (B, C)), (2, (fa, C)), (3, (fa, B))):
            rhs = impl.mttkrp(T, X, Y, mode)
            G = (X.T @ X) * (Y.T @ Y)
            np.linalg.solve(G + 1e-12 * np.eye(G.shape[0]), rhs.T)
        impl.residual_sq(T, A, B, C)
    return sweep


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=7)
    args = parser.parse_args()

    if _kernels_cy is None:
        print("compiled extension not built; timing the NumPy backend only")

    header = f"{'size':8s} {'kernel':12s} {'numpy':>10s} {'compiled':>10s} {'ratio':>7s}"
    print(header)
    print("-" * len(header))
    for label, dims, rank in SIZES:
        rng = np.random.default_rng(0)
        T = rng.standard_normal(dims)
        A = rng.standard_normal((dims[0], rank))
        B = rng.standard_normal((dims[1], rank))
        C = rng.standard_normal((dims[2], rank))
        cases = list(kernel_cases(_kernels_np, T, A, B, C).items())
        cases.append(("als_sweep", als_sweep_case(_kernels_np, T, A, B, C)))
        if _kernels_cy is not None:
            compiled = kernel_cases(_kernels_cy, T, A, B, C)
            compiled["als_sweep"] = als_sweep_case(_kernels_cy, T, A, B, C)
        for name, fn in cases:
            t_np = _time(fn, args.repeats)
            if _kernels_cy is None:
                print(f"{label:8s} {name:12s} {t_np * 1e6:9.1f}u {'-':>10s} {'-':>7s}")
                continue
            t_cy = _time(compiled[name], args.repeats)
            ratio = t_np / t_cy if t_cy > 0 else float("inf")
            print(f"{label:8s} {name:12s} {t_np * 1e6:9.1f}u "
                  f"{t_cy * 1e6:9.1f}u {ratio:6.2f}x")
        print()


if __name__ == "__main__":
    main()
