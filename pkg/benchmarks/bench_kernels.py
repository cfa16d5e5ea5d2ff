"""Time the numba and numpy versions of the dynamic-programming kernels.

    python benchmarks/bench_kernels.py [--len 60] [--reps 20]

Each kernel runs on random id sequences of the given length.  The numba
functions are called once first so compilation is not timed.
"""

import argparse
import time

import numpy as np

from felix import _kernels as K

KERNELS = [
    ("edit_distance", lambda m, a, b: getattr(K, m + "_edit_distance")(a, b)),
    ("edit_ops", lambda m, a, b: getattr(K, m + "_edit_ops")(a, b)),
    ("lcs_length", lambda m, a, b: getattr(K, m + "_lcs_length")(a, b)),
    ("best_shift", lambda m, a, b: getattr(K, m + "_best_shift")(a, b, 10)),
]


def best_of(fn, reps):
    best = float("inf")
    for _ in range(reps):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--len", type=int, default=60)
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    a = rng.integers(0, 20, args.len).astype(np.int64)
    b = rng.integers(0, 20, args.len).astype(np.int64)
    methods = ["np"] + (["nb"] if K.HAVE_NUMBA else [])
    print(f"sequence length {args.len}, best of {args.reps}")
    print(f"{'kernel':<15}{'numpy ms':>12}{'numba ms':>12}{'speedup':>10}")
    for name, call in KERNELS:
        times = {}
        for m in methods:
            call(m, a, b)  # warm-up / compile
            reps = max(1, args.reps // 10) if name == "best_shift" and m == "np" else args.reps
            times[m] = best_of(lambda: call(m, a, b), reps)
        if "nb" in times:
            assert np.array_equal(np.asarray(call("np", a, b)), np.asarray(call("nb", a, b)))
            print(f"{name:<15}{times['np'] * 1e3:>12.3f}{times['nb'] * 1e3:>12.3f}{times['np'] / times['nb']:>9.1f}x")
        else:
            print(f"{name:<15}{times['np'] * 1e3:>12.3f}{'-':>12}{'-':>10}")


if __name__ == "__main__":
    main()
