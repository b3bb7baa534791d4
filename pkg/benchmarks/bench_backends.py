"""Time the numba kernels against their numpy fallbacks.

Run with ``python benchmarks/bench_backends.py [--sizes 500 2000]``. Both
variants are imported directly, so the ``SPHDKI_NO_NUMBA`` flag is irrelevant
here. Each row also reports the largest absolute difference between the two
outputs.
"""
import argparse
import time

import numpy as np

from sphdki import _kernels as K
from sphdki._accel import HAVE_NUMBA
from sphdki.sphere import pairwise_geodesic, uniform_sample


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def cases(n):
    X = uniform_sample(2, n, seed=1)
    T = uniform_sample(2, n // 2, seed=2)
    w = np.full(n, 1.0 / n)
    dist = pairwise_geodesic(X)
    order = np.random.default_rng(3).permutation(n).astype(np.int64)
    return {
        "kernel_gram wendland": lambda b: b["kernel_gram"](X, K.WENDLAND, 0.0),
        "kernel_gram gaussian": lambda b: b["kernel_gram"](X, K.GAUSSIAN, 0.5),
        "kernel_cross wendland": lambda b: b["kernel_cross"](T, X, K.WENDLAND, 0.0),
        "max_offdiag_dot": lambda b: b["max_offdiag_dot"](X),
        "min_max_dot": lambda b: b["min_max_dot"](T, X),
        "zonal_sums k<=30": lambda b: b["zonal_sums"](X, w, 30, 2),
        "saj_stage1 cap=0.2": lambda b: b["saj_stage1"](dist, 0.2, order),
    }


def backends():
    names = ("kernel_gram", "kernel_cross", "max_offdiag_dot", "min_max_dot", "zonal_sums", "saj_stage1")
    out = {"numpy": {n: getattr(K, "np_" + n) for n in names}}
    if HAVE_NUMBA:
        out["numba"] = {n: getattr(K, "nb_" + n) for n in names}
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[500, 2000])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    impls = backends()
    if "numba" in impls:
        for fn in cases(50).values():  # compile outside the timed region
            fn(impls["numba"])
    print(f"{'case':<24}{'n':>7}{'numpy s':>11}{'numba s':>11}{'speedup':>9}{'max diff':>11}")
    for n in args.sizes:
        for name, fn in cases(n).items():
            t_np, r_np = best_of(lambda: fn(impls["numpy"]), args.repeats)
            if "numba" not in impls:
                print(f"{name:<24}{n:>7}{t_np:>11.4f}{'-':>11}{'-':>9}{'-':>11}")
                continue
            t_nb, r_nb = best_of(lambda: fn(impls["numba"]), args.repeats)
            diff = float(np.max(np.abs(np.asarray(r_np, float) - np.asarray(r_nb, float))))
            print(f"{name:<24}{n:>7}{t_np:>11.4f}{t_nb:>11.4f}{t_np / t_nb:>9.1f}{diff:>11.2e}")


if __name__ == "__main__":
    main()
