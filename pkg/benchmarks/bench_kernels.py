"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5]

Inputs mirror pipeline workloads: a 60 s recording through the median
filter, nearest-centroid assignment of a training fold's frames, and an SVM
dual solve on a fold-sized Gram matrix.
"""

import argparse
import timeit

import numpy as np

from gugt import _kernels


def workloads(rng):
    frames = rng.normal(size=(1800, 60))
    X = rng.normal(size=(12000, 4))
    C = rng.normal(size=(10, 4))
    n = 300
    P = rng.normal(size=(n, 13))
    y = np.where(P[:, 0] + 0.5 * rng.normal(size=n) > 0, 1.0, -1.0)
    K = np.exp(-(1 / 13) * ((P[:, None] - P[None]) ** 2).sum(-1))
    return {
        "median_filter_shrink (1800x60, w=5)": ("median_filter_shrink", (frames, 5)),
        "nearest_centroid (12000x4, K=10)": ("nearest_centroid", (X, C)),
        "smo_solve (n=300, C=10)": ("smo_solve", (K, y, 10.0, 1e-3, 300_000)),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _kernels.compiled is None:
        print("compiled kernels are not built; only the fallback is available")
        return 1
    rng = np.random.default_rng(0)
    print(f"{'kernel':40s} {'compiled ms':>12s} {'fallback ms':>12s} {'speedup':>8s}")
    for name, (fn, a) in workloads(rng).items():
        times = {}
        for backend in ("compiled", "fallback"):
            f = getattr(getattr(_kernels, backend), fn)
            times[backend] = min(timeit.repeat(lambda: f(*a), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:40s} {times['compiled']:12.2f} {times['fallback']:12.2f} "
              f"{times['fallback'] / times['compiled']:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
