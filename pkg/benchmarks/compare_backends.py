#!/usr/bin/env python3
"""Time the numeric kernels on every built backend.

The package selects the compiled extension at import when it is available
and falls back to pure numpy otherwise; this script shows what that choice
costs. Sizes go well past the typical workload-corpus scale so the kernel
cost dominates the call overhead.

Usage:
    python benchmarks/compare_backends.py [--sizes 32,128,512] [--repeats 5]
"""

import argparse
import time

import numpy as np

from hpcai500 import _kernels as kernels


def best_of(repeats, fn, *args):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def benchmark(sizes, repeats):
    backends = kernels.available_backends()
    rng = np.random.default_rng(0)
    print(f"built backends: {', '.join(backends)} (active: {kernels.BACKEND})")
    header = f"{'kernel':<24}{'n':>6}" + "".join(
        f"{b + ' (ms)':>16}" for b in backends
    )
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for n in sizes:
        x = np.ascontiguousarray(rng.normal(size=(n, 8)))
        d2 = kernels.get_backend("numpy").pairwise_sq_dists(x)
        y = np.ascontiguousarray(rng.normal(size=(n, 2)))
        p = rng.random((n, n))
        p = np.ascontiguousarray((p + p.T) / (p + p.T).sum())
        np.fill_diagonal(p, 0.0)
        centroids = np.ascontiguousarray(x[: max(2, n // 8)].copy())
        cases = [
            ("pairwise_sq_dists", lambda b: b.pairwise_sq_dists(x)),
            (
                "conditional_affinities",
                lambda b: b.conditional_affinities(d2, 30.0, 1e-4, 200),
            ),
            ("tsne_grad", lambda b: b.tsne_grad(p, y)),
            ("kl_divergence", lambda b: b.kl_divergence(p, y)),
            ("lloyd_iteration", lambda b: b.lloyd_iteration(x, centroids)),
        ]
        for name, call in cases:
            times = [
                best_of(repeats, call, kernels.get_backend(backend))
                for backend in backends
            ]
            row = f"{name:<24}{n:>6}" + "".join(
                f"{t * 1e3:>16.3f}" for t in times
            )
            if len(times) == 2:
                numpy_t = times[backends.index("numpy")]
                other_t = times[1 - backends.index("numpy")]
                row += f"{numpy_t / other_t:>9.1f}x"
            print(row)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", default="32,128,512")
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    benchmark(sizes, args.repeats)


if __name__ == "__main__":
    main()
