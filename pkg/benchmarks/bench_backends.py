"""Timing comparison of the numba and numpy compute backends.

Runs the three hot workloads (empirical L^1 and L^2 distances over a
bootstrap-sized batch, and one EM fit) on each available backend and prints
a small table of median wall times.

Usage: python benchmarks/bench_backends.py [--batch 200] [--repeats 5]
"""

import argparse
import statistics
import time

import numpy as np

import agof
from agof import DistanceConfig, FamilyId, Sample


def _median_time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def _distance_batch(sample, model, p, batch):
    cfg = DistanceConfig(p=p)
    rng = np.random.default_rng(0)
    n = sample.data.size

    def run():
        for _ in range(batch):
            idx = rng.integers(0, n, size=n)
            resample = Sample(sample.data[idx])
            theta = agof.fit_mle(FamilyId.exponential(), resample)
            refit = agof.FittedModel(FamilyId.exponential(), theta)
            agof.empirical_model_distance(resample, refit, cfg)

    return run


def _em_workload(sample):
    def run():
        agof.em_fit_mixture(sample, 2, agof.EmConfig(restarts=5, seed=3))
    return run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--batch", type=int, default=200,
                    help="replicate count per distance timing (default 200)")
    ap.add_argument("--repeats", type=int, default=5,
                    help="timed repetitions, median reported (default 5)")
    ap.add_argument("--n", type=int, default=500,
                    help="sample size (default 500)")
    args = ap.parse_args()

    sample = agof.draw_sample(agof.weibull_model(2.0, 1.0), args.n, 42)
    em_sample = agof.draw_sample(
        agof.mixture_model([0.6, 0.4], [0.0, 3.0], [1.0, 0.7]), args.n, 7)

    workloads = [
        (f"{args.batch} replicate norms, p=1, n={args.n}",
         lambda: _distance_batch(sample, None, 1.0, args.batch)),
        (f"{args.batch} replicate norms, p=2, n={args.n}",
         lambda: _distance_batch(sample, None, 2.0, args.batch)),
        (f"EM fit, k=2, 5 restarts, n={args.n}",
         lambda: _em_workload(em_sample)),
    ]

    backends = agof.available_backends()
    print(f"backends available: {', '.join(backends)}")
    results = {}
    for backend in backends:
        agof.set_backend(backend)
        for label, make in workloads:
            fn = make()
            fn()  # warm up (JIT compilation, caches)
            results[(backend, label)] = _median_time(fn, args.repeats)

    width = max(len(label) for label, _ in workloads)
    header = f"{'workload':<{width}}  " + "  ".join(f"{b:>10}" for b in backends)
    print(header)
    print("-" * len(header))
    for label, _ in workloads:
        cells = "  ".join(f"{results[(b, label)]*1e3:>8.1f}ms" for b in backends)
        print(f"{label:<{width}}  {cells}")
    if set(backends) >= {"numba", "numpy"}:
        print()
        for label, _ in workloads:
            ratio = results[("numpy", label)] / results[("numba", label)]
            print(f"numpy/numba ratio, {label}: {ratio:.2f}x")


if __name__ == "__main__":
    main()
