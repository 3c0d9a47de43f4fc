"""Timing comparison of the compiled and pure-numpy kernel backends.

Runs each hot kernel on the same random inputs through both backend
modules and prints per-call times plus the speedup. The first compiled
call pays JIT compilation; it is excluded by a warmup pass.

Usage:
    python3 benchmarks/bench_kernels.py [--n 5000] [--m 5] [--k 10]
"""

import argparse
import time

import numpy as np

from ensemblex import _kernels_np as knp

try:
    from ensemblex import _kernels_nb as knb
except ImportError:
    knb = None


def time_call(fn, args, repeats):
    """Median seconds per call over `repeats` timed runs."""
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n", type=int, default=5000, help="units")
    parser.add_argument("--m", type=int, default=5, help="learners")
    parser.add_argument("--k", type=int, default=10, help="classes")
    parser.add_argument("--repeats", type=int, default=50)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    scores = rng.standard_normal((args.n, args.m, args.k)) * 3.0
    labels = rng.integers(0, args.k, size=args.n)
    weights = rng.dirichlet(np.ones(args.m))
    flat = scores.reshape(args.n * args.m, args.k)

    cases = [
        ("softmax2d", (flat,)),
        ("logsumexp2d", (flat,)),
        ("combine_scores", (scores, weights)),
        ("stacked_nll", (scores, labels, weights)),
        ("stacked_nll_grad", (scores, labels, weights)),
    ]

    print(f"n={args.n} m={args.m} k={args.k} repeats={args.repeats}")
    header = f"{'kernel':<18} {'numpy (ms)':>12} {'numba (ms)':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for name, call_args in cases:
        np_fn = getattr(knp, name)
        t_np = time_call(np_fn, call_args, args.repeats)
        if knb is None:
            print(f"{name:<18} {t_np * 1e3:>12.3f} {'missing':>12} {'':>9}")
            continue
        nb_fn = getattr(knb, name)
        nb_fn(*call_args)  # warm the JIT cache outside the timer
        t_nb = time_call(nb_fn, call_args, args.repeats)
        print(
            f"{name:<18} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f}"
            f" {t_np / t_nb:>8.1f}x"
        )


if __name__ == "__main__":
    main()
