#!/usr/bin/env python3
"""Time the compiled kernels against the pure numpy fallback.

Usage: python benchmarks/bench_kernels.py [--samples N] [--repeats R]
"""

import argparse
import time

import numpy as np

from simgap._kernels import pure

try:
    from simgap._kernels import _fast
except ImportError:
    _fast = None


def unit_quats(rng, n):
    q = rng.normal(size=(n, 4))
    return np.ascontiguousarray(q / np.linalg.norm(q, axis=1, keepdims=True))


def best_of(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--samples", type=int, default=200_000)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n = args.samples
    pa = np.ascontiguousarray(rng.normal(size=(n, 3)))
    pb = np.ascontiguousarray(rng.normal(size=(n, 3)))
    qa = unit_quats(rng, n)
    qb = unit_quats(rng, n)
    tau = np.ascontiguousarray(rng.normal(size=(n, 6)))
    speed = np.ascontiguousarray(np.abs(rng.normal(size=n)))

    cases = [
        ("mean_point_distance", (pa, pb)),
        ("mean_quat_angle", (qa, qb)),
        ("mean_pose_distance", (pa, qa, pb, qb, 37.0)),
        ("forward_difference", (pa, 0.1)),
        ("row_norms", (pa,)),
        ("abs_row_sums", (tau,)),
        ("row_sums", (tau,)),
        ("moving_mask", (speed, 0.5, 3)),
    ]

    print(f"n = {n} samples, best of {args.repeats} runs")
    header = f"{'kernel':<22} {'pure [ms]':>10}"
    if _fast is not None:
        header += f" {'fast [ms]':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, call_args in cases:
        t_pure = best_of(getattr(pure, name), call_args, args.repeats)
        line = f"{name:<22} {1e3 * t_pure:>10.3f}"
        if _fast is not None:
            t_fast = best_of(getattr(_fast, name), call_args, args.repeats)
            line += f" {1e3 * t_fast:>10.3f} {t_pure / t_fast:>7.1f}x"
        print(line)
    if _fast is None:
        print("\ncompiled backend not built; showing the fallback only")


if __name__ == "__main__":
    main()
