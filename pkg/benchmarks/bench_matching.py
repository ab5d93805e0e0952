"""Compare the compiled and pure-Python greedy coincidence kernels.

Usage: python benchmarks/bench_matching.py [--events N] [--repeat R]
"""
import argparse
import time

import numpy as np

from biphoton import _kernels_py

try:
    from biphoton import _kernels
except ImportError:
    _kernels = None


def stream(n_events, seed=0, jitter_ns=1.5, window_ns=5.0):
    """Half the events form planted pairs, the rest is uniform background."""
    rng = np.random.default_rng(seed)
    span = n_events * 500.0
    n_pairs = n_events // 4
    t = rng.uniform(0, span, n_pairs)
    ta = np.concatenate([t, rng.uniform(0, span, n_events // 4)])
    tb = np.concatenate([t + rng.normal(0, jitter_ns, n_pairs), rng.uniform(0, span, n_events // 4)])
    return np.sort(ta), np.sort(tb), window_ns


def best_time(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--events", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    ta, tb, window = stream(args.events)
    n = ta.size + tb.size
    t_py, (pa, pb) = best_time(_kernels_py.greedy_match, (ta, tb, window), args.repeat)
    print(f"python : {t_py:8.3f} s  {n / t_py:10.3e} events/s  {pa.size} pairs")
    if _kernels is None:
        print("cython : extension not built")
        return
    t_cy, (ca, cb) = best_time(_kernels.greedy_match, (ta, tb, window), args.repeat)
    same = np.array_equal(ca, pa) and np.array_equal(cb, pb)
    print(f"cython : {t_cy:8.3f} s  {n / t_cy:10.3e} events/s  {ca.size} pairs")
    print(f"speedup: {t_py / t_cy:.1f}x, identical output: {same}")


if __name__ == "__main__":
    main()
