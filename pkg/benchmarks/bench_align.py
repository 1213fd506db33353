"""Compare the numba and pure-numpy alignment kernels.

    python benchmarks/bench_align.py [--pairs 5000] [--max-len 40]

Both kernels are imported directly, so the env flag does not matter here.
"""

import argparse
import time

import numpy as np

from qesynth import kernels


def make_pairs(n, max_len, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        h = rng.integers(0, 50, rng.integers(1, max_len + 1)).astype(np.int32)
        r = rng.integers(0, 50, rng.integers(1, max_len + 1)).astype(np.int32)
        out.append((h, r))
    return out


def run(table_fn, trace_fn, pairs):
    start = time.perf_counter()
    total = 0
    for h, r in pairs:
        t = table_fn(h, r)
        trace_fn(t, h, r)
        total += int(t[0, 0])
    return time.perf_counter() - start, total


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--pairs", type=int, default=5000)
    ap.add_argument("--max-len", type=int, default=40)
    args = ap.parse_args()
    pairs = make_pairs(args.pairs, args.max_len)

    backends = {"numpy": (kernels._suffix_table_numpy, kernels._trace_loops)}
    try:
        from numba import njit

        nb_table = njit(cache=True)(kernels._suffix_table_loops)
        nb_trace = njit(cache=True)(kernels._trace_loops)
        run(nb_table, nb_trace, pairs[:2])  # compile
        backends["numba"] = (nb_table, nb_trace)
    except ImportError:
        print("numba not installed; numpy only")

    results = {}
    for name, (tf, tr) in backends.items():
        secs, total = run(tf, tr, pairs)
        results[name] = secs
        print(f"{name:>6}: {secs:8.3f}s  ({args.pairs / secs:10.0f} pairs/s)  checksum={total}")
    if len(results) == 2:
        print(f"speedup: {results['numpy'] / results['numba']:.1f}x")


if __name__ == "__main__":
    main()
