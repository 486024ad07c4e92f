"""Benchmark the compiled kernels against the Python fallback.

Usage: python benchmarks/bench_kernels.py [--repeat N]

Covers the two hot paths: candidate support counting over transaction
bitsets (rule mining) and the repair-path search over the full 81-state
grid (planning).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from drivesafe._kernels import HAVE_COMPILED, get_backend


def make_bitsets(gen, n_rows, n_items, density=0.3):
    n_words = max(1, (n_items + 63) // 64)
    words = np.zeros((n_rows, n_words), dtype=np.uint64)
    for i in range(n_rows):
        for bit in np.flatnonzero(gen.random(n_items) < density):
            words[i, bit >> 6] |= np.uint64(1) << np.uint64(int(bit) & 63)
    return words


def make_logp(gen, n_states, n_contents):
    counts = gen.integers(0, 3, size=(n_states, n_contents, n_states))
    totals = counts.sum(axis=2, keepdims=True) + n_states
    return np.log((counts + 1.0) / totals)


def bench(label, fn, repeat):
    best = min(timeit(fn) for _ in range(repeat))
    print(f"  {label:<28} {best * 1e3:9.3f} ms")
    return best


def timeit(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    gen = np.random.default_rng(0)
    tx = make_bitsets(gen, 5000, 96)
    cands = make_bitsets(gen, 400, 96, density=0.05)
    logp = make_logp(gen, 81, 24)
    target = np.zeros(81, dtype=np.uint8)
    target[45:] = 1

    backends = ["python"] + (["compiled"] if HAVE_COMPILED else [])
    results = {}
    for name in backends:
        support_counts, viterbi_path = get_backend(name)
        print(f"backend: {name}")
        results[name, "support"] = bench(
            "support_counts 5000x400", lambda: support_counts(tx, cands), args.repeat
        )
        results[name, "viterbi"] = bench(
            "viterbi 81 states x 24 x h5", lambda: viterbi_path(logp, 10, target, 5), args.repeat
        )

    if HAVE_COMPILED:
        sc_py, sc_cy = get_backend("python")[0], get_backend("compiled")[0]
        vp_py, vp_cy = get_backend("python")[1], get_backend("compiled")[1]
        assert np.array_equal(sc_py(tx, cands), sc_cy(tx, cands))
        assert vp_py(logp, 10, target, 5) == vp_cy(logp, 10, target, 5)
        print("backends agree on the benchmark inputs")
        for kernel in ("support", "viterbi"):
            speedup = results["python", kernel] / results["compiled", kernel]
            print(f"  {kernel}: compiled is {speedup:.1f}x the python fallback")
    else:
        print("compiled extension unavailable; benchmarked the fallback only")


if __name__ == "__main__":
    main()
