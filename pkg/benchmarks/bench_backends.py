#!/usr/bin/env python3
"""Compare the compiled Cython kernels against the numpy fallback.

Run: python benchmarks/bench_backends.py [--bases N]

Kernel benchmarks run both implementations in-process; the end-to-end
build/query benchmark re-executes this script once per backend via
IDLHASH_BACKEND so each run selects its backend at import.
"""

from __future__ import annotations

import argparse
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(bases: int) -> None:
    from idlhash import _kernels_np as knp
    from idlhash import gene

    try:
        from idlhash import _kernels as kc
    except ImportError:
        print("compiled kernels unavailable; nothing to compare")
        return

    data = gene.random_genome(bases, rng_seed=1)
    digests = knp.hash_windows(data, 16, 3)
    locs = np.random.default_rng(0).integers(0, 2**24, size=4 * (bases - 30), dtype=np.uint64)
    words = np.zeros(2**24 // 64, dtype=np.uint64)

    cases = [
        ("hash_windows k=31", lambda k: k.hash_windows(data, 31, 3), bases - 30),
        ("hash_windows t=16", lambda k: k.hash_windows(data, 16, 3), bases - 15),
        ("rolling_min w=16 eta=4", lambda k: k.rolling_min(digests, 16, 4), digests.size - 15),
        ("hash_u64_many", lambda k: k.hash_u64_many(digests, 9), digests.size),
        ("bloom_set", lambda k: k.bloom_set(words, locs), locs.size),
        ("bloom_get", lambda k: k.bloom_get(words, locs), locs.size),
    ]
    print(f"\nkernel benchmarks over {bases} bases (best of 3):")
    print(f"{'kernel':<26}{'numpy':>12}{'compiled':>12}{'speedup':>9}   (Mops/s)")
    for name, fn, ops in cases:
        t_np = _time(lambda: fn(knp))
        t_c = _time(lambda: fn(kc))
        print(
            f"{name:<26}{ops / t_np / 1e6:>12.1f}{ops / t_c / 1e6:>12.1f}"
            f"{t_np / t_c:>9.2f}x"
        )


def bench_end_to_end() -> None:
    from idlhash import backend_name, gene
    from idlhash.bloom import bf_new
    from idlhash.hash_core import HashScheme, IdlConfig

    corpus = gene.random_genome(500_000, rng_seed=2)
    queries = [corpus[i : i + 128] for i in range(0, 100_000, 128)]
    cfg = IdlConfig(k=31, t=16, l=512, m=2**24, eta=4, base_seed=5, scheme=HashScheme.IDL)
    t0 = time.perf_counter()
    bf = bf_new(cfg).insert_sequence(corpus).freeze()
    t_build = time.perf_counter() - t0
    t0 = time.perf_counter()
    hits = sum(bf.query_sequence(q, early_exit=False).is_member for q in queries)
    t_query = time.perf_counter() - t0
    kq = sum(len(q) - 30 for q in queries)
    print(
        f"backend={backend_name():<9} insert {bf.n_inserted / t_build / 1e6:6.2f} Mkmer/s   "
        f"query {kq / t_query / 1e6:6.2f} Mkmer/s   ({hits} members)"
    )


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--bases", type=int, default=2_000_000)
    parser.add_argument("--end-to-end-child", action="store_true", help=argparse.SUPPRESS)
    args = parser.parse_args()

    if args.end_to_end_child:
        bench_end_to_end()
        return

    bench_kernels(args.bases)
    print("\nend-to-end IDL filter build/query (500k bases, 781 query reads):", flush=True)
    for backend in ("compiled", "python"):
        env = dict(os.environ, IDLHASH_BACKEND=backend)
        subprocess.run(
            [sys.executable, __file__, "--end-to-end-child"], env=env, check=False
        )


if __name__ == "__main__":
    main()
