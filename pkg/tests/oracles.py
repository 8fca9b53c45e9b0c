"""Independent test-side oracles: brute-force recomputations used to freeze
and verify expected values. These deliberately avoid the production fast
paths (segment trees, vectorized pipelines) wherever a check targets one.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from idlhash import gene
from idlhash.hash_core import rh64


def exact_jaccard(x: bytes, y: bytes, t: int) -> Fraction:
    sx = {x[i : i + t] for i in range(len(x) - t + 1)}
    sy = {y[i : i + t] for i in range(len(y) - t + 1)}
    union = sx | sy
    return Fraction(len(sx & sy), len(union)) if union else Fraction(0)


def naive_minhash(kmer: bytes, t: int, seed: int) -> int:
    """Fresh scalar digest per sub-kmer window, then a plain min."""
    return min(rh64(kmer[i : i + t], seed) for i in range(len(kmer) - t + 1))


def naive_one_perm(digests, eta: int) -> list[int]:
    """Brute-force shifted minima, independent of the library's helper."""
    shift = (2**64 // eta) % 2**64
    return [min((d - j * shift) % 2**64 for d in digests) for j in range(eta)]


def minhash_collision_rate(x_elems, y_elems, seeds) -> float:
    """Fraction of seeds where the two sets share their minimum digest."""
    from idlhash.hash_core import hash_many_seeds

    seeds = np.asarray(seeds, dtype=np.uint64)
    mx = None
    for e in x_elems:
        h = hash_many_seeds(e, seeds)
        mx = h if mx is None else np.minimum(mx, h)
    my = None
    for e in y_elems:
        h = hash_many_seeds(e, seeds)
        my = h if my is None else np.minimum(my, h)
    return float((mx == my).mean())


class SimilarKmerCounter:
    """Exact |{data kmers sharing >= 1 sub-kmer with a query kmer}|.

    Posting lists over 2-bit sub-kmer codes: an occurrence of a query
    sub-kmer at corpus position p is contained in the data kmers indexed
    [p - (k - t), p], clipped to the valid range; the count is the size of
    the union of those intervals.
    """

    def __init__(self, corpus: bytes, k: int, t: int):
        self.k = k
        self.t = t
        self.nk = len(corpus) - k + 1
        sub = gene.kmer_codes(corpus, t)
        self.order = np.argsort(sub, kind="stable")
        self.sorted_codes = sub[self.order]

    def count(self, query_kmer: bytes) -> int:
        qcodes = np.unique(gene.kmer_codes(query_kmer, self.t))
        lo = np.searchsorted(self.sorted_codes, qcodes, side="left")
        hi = np.searchsorted(self.sorted_codes, qcodes, side="right")
        pos_parts = [self.order[a:b] for a, b in zip(lo, hi) if b > a]
        if not pos_parts:
            return 0
        pos = np.concatenate(pos_parts)
        starts = np.maximum(pos - (self.k - self.t), 0)
        ends = np.minimum(pos, self.nk - 1)
        keep = starts <= ends
        if not keep.any():
            return 0
        intervals = sorted(zip(starts[keep].tolist(), ends[keep].tolist()))
        total = 0
        cur_start, cur_end = intervals[0]
        for s, e in intervals[1:]:
            if s > cur_end + 1:
                total += cur_end - cur_start + 1
                cur_start, cur_end = s, e
            else:
                cur_end = max(cur_end, e)
        total += cur_end - cur_start + 1
        return total


def expected_birthday_pairs(n: int, buckets: int) -> float:
    return n * (n - 1) / 2 / buckets


def colliding_pairs(values: np.ndarray) -> int:
    _, counts = np.unique(values, return_counts=True)
    return int((counts * (counts - 1) // 2).sum())
