"""Partitioned Bloom filter over kmer locations, with on-disk serialization.

The m bits are split into eta disjoint partitions, one per hash repetition,
for every scheme (so false-positive comparisons across schemes are
apples-to-apples). Sequence insertion and queries run through the rolling
MinHash pipeline; queries exit at the first failing kmer unless asked not to.
"""

from __future__ import annotations

import math
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._backend import kernels
from .gene import ExactKmerIndex, Sequence, _bases_of
from .hash_core import HashScheme, IdlConfig, kmer_locations, sequence_locations

MAGIC = b"IDLBF1\x00\x00"
FORMAT_VERSION = 1
_SCHEME_CODE = {HashScheme.RH: 0, HashScheme.IDL: 1, HashScheme.MINHASH_ONLY: 2}
_CODE_SCHEME = {v: k for k, v in _SCHEME_CODE.items()}
# format_version, scheme, k, t, log2_l, eta, m, n, base_seed (all little-endian)
_HEADER = struct.Struct("<HBHHBHQQQ")


@dataclass(frozen=True)
class MembershipResult:
    """Outcome of testing one query sequence against one filter."""

    is_member: bool
    kmers_tested: int
    first_failing_kmer_index: int | None


@dataclass(frozen=True)
class FprTheory:
    exact: float
    approx: float


@dataclass(frozen=True)
class FprEstimate:
    """Empirical false-positive rates measured on verified negatives."""

    sequence_fpr: float
    kmer_fpr: float
    queries: int
    sequence_hits: int
    negative_kmers: int
    negative_kmer_hits: int


class SerializationError(ValueError):
    pass


class BloomFilter:
    """Bit array of cfg.m bits addressed by cfg.scheme; no false negatives."""

    def __init__(self, cfg: IdlConfig):
        self.cfg = cfg
        self.words = np.zeros((cfg.m + 63) // 64, dtype=np.uint64)
        self.n_inserted = 0
        self.frozen = False

    @property
    def m(self) -> int:
        return self.cfg.m

    def popcount(self) -> int:
        return int(np.bitwise_count(self.words).sum())

    def freeze(self) -> "BloomFilter":
        """Explicit build -> query phase transition; inserts now error."""
        self.frozen = True
        return self

    def insert_sequence(self, seq) -> "BloomFilter":
        """Set all eta locations of every kmer; n grows by the kmer count."""
        if self.frozen:
            raise RuntimeError("filter is frozen")
        bases = _bases_of(seq)
        locs = sequence_locations(bases, self.cfg)
        kernels.bloom_set(self.words, locs.ravel())
        self.n_inserted += locs.shape[0]
        return self

    def contains_kmer(self, kmer) -> bool:
        """AND of the eta addressed bits for one kmer."""
        bases = _bases_of(kmer)
        if len(bases) != self.cfg.k:
            raise ValueError(f"wrong length: kmer must be exactly k={self.cfg.k} bases")
        locs = np.asarray(kmer_locations(bases, self.cfg), dtype=np.uint64)
        return bool(kernels.bloom_get(self.words, locs).all())

    def kmer_hits(self, query) -> np.ndarray:
        """Per-kmer pass/fail over a whole query, no early exit; bool[n_kmers]."""
        locs = sequence_locations(_bases_of(query), self.cfg)
        bits = kernels.bloom_get(self.words, locs)
        return bits.all(axis=1)

    def query_sequence(self, query, early_exit: bool = True) -> MembershipResult:
        """Membership of a query: true iff every kmer passes.

        Stops at the first failing kmer when early_exit is set (work is saved
        at block granularity internally; the reported counts always follow
        exact per-kmer early-exit semantics). Disabling early exit keeps the
        per-query work constant, for timing runs.
        """
        bases = _bases_of(query)
        k = self.cfg.k
        if len(bases) < k:
            raise ValueError("sequence shorter than k")
        nk = len(bases) - k + 1
        if not early_exit:
            hits = self.kmer_hits(bases)
            if hits.all():
                return MembershipResult(True, nk, None)
            ff = int(np.argmin(hits))
            return MembershipResult(False, nk, ff)
        block = 512
        start = 0
        while start < nk:
            stop = min(start + block, nk)
            hits = self.kmer_hits(bases[start : stop + k - 1])
            if not hits.all():
                ff = start + int(np.argmin(hits))
                return MembershipResult(False, ff + 1, ff)
            start = stop
        return MembershipResult(True, nk, None)

    # --- serialization ---

    def to_bytes(self) -> bytes:
        header = MAGIC + _HEADER.pack(
            FORMAT_VERSION,
            _SCHEME_CODE[self.cfg.scheme],
            self.cfg.k,
            self.cfg.t,
            self.cfg.log2_l,
            self.cfg.eta,
            self.cfg.m,
            self.n_inserted,
            self.cfg.base_seed,
        )
        header += struct.pack("<I", zlib.crc32(header))
        nbytes = (self.cfg.m + 7) // 8
        bits = self.words.astype("<u8", copy=False).tobytes()[:nbytes]
        return header + bits + struct.pack("<I", zlib.crc32(bits))

    @classmethod
    def from_bytes(cls, blob: bytes) -> "BloomFilter":
        hdr_len = len(MAGIC) + _HEADER.size + 4
        if len(blob) < hdr_len:
            raise SerializationError("truncated file: header incomplete")
        if blob[:8] != MAGIC:
            raise SerializationError("bad magic")
        (stored_crc,) = struct.unpack_from("<I", blob, hdr_len - 4)
        if zlib.crc32(blob[: hdr_len - 4]) != stored_crc:
            raise SerializationError("header checksum failure")
        version, scheme, k, t, log2_l, eta, m, n, base_seed = _HEADER.unpack_from(blob, 8)
        if version != FORMAT_VERSION:
            raise SerializationError(f"unsupported format version {version}")
        if scheme not in _CODE_SCHEME:
            raise SerializationError(f"unknown scheme code {scheme}")
        cfg = IdlConfig(
            k=k, t=t, l=1 << log2_l, m=m, eta=eta, base_seed=base_seed, scheme=_CODE_SCHEME[scheme]
        )
        nbytes = (m + 7) // 8
        if len(blob) != hdr_len + nbytes + 4:
            raise SerializationError("truncated file: bit array incomplete")
        bits = blob[hdr_len : hdr_len + nbytes]
        (bits_crc,) = struct.unpack_from("<I", blob, hdr_len + nbytes)
        if zlib.crc32(bits) != bits_crc:
            raise SerializationError("bit array checksum failure")
        bf = cls(cfg)
        padded = bits + b"\x00" * (bf.words.size * 8 - nbytes)
        bf.words = np.frombuffer(padded, dtype="<u8").astype(np.uint64)
        bf.n_inserted = n
        return bf

    def save(self, path) -> None:
        """Byte-exact round trip; atomic via temp file + rename."""
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_bytes(self.to_bytes())
        tmp.replace(path)


def bf_new(cfg: IdlConfig) -> BloomFilter:
    """Fresh all-zero filter for a validated configuration."""
    return BloomFilter(cfg)


def load(path) -> BloomFilter:
    return BloomFilter.from_bytes(Path(path).read_bytes())


def save(bf: BloomFilter, path) -> None:
    bf.save(path)


def optimal_eta(m: int, n: int) -> int:
    """Repetition count minimizing the false-positive rate: round(ln2 * m/n)."""
    if m < 1 or n < 1:
        raise ValueError("m and n must be >= 1")
    return max(1, round(math.log(2) * m / n))


def theoretical_fpr(m: int, n: int, eta: int) -> FprTheory:
    """False-positive rate after n uniform insertions; exact and e^-x forms."""
    if m < 1 or eta < 1 or n < 0:
        raise ValueError("m, eta must be >= 1 and n >= 0")
    if n == 0:
        return FprTheory(0.0, 0.0)
    exact = (1.0 - math.exp(eta * n * math.log1p(-1.0 / m))) ** eta
    approx = (1.0 - math.exp(-eta * n / m)) ** eta
    return FprTheory(exact, approx)


def empirical_fpr(bf: BloomFilter, negative_queries, oracle: ExactKmerIndex) -> FprEstimate:
    """Measure sequence-level and per-kmer false-positive rates.

    Every query must be a true negative (not a kmer-subset of the indexed
    data) according to the exact oracle; per-kmer counting skips kmers the
    oracle knows to be genuinely present.
    """
    queries = [negative_queries] if isinstance(negative_queries, (bytes, Sequence)) else list(negative_queries)
    if not queries:
        raise ValueError("no negative queries")
    seq_hits = 0
    neg_kmers = 0
    neg_hits = 0
    for q in queries:
        bases = _bases_of(q)
        present = oracle.contains_each(bases)
        if present.all():
            raise ValueError("true-positive query in negative set (bad test data)")
        hits = bf.kmer_hits(bases)
        if hits.all():
            seq_hits += 1
        negatives = ~present
        neg_kmers += int(negatives.sum())
        neg_hits += int((hits & negatives).sum())
    return FprEstimate(
        sequence_fpr=seq_hits / len(queries),
        kmer_fpr=neg_hits / neg_kmers if neg_kmers else 0.0,
        queries=len(queries),
        sequence_hits=seq_hits,
        negative_kmers=neg_kmers,
        negative_kmer_hits=neg_hits,
    )
