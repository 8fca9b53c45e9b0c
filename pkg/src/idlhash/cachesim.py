"""Deterministic block-access tracing and a two-level inclusive LRU model.

Only filter bit-array reads are traced (hash computation and sequence
buffers are scheme-invariant); each bit read contributes its block id, in
access order, with early exit disabled so every scheme touches the same
number of bits per query. Both cache levels are fully associative with LRU
replacement, and the hierarchy is inclusive: evicting a block from level 2
invalidates it in level 1.
"""

from __future__ import annotations

import csv
import io
import json
from collections import OrderedDict
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bloom import BloomFilter
from .gene import _bases_of
from .hash_core import HashScheme, IdlConfig, sequence_locations

REF_FILTER_BITS = 2**30
REF_L1_BYTES = 2 * 2**20
REF_L2_BYTES = 256 * 2**20

CSV_COLUMNS = [
    "scheme",
    "m",
    "eta",
    "L",
    "t",
    "block_bytes",
    "l1_capacity",
    "l2_capacity",
    "accesses",
    "l1_misses",
    "l2_misses",
    "distinct_blocks",
]


@dataclass(frozen=True)
class AccessTrace:
    """Block ids touched by a query burst, in access order."""

    blocks: np.ndarray
    block_size_bits: int

    @property
    def accesses(self) -> int:
        return int(self.blocks.size)

    def distinct_blocks(self) -> int:
        return int(np.unique(self.blocks).size)


@dataclass(frozen=True)
class CacheModel:
    """Two fully-associative LRU levels; level 1 smaller than level 2."""

    l1_bytes: int
    l2_bytes: int
    block_bytes: int = 64

    def __post_init__(self):
        if self.block_bytes < 1:
            raise ValueError("block size must be >= 1 byte")
        if self.l1_bytes % self.block_bytes or self.l2_bytes % self.block_bytes:
            raise ValueError("block size must divide both level capacities")
        if self.l1_bytes < self.block_bytes:
            raise ValueError("level-1 capacity must hold at least one block")
        if not self.l1_bytes < self.l2_bytes:
            raise ValueError("level-1 capacity must be smaller than level 2")

    @property
    def block_bits(self) -> int:
        return self.block_bytes * 8

    @property
    def l1_blocks(self) -> int:
        return self.l1_bytes // self.block_bytes

    @property
    def l2_blocks(self) -> int:
        return self.l2_bytes // self.block_bytes


@dataclass(frozen=True)
class CacheReport:
    accesses: int
    l1_misses: int
    l2_misses: int
    distinct_blocks: int

    @property
    def l1_miss_rate(self) -> float:
        return self.l1_misses / self.accesses if self.accesses else 0.0

    @property
    def l2_miss_rate(self) -> float:
        return self.l2_misses / self.accesses if self.accesses else 0.0


def scaled_model(m_bits: int, block_bytes: int = 64) -> CacheModel:
    """Reference 2MB/256MB levels, scaled down with the filter size.

    Filters below the reference 2^30 bits shrink both levels proportionally
    so the filter:cache ratio stays in the reference regime; larger filters
    use the reference capacities unchanged.
    """
    scale = min(1.0, m_bits / REF_FILTER_BITS)
    l1 = max(block_bytes, int(REF_L1_BYTES * scale) // block_bytes * block_bytes)
    l2 = max(2 * block_bytes, int(REF_L2_BYTES * scale) // block_bytes * block_bytes)
    if l2 <= l1:
        l2 = l1 + block_bytes
    return CacheModel(l1_bytes=l1, l2_bytes=l2, block_bytes=block_bytes)


def trace_queries(bf: BloomFilter, queries, block_size_bits: int = 512) -> AccessTrace:
    """Record the block id of every bit read by the query burst, in order.

    Requires a frozen filter; the trace has exactly eta accesses per kmer
    (early exit is disabled for tracing).
    """
    if not bf.frozen:
        raise RuntimeError("filter must be frozen before tracing")
    if block_size_bits < 1:
        raise ValueError("block size must be >= 1 bit")
    parts = []
    for q in queries:
        locs = sequence_locations(_bases_of(q), bf.cfg)
        parts.append(locs.ravel() // np.uint64(block_size_bits))
    blocks = np.concatenate(parts) if parts else np.empty(0, dtype=np.uint64)
    return AccessTrace(blocks=blocks, block_size_bits=block_size_bits)


def distinct_blocks_per_burst(bf: BloomFilter, queries, block_size_bits: int = 512) -> list[int]:
    """Distinct block count of each query's trace, one value per query."""
    return [trace_queries(bf, [q], block_size_bits).distinct_blocks() for q in queries]


def simulate(trace: AccessTrace, model: CacheModel) -> CacheReport:
    """Run the trace through the two-level inclusive LRU model."""
    if trace.block_size_bits != model.block_bits:
        raise ValueError(
            f"trace block size {trace.block_size_bits} bits != model block size {model.block_bits} bits"
        )
    cap1 = model.l1_blocks
    cap2 = model.l2_blocks
    l1: OrderedDict[int, None] = OrderedDict()
    l2: OrderedDict[int, None] = OrderedDict()
    l1_misses = 0
    l2_misses = 0
    for b in trace.blocks.tolist():
        if b in l1:
            l1.move_to_end(b)
            continue
        l1_misses += 1
        if b in l2:
            l2.move_to_end(b)
        else:
            l2_misses += 1
            l2[b] = None
            if len(l2) > cap2:
                evicted, _ = l2.popitem(last=False)
                l1.pop(evicted, None)  # inclusive hierarchy: back-invalidate
        l1[b] = None
        if len(l1) > cap1:
            l1.popitem(last=False)
    return CacheReport(
        accesses=trace.accesses,
        l1_misses=l1_misses,
        l2_misses=l2_misses,
        distinct_blocks=trace.distinct_blocks(),
    )


@dataclass(frozen=True)
class SchemeCacheRow:
    """One CSV row of the scheme comparison."""

    scheme: str
    m: int
    eta: int
    l: int
    t: int
    block_bytes: int
    l1_capacity: int
    l2_capacity: int
    accesses: int
    l1_misses: int
    l2_misses: int
    distinct_blocks: int

    @property
    def l1_miss_rate(self) -> float:
        return self.l1_misses / self.accesses if self.accesses else 0.0

    @property
    def l2_miss_rate(self) -> float:
        return self.l2_misses / self.accesses if self.accesses else 0.0

    def as_csv_row(self) -> list:
        return [
            self.scheme,
            self.m,
            self.eta,
            self.l,
            self.t,
            self.block_bytes,
            self.l1_capacity,
            self.l2_capacity,
            self.accesses,
            self.l1_misses,
            self.l2_misses,
            self.distinct_blocks,
        ]


def compare_schemes(
    corpus,
    queries,
    base_cfg: IdlConfig,
    schemes=(HashScheme.MINHASH_ONLY, HashScheme.IDL, HashScheme.RH),
    model: CacheModel | None = None,
) -> list[SchemeCacheRow]:
    """Build one filter per scheme over the same corpus and compare traces.

    Everything except the scheme (corpus, queries, m, eta, seeds, model) is
    held fixed so the miss rates isolate the addressing scheme.
    """
    corpus = list(corpus)
    queries = list(queries)
    if model is None:
        model = scaled_model(base_cfg.m)
    rows = []
    for scheme in schemes:
        cfg = replace(base_cfg, scheme=scheme)
        bf = BloomFilter(cfg)
        for seq in corpus:
            bf.insert_sequence(seq)
        bf.freeze()
        trace = trace_queries(bf, queries, block_size_bits=model.block_bits)
        report = simulate(trace, model)
        rows.append(
            SchemeCacheRow(
                scheme=scheme.value,
                m=cfg.m,
                eta=cfg.eta,
                l=cfg.l,
                t=cfg.t,
                block_bytes=model.block_bytes,
                l1_capacity=model.l1_bytes,
                l2_capacity=model.l2_bytes,
                accesses=report.accesses,
                l1_misses=report.l1_misses,
                l2_misses=report.l2_misses,
                distinct_blocks=report.distinct_blocks,
            )
        )
    return rows


def rows_to_csv(rows: list[SchemeCacheRow], config: dict | None = None) -> str:
    """CSV text with the fixed column set and an optional config-echo comment."""
    buf = io.StringIO()
    if config is not None:
        buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv_row())
    return buf.getvalue()


def write_csv(rows: list[SchemeCacheRow], path, config: dict | None = None) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(rows_to_csv(rows, config))
    tmp.replace(path)
