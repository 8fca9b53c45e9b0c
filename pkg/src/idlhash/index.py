"""Multi-file membership indices built from per-scheme Bloom filters.

Two layouts:

* CobsIndex — one filter per file, queried independently; the answer is a
  per-file membership vector.
* RamboIndex — an R x B grid of merged filters; each file lands in one
  bucket per repetition, and a query's candidate set is the intersection
  across repetitions of the union of files in matching buckets. Candidates
  always cover the true positives.

Queries compute MinHash digests once per kmer and reuse them across every
filter in the index.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._backend import kernels
from .bloom import BloomFilter
from .gene import Sequence, _bases_of, parse_fastx
from .hash_core import HashScheme, IdlConfig, locations_from_minhashes, sequence_minhashes, rh64

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class MsmtResult:
    """Per-file outcome of one query against a multi-file index."""

    file_ids: list[str]
    memberships: list[bool]
    candidates: list[int]
    fractions: list[float] | None = None


def _load_file(source, k: int) -> tuple[str, list[Sequence]]:
    if isinstance(source, tuple):
        file_id, seqs = source
        return str(file_id), [s if isinstance(s, Sequence) else Sequence(_bases_of(s)) for s in seqs]
    path = Path(source)
    try:
        seqs = list(parse_fastx(path, min_run=k))
    except OSError as e:
        raise OSError(f"cannot read input file {path}: {e}") from e
    return path.name, seqs


def _insert_all(bf: BloomFilter, seqs) -> BloomFilter:
    for s in seqs:
        bf.insert_sequence(s)
    return bf


class _QueryPlan:
    """Shared per-query hashing: MinHash once, locations cached per range."""

    def __init__(self, bases: bytes, cfg: IdlConfig):
        self.bases = bases
        self.mh = None if cfg.scheme is HashScheme.RH else sequence_minhashes(bases, cfg)
        self._locs: dict[int, np.ndarray] = {}

    def locations(self, cfg: IdlConfig) -> np.ndarray:
        locs = self._locs.get(cfg.m)
        if locs is None:
            locs = locations_from_minhashes(self.bases, self.mh, cfg)
            self._locs[cfg.m] = locs
        return locs


def _filter_hits(bf: BloomFilter, locs: np.ndarray, early_exit: bool):
    """(is_member, hits or None): block-wise bit tests with optional exit."""
    if not early_exit:
        hits = kernels.bloom_get(bf.words, locs).all(axis=1)
        return bool(hits.all()), hits
    n = locs.shape[0]
    start = 0
    while start < n:
        stop = min(start + 512, n)
        if not kernels.bloom_get(bf.words, locs[start:stop]).all():
            return False, None
        start = stop
    return True, None


class CobsIndex:
    """Array of per-file Bloom filters sharing one hash configuration."""

    def __init__(self, filters: list[BloomFilter], file_ids: list[str], cfg: IdlConfig):
        if len(filters) != len(file_ids) or not filters:
            raise ValueError("need one filter per file id")
        for bf in filters:
            if replace(bf.cfg, m=cfg.m) != cfg:
                raise ValueError("all filters must share k, t, l, eta, seed and scheme")
        self.filters = filters
        self.file_ids = list(file_ids)
        self.cfg = cfg

    @classmethod
    def build(cls, files, cfg: IdlConfig, m_per_kmer: float | None = None, threads: int = 1) -> "CobsIndex":
        """One filter per file; optionally size each filter as m_i ~ kmer count."""
        loaded = [_load_file(f, cfg.k) for f in files]
        file_ids = [fid for fid, _ in loaded]
        cfgs = []
        for _, seqs in loaded:
            if m_per_kmer is None:
                cfgs.append(cfg)
            else:
                n_i = sum(len(s) - cfg.k + 1 for s in seqs)
                m_i = max(int(m_per_kmer * max(n_i, 1)), cfg.eta * (cfg.l + 1))
                m_i += (-m_i) % cfg.eta  # keep the partitioned layout
                cfgs.append(replace(cfg, m=m_i))
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                filters = list(
                    pool.map(lambda args: _insert_all(BloomFilter(args[0]), args[1][1]), zip(cfgs, loaded))
                )
        else:
            filters = [_insert_all(BloomFilter(c), seqs) for c, (_, seqs) in zip(cfgs, loaded)]
        for bf in filters:
            bf.freeze()
        return cls(filters, file_ids, cfg)

    def __len__(self) -> int:
        return len(self.filters)

    def query(self, query, early_exit: bool = True, fractions: bool = False) -> MsmtResult:
        """Independent membership test of the query against every filter.

        Match fractions (kmers passing / kmers total) force early exit off.
        """
        bases = _bases_of(query)
        plan = _QueryPlan(bases, self.cfg)
        memberships: list[bool] = []
        fracs: list[float] | None = [] if fractions else None
        for bf in self.filters:
            locs = plan.locations(bf.cfg)
            member, hits = _filter_hits(bf, locs, early_exit and not fractions)
            memberships.append(member)
            if fractions:
                fracs.append(float(hits.mean()))
        candidates = [i for i, m in enumerate(memberships) if m]
        return MsmtResult(self.file_ids, memberships, candidates, fracs)

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        names = []
        for i, bf in enumerate(self.filters):
            name = f"filter_{i:04d}.idlbf"
            bf.save(directory / name)
            names.append(name)
        _write_manifest(
            directory,
            {
                "type": "cobs",
                "cfg": self.cfg.to_dict(),
                "file_ids": self.file_ids,
                "B": None,
                "R": None,
                "assignment_seed": None,
                "filters": names,
            },
        )


def rambo_bucket(file_id: str, rep: int, assignment_seed: int, b: int) -> int:
    """Bucket of a file in one repetition, derived from the assignment seed."""
    rep_seed = rh64(rep.to_bytes(8, "little"), assignment_seed)
    return rh64(file_id.encode(), rep_seed) % b


class RamboIndex:
    """R repetitions of B merged Bloom filters with seeded file-to-bucket maps."""

    def __init__(
        self,
        grid: list[list[BloomFilter]],
        file_ids: list[str],
        cfg: IdlConfig,
        assignment_seed: int,
    ):
        self.grid = grid
        self.r = len(grid)
        self.b = len(grid[0]) if grid else 0
        if self.r < 1 or self.b < 1:
            raise ValueError("grid must be at least 1x1")
        self.file_ids = list(file_ids)
        self.cfg = cfg
        self.assignment_seed = assignment_seed
        self.assignment = np.array(
            [
                [rambo_bucket(fid, r, assignment_seed, self.b) for r in range(self.r)]
                for fid in self.file_ids
            ],
            dtype=np.int64,
        ).reshape(len(self.file_ids), self.r)

    @classmethod
    def build(cls, files, b: int, r: int, cfg: IdlConfig, assignment_seed: int = 0, threads: int = 1) -> "RamboIndex":
        """Insert every file into its assigned bucket of each repetition."""
        if b < 1 or r < 1:
            raise ValueError("B and R must be >= 1")
        loaded = [_load_file(f, cfg.k) for f in files]
        file_ids = [fid for fid, _ in loaded]
        grid = [[BloomFilter(cfg) for _ in range(b)] for _ in range(r)]
        cells: dict[tuple[int, int], list] = {}
        for fid, seqs in loaded:
            for rep in range(r):
                cells.setdefault((rep, rambo_bucket(fid, rep, assignment_seed, b)), []).extend(seqs)

        def _fill(cell):
            (rep, bucket), seqs = cell
            _insert_all(grid[rep][bucket], seqs)

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(_fill, cells.items()))
        else:
            for cell in cells.items():
                _fill(cell)
        for row in grid:
            for bf in row:
                bf.freeze()
        return cls(grid, file_ids, cfg, assignment_seed)

    def query(self, query) -> MsmtResult:
        """Candidate set: intersection over repetitions of matching buckets' files."""
        bases = _bases_of(query)
        plan = _QueryPlan(bases, self.cfg)
        candidate = np.ones(len(self.file_ids), dtype=bool)
        for rep in range(self.r):
            matched = np.zeros(self.b, dtype=bool)
            needed = set(self.assignment[candidate, rep].tolist()) if candidate.any() else set()
            for bucket in needed:
                bf = self.grid[rep][bucket]
                member, _ = _filter_hits(bf, plan.locations(bf.cfg), early_exit=True)
                matched[bucket] = member
            candidate &= matched[self.assignment[:, rep]]
        candidates = [i for i in range(len(self.file_ids)) if candidate[i]]
        return MsmtResult(self.file_ids, [bool(x) for x in candidate], candidates, None)

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        names = []
        for rep, row in enumerate(self.grid):
            for bucket, bf in enumerate(row):
                name = f"filter_r{rep:02d}_b{bucket:04d}.idlbf"
                bf.save(directory / name)
                names.append(name)
        _write_manifest(
            directory,
            {
                "type": "rambo",
                "cfg": self.cfg.to_dict(),
                "file_ids": self.file_ids,
                "B": self.b,
                "R": self.r,
                "assignment_seed": self.assignment_seed,
                "filters": names,
            },
        )


def _write_manifest(directory: Path, manifest: dict) -> None:
    tmp = directory / (MANIFEST_NAME + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    tmp.replace(directory / MANIFEST_NAME)


def save_bf_index(bf: BloomFilter, directory, file_ids) -> None:
    """Single-filter index directory (manifest type "bf")."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    name = "filter_0000.idlbf"
    bf.save(directory / name)
    _write_manifest(
        directory,
        {
            "type": "bf",
            "cfg": bf.cfg.to_dict(),
            "file_ids": list(file_ids),
            "B": None,
            "R": None,
            "assignment_seed": None,
            "filters": [name],
        },
    )


def load_index(directory):
    """Load a CobsIndex or RamboIndex from its manifest directory."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    if not manifest_path.exists():
        raise FileNotFoundError(f"no {MANIFEST_NAME} in {directory}")
    manifest = json.loads(manifest_path.read_text())
    cfg = IdlConfig.from_dict(manifest["cfg"])
    filters = [BloomFilter.from_bytes((directory / name).read_bytes()) for name in manifest["filters"]]
    for bf in filters:
        bf.freeze()
    if manifest["type"] == "bf":
        return filters[0]
    if manifest["type"] == "cobs":
        return CobsIndex(filters, manifest["file_ids"], cfg)
    if manifest["type"] == "rambo":
        b, r = int(manifest["B"]), int(manifest["R"])
        if len(filters) != b * r:
            raise ValueError("manifest filter count does not match B*R")
        grid = [filters[rep * b : (rep + 1) * b] for rep in range(r)]
        return RamboIndex(grid, manifest["file_ids"], cfg, int(manifest["assignment_seed"]))
    raise ValueError(f"unknown index type {manifest['type']!r}")
