"""Sequence ingestion and tokenization for k-mer membership testing.

Reads come from FASTQ or FASTA (optionally gzipped); bases are uppercased and
split at non-ACGT characters into maximal clean runs, so every downstream
token is over {A, C, G, T}. Poisoned queries flip exactly one base of a
sampled subsequence to a different canonical base, producing hard negatives
that still parse as valid sequence.
"""

from __future__ import annotations

import gzip
import json
import random
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

ALPHABET = b"ACGT"

_BASE_CODE = np.full(256, 255, dtype=np.uint8)
for _i, _b in enumerate(ALPHABET):
    _BASE_CODE[_b] = _i
_CODE_BASE = np.frombuffer(ALPHABET, dtype=np.uint8)


@dataclass(frozen=True)
class Sequence:
    """A clean ACGT byte string plus the identifier of its source read."""

    bases: bytes
    source_id: str = ""

    def __len__(self) -> int:
        return len(self.bases)


class QueryLabel(Enum):
    POSITIVE_SOURCE = "positive_source"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class QueryRecord:
    """A sampled query window and its single-base-mutated twin."""

    original: Sequence
    poisoned: Sequence
    poison_position: int
    label: QueryLabel


class FastxParseError(ValueError):
    pass


def _bases_of(seq) -> bytes:
    return seq.bases if isinstance(seq, Sequence) else bytes(seq)


def kmers(seq, k: int) -> list[bytes]:
    """All stride-1 windows of length k, in sequence order."""
    bases = _bases_of(seq)
    if len(bases) < k:
        raise ValueError("sequence shorter than k")
    return [bases[i : i + k] for i in range(len(bases) - k + 1)]


def subkmers(kmer, t: int) -> set[bytes]:
    """The set (duplicates removed) of all stride-1 windows of length t."""
    bases = _bases_of(kmer)
    if t > len(bases):
        raise ValueError("t larger than kmer")
    return {bases[i : i + t] for i in range(len(bases) - t + 1)}


def jaccard(x, y, t: int) -> float:
    """Exact Jaccard similarity of the two kmers' sub-kmer sets."""
    sx = subkmers(x, t)
    sy = subkmers(y, t)
    inter = len(sx & sy)
    if inter == 0:
        return 0.0
    return inter / len(sx | sy)


def sanitize_runs(raw: bytes, min_run: int = 1) -> list[bytes]:
    """Uppercase, then split at non-ACGT bytes; keep runs of at least min_run."""
    up = raw.upper()
    runs: list[bytes] = []
    start = None
    for i, b in enumerate(up):
        if b in ALPHABET:
            if start is None:
                start = i
        elif start is not None:
            if i - start >= min_run:
                runs.append(up[start:i])
            start = None
    if start is not None and len(up) - start >= min_run:
        runs.append(up[start:])
    return runs


def _open_maybe_gzip(path):
    f = open(path, "rb")
    magic = f.read(2)
    f.seek(0)
    if magic == b"\x1f\x8b":
        return gzip.open(f, "rb")
    return f


def parse_fastx(path, min_run: int = 1):
    """Yield one Sequence per clean run of each read; format auto-detected.

    FASTQ records are strict 4-line groups; FASTA allows wrapped lines.
    Reads that split into several runs get ":<run>" appended to their id.
    """
    with _open_maybe_gzip(path) as f:
        first = f.peek(1)[:1] if hasattr(f, "peek") else b""
        if not first:
            probe = f.read(1)
            if not probe:
                return
            f.seek(0)
            first = probe
        if first == b"@":
            yield from _parse_fastq(f, min_run)
        elif first == b">":
            yield from _parse_fasta(f, min_run)
        else:
            raise FastxParseError(f"{path}: unrecognized leading byte {first!r}")


def _emit(raw: bytes, rid: str, min_run: int):
    runs = sanitize_runs(raw, min_run)
    if len(runs) == 1:
        yield Sequence(runs[0], rid)
    else:
        for i, run in enumerate(runs):
            yield Sequence(run, f"{rid}:{i}")


def _parse_fastq(f, min_run: int):
    rec = 0
    while True:
        header = f.readline()
        if not header:
            return
        header = header.rstrip(b"\r\n")
        if not header.startswith(b"@"):
            raise FastxParseError(f"record {rec}: header does not start with '@'")
        bases = f.readline().rstrip(b"\r\n")
        plus = f.readline()
        qual = f.readline()
        if not qual:
            raise FastxParseError(f"record {rec}: truncated record")
        if not plus.startswith(b"+"):
            raise FastxParseError(f"record {rec}: missing '+' separator")
        if len(qual.rstrip(b"\r\n")) != len(bases):
            raise FastxParseError(f"record {rec}: quality length mismatch")
        rid = header[1:].split()[0].decode("ascii", "replace") if len(header) > 1 else f"read{rec}"
        yield from _emit(bases, rid, min_run)
        rec += 1


def _parse_fasta(f, min_run: int):
    rid = None
    chunks: list[bytes] = []
    rec = 0
    for line in f:
        line = line.rstrip(b"\r\n")
        if line.startswith(b">"):
            if rid is not None:
                yield from _emit(b"".join(chunks), rid, min_run)
                rec += 1
            rid = line[1:].split()[0].decode("ascii", "replace") if len(line) > 1 else f"seq{rec}"
            chunks = []
        elif rid is None:
            raise FastxParseError("record 0: sequence data before any '>' header")
        else:
            chunks.append(line)
    if rid is not None:
        yield from _emit(b"".join(chunks), rid, min_run)


def write_fastq(path, seqs) -> None:
    """Test-fixture / demo writer; constant quality, gzip by .gz suffix."""
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as f:
        for i, s in enumerate(seqs):
            bases = _bases_of(s)
            rid = s.source_id if isinstance(s, Sequence) and s.source_id else f"read{i}"
            f.write(b"@" + rid.encode() + b"\n" + bases + b"\n+\n" + b"I" * len(bases) + b"\n")


def write_fasta(path, seqs) -> None:
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as f:
        for i, s in enumerate(seqs):
            bases = _bases_of(s)
            rid = s.source_id if isinstance(s, Sequence) and s.source_id else f"seq{i}"
            f.write(b">" + rid.encode() + b"\n" + bases + b"\n")


def random_genome(length: int, rng_seed: int) -> bytes:
    """Uniform random ACGT string (synthetic desk-scale corpus)."""
    rng = np.random.default_rng(rng_seed)
    return _CODE_BASE[rng.integers(0, 4, size=length)].tobytes()


def sample_reads(genome: bytes, count: int, length: int, rng_seed: int) -> list[Sequence]:
    """Random substrings of a genome, as reads with sequential ids."""
    if len(genome) < length:
        raise ValueError("genome shorter than read length")
    rng = random.Random(rng_seed)
    out = []
    for i in range(count):
        start = rng.randrange(len(genome) - length + 1)
        out.append(Sequence(genome[start : start + length], f"read{i}"))
    return out


def _load_reads(source, min_len: int) -> list[Sequence]:
    if isinstance(source, (str, Path)):
        return [s for s in parse_fastx(source, min_run=min_len)]
    return [s for s in source if len(s) >= min_len]


def gen_poisoned_queries(source, count: int, min_len: int = 128, rng_seed: int = 0) -> list[QueryRecord]:
    """Sample subsequences and flip one uniformly chosen base in each.

    The replacement base is drawn from the other three canonical bases, so
    poisoned queries stay inside the indexable alphabet. Deterministic for a
    fixed rng_seed.
    """
    reads = _load_reads(source, min_len)
    if not reads:
        raise ValueError(f"no reads of length >= {min_len}")
    rng = random.Random(rng_seed)
    records = []
    for _ in range(count):
        read = reads[rng.randrange(len(reads))]
        start = rng.randrange(len(read) - min_len + 1)
        window = read.bases[start : start + min_len]
        pos = rng.randrange(min_len)
        old = window[pos]
        alternatives = [b for b in ALPHABET if b != old]
        new = alternatives[rng.randrange(3)]
        poisoned = window[:pos] + bytes([new]) + window[pos + 1 :]
        original = Sequence(window, read.source_id)
        records.append(
            QueryRecord(
                original=original,
                poisoned=Sequence(poisoned, read.source_id),
                poison_position=pos,
                label=QueryLabel.NEGATIVE,
            )
        )
    return records


def save_queries(records, path) -> None:
    """One poisoned sequence per line, plus a JSON-lines sidecar of metadata."""
    path = Path(path)
    with open(path, "wb") as f:
        for r in records:
            f.write(r.poisoned.bases + b"\n")
    with open(path.with_name(path.name + ".meta.jsonl"), "w") as f:
        for r in records:
            f.write(
                json.dumps(
                    {
                        "source_id": r.original.source_id,
                        "poison_position": r.poison_position,
                        "label": r.label.value,
                    }
                )
                + "\n"
            )


def load_queries(path) -> list[bytes]:
    """Query sequences from a plain-text file, one per line."""
    with open(path, "rb") as f:
        return [line.strip() for line in f if line.strip()]


def assumption1_estimate(seq, k: int, t: int, samples: int, rng_seed: int) -> float:
    """Monte Carlo Pr(Jaccard = 0) over kmer pairs at offset distance >= k."""
    bases = _bases_of(seq)
    if len(bases) < 2 * k:
        raise ValueError("sequence shorter than 2k")
    nk = len(bases) - k + 1
    rng = random.Random(rng_seed)
    zero = 0
    for _ in range(samples):
        i = rng.randrange(nk)
        j = rng.randrange(nk)
        while abs(i - j) < k:
            j = rng.randrange(nk)
        if jaccard(bases[i : i + k], bases[j : j + k], t) == 0.0:
            zero += 1
    return zero / samples


def kmer_codes(data, k: int) -> np.ndarray:
    """Exact 2-bit integer encoding of every kmer (k <= 32); uint64[n_kmers]."""
    if k > 32:
        raise ValueError("2-bit codes support k <= 32 only")
    if k < 1:
        raise ValueError("k must be >= 1")
    a = np.frombuffer(_bases_of(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    codes = _BASE_CODE[a]
    if (codes == 255).any():
        raise ValueError("non-ACGT base in sequence")
    if a.size < k:
        return np.empty(0, dtype=np.uint64)
    nk = a.size - k + 1
    out = np.zeros(nk, dtype=np.uint64)
    for j in range(k):
        out <<= np.uint64(2)
        out |= codes[j : j + nk].astype(np.uint64)
    return out


class ExactKmerIndex:
    """Sorted exact kmer-code set; the ground-truth membership oracle."""

    def __init__(self, sequences, k: int):
        if isinstance(sequences, (bytes, bytearray, Sequence)):
            sequences = [sequences]
        parts = [kmer_codes(s, k) for s in sequences]
        self.k = k
        self.codes = np.unique(np.concatenate(parts)) if parts else np.empty(0, dtype=np.uint64)

    def __len__(self) -> int:
        return int(self.codes.size)

    def contains_codes(self, codes: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.codes, codes)
        idx = np.minimum(idx, max(len(self.codes) - 1, 0))
        if len(self.codes) == 0:
            return np.zeros(codes.shape, dtype=bool)
        return self.codes[idx] == codes

    def contains_each(self, query) -> np.ndarray:
        """Per-kmer membership of a query sequence, exact."""
        return self.contains_codes(kmer_codes(query, self.k))

    def is_subset(self, query) -> bool:
        """True iff every kmer of the query is present (exact MT semantics)."""
        return bool(self.contains_each(query).all())
