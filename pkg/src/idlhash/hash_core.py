"""Hash schemes for k-mer addressing in a partitioned bit array.

Three schemes share one configuration:

* ``RH`` — one independent uniform digest per repetition, reduced into that
  repetition's partition. Baseline with no locality.
* ``IDL`` — per repetition, the k-mer's sub-kmer MinHash digest is rehashed
  to a coarse placement and a small local offset in ``[0, L)`` derived from
  the whole k-mer is added. K-mers sharing a MinHash value land within
  ``L - 1`` positions of each other without (usually) colliding.
* ``MINHASH_ONLY`` — the MinHash digest alone addresses the partition, so
  similar k-mers collide outright.

MinHash digests come from one digest per sub-kmer plus wrapped
one-permutation shifts, so all ``eta`` repetitions cost a single hash per
new sub-kmer. Across a sequence the per-repetition window minima are
maintained by a segment tree (compiled backend) or vectorized window
minima (numpy backend); both equal a from-scratch minimum per window.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

from ._backend import kernels

_MASK64 = 0xFFFFFFFFFFFFFFFF
_U64MAX = _MASK64


class HashScheme(Enum):
    RH = "rh"
    IDL = "idl"
    MINHASH_ONLY = "minhash_only"


# seed-derivation roles; every derived seed is reproducible from base_seed
_ROLE_SUBKMER = 1
_ROLE_KMER = 2
_ROLE_PLACE = 3
_ROLE_RH = 4
_ROLE_SLICE = 5

_hash_calls = 0


def _count(n: int) -> None:
    global _hash_calls
    _hash_calls += n


def hash_call_count() -> int:
    """Total digests computed since the last reset (test instrumentation)."""
    return _hash_calls


def reset_hash_call_count() -> None:
    global _hash_calls
    _hash_calls = 0


def rh64(data: bytes, seed: int) -> int:
    """Deterministic uniform 64-bit digest of a byte string under a seed."""
    if len(data) == 0:
        raise ValueError("empty key")
    _count(1)
    return kernels.hash_bytes(data, seed & _MASK64)


def derive_seed(base_seed: int, role: int, rep: int = 0) -> int:
    """Mix a role tag and repetition index into a base seed."""
    return kernels.hash_bytes(struct.pack("<QQ", role, rep), base_seed & _MASK64)


@dataclass(frozen=True)
class IdlConfig:
    """All hash-scheme parameters; the unit of index compatibility.

    k: kmer length (bases); t: sub-kmer length; l: locality range in bit
    positions (power of two); m: total filter range in bits; eta: number of
    independent hash repetitions; base_seed: 64-bit seed from which every
    internal seed is derived; scheme: addressing scheme.
    """

    k: int
    t: int
    l: int
    m: int
    eta: int
    base_seed: int
    scheme: HashScheme

    def __post_init__(self):
        if isinstance(self.scheme, str):
            object.__setattr__(self, "scheme", HashScheme(self.scheme))
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if not 1 <= self.t <= self.k:
            raise ValueError("t must satisfy 1 <= t <= k")
        if self.eta < 1:
            raise ValueError("eta must be >= 1")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.m % self.eta != 0:
            raise ValueError("m must be divisible by eta (partitioned layout)")
        if self.l < 1 or self.l & (self.l - 1):
            raise ValueError("l must be a power of two")
        if self.l >= self.m // self.eta:
            raise ValueError("l must be smaller than the partition size m/eta")
        if not 0 <= self.base_seed <= _MASK64:
            raise ValueError("base_seed must fit in 64 bits")

    @property
    def m_part(self) -> int:
        return self.m // self.eta

    @property
    def log2_l(self) -> int:
        return self.l.bit_length() - 1

    @property
    def window(self) -> int:
        """Sub-kmers per kmer = k - t + 1."""
        return self.k - self.t + 1

    @property
    def sliced_local_hash(self) -> bool:
        """Whether all eta local offsets fit as bit slices of one digest."""
        return self.eta * self.log2_l <= 64

    @cached_property
    def seed_subkmer(self) -> int:
        return derive_seed(self.base_seed, _ROLE_SUBKMER)

    @cached_property
    def seed_kmer(self) -> int:
        return derive_seed(self.base_seed, _ROLE_KMER)

    @cached_property
    def seeds_place(self) -> tuple[int, ...]:
        return tuple(derive_seed(self.base_seed, _ROLE_PLACE, j) for j in range(self.eta))

    @cached_property
    def seeds_rh(self) -> tuple[int, ...]:
        return tuple(derive_seed(self.base_seed, _ROLE_RH, j) for j in range(self.eta))

    @cached_property
    def seeds_slice(self) -> tuple[int, ...]:
        return tuple(derive_seed(self.base_seed, _ROLE_SLICE, j) for j in range(self.eta))

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "t": self.t,
            "l": self.l,
            "m": self.m,
            "eta": self.eta,
            "base_seed": self.base_seed,
            "scheme": self.scheme.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "IdlConfig":
        return cls(
            k=int(d["k"]),
            t=int(d["t"]),
            l=int(d["l"]),
            m=int(d["m"]),
            eta=int(d["eta"]),
            base_seed=int(d["base_seed"]),
            scheme=HashScheme(d["scheme"]),
        )


def minhash(elements, seed: int) -> int:
    """Minimum digest over a set of byte strings; order-insensitive."""
    best = None
    for e in elements:
        d = rh64(e, seed)
        if best is None or d < best:
            best = d
    if best is None:
        raise ValueError("empty set")
    return best


def one_perm_shift(eta: int) -> int:
    """Wrapped digest shift between repetitions: floor(2**64 / eta) mod 2**64."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    return (2**64 // eta) & _MASK64


def one_perm_minhashes(base_digests, eta: int) -> list[int]:
    """All eta MinHash repetitions from one digest per element.

    Repetition i is the minimum of (digest - i*shift) mod 2**64 over the
    elements, so a single digest per element feeds every repetition.
    """
    digests = list(base_digests)
    if not digests:
        raise ValueError("empty input")
    if eta < 1:
        raise ValueError("eta must be >= 1")
    shift = one_perm_shift(eta)
    return [min((d - i * shift) & _MASK64 for d in digests) for i in range(eta)]


def _next_pow2(x: int) -> int:
    p = 1
    while p < x:
        p *= 2
    return p


class RollingMinState:
    """Complete binary min-tree over the current window of sub-kmer digests.

    Leaves beyond the window hold 2**64 - 1 sentinels; the root is always the
    window minimum. Each slide replaces the oldest leaf (cyclic cursor) and
    updates the leaf's ancestors only.
    """

    __slots__ = ("tree", "window", "index_to_pop", "_cap")

    def __init__(self, digests):
        digests = list(digests)
        if not digests:
            raise ValueError("empty digest window")
        self.window = len(digests)
        self._cap = _next_pow2(self.window)
        self.tree = [_U64MAX] * (2 * self._cap - 1)
        base = self._cap - 1
        for i, d in enumerate(digests):
            self.tree[base + i] = d & _MASK64
        for node in range(base - 1, -1, -1):
            self.tree[node] = min(self.tree[2 * node + 1], self.tree[2 * node + 2])
        self.index_to_pop = 0

    @property
    def root(self) -> int:
        return self.tree[0]

    def push(self, incoming: int) -> int:
        """Replace the oldest leaf with `incoming`; return the new window min."""
        node = self._cap - 1 + self.index_to_pop
        self.tree[node] = incoming & _MASK64
        while node > 0:
            node = (node - 1) // 2
            self.tree[node] = min(self.tree[2 * node + 1], self.tree[2 * node + 2])
        self.index_to_pop = (self.index_to_pop + 1) % self.window
        return self.tree[0]


def rolling_init(first_kmer_subkmer_digests) -> RollingMinState:
    """Build the rolling window state from the first kmer's sub-kmer digests."""
    return RollingMinState(first_kmer_subkmer_digests)


def rolling_next(state: RollingMinState, incoming_digest: int) -> int:
    """Slide the window by one sub-kmer and return the new minimum."""
    return state.push(incoming_digest)


def _as_u8(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        return np.ascontiguousarray(data, dtype=np.uint8)
    return np.frombuffer(bytes(data) if isinstance(data, memoryview) else data, dtype=np.uint8)


def _hash_windows(data, width: int, seed: int) -> np.ndarray:
    out = kernels.hash_windows(data, width, seed)
    _count(out.size)
    return out


def _hash_u64_many(vals: np.ndarray, seed: int) -> np.ndarray:
    out = kernels.hash_u64_many(vals, seed)
    _count(out.size)
    return out


def hash_many_seeds(key: bytes, seeds: np.ndarray) -> np.ndarray:
    """Digest of one key under an array of seeds (Monte Carlo helper)."""
    if len(key) == 0:
        raise ValueError("empty key")
    out = kernels.hash_many_seeds(key, np.ascontiguousarray(seeds, dtype=np.uint64))
    _count(out.size)
    return out


def sequence_minhashes(data, cfg: IdlConfig) -> np.ndarray:
    """Per-kmer, per-repetition MinHash digests for a whole sequence.

    Returns uint64[n_kmers, eta]; row i equals one_perm_minhashes over the
    sub-kmer digests of kmer i.
    """
    a = _as_u8(data)
    if a.size < cfg.k:
        raise ValueError("sequence shorter than k")
    sub = _hash_windows(a, cfg.t, cfg.seed_subkmer)
    return kernels.rolling_min(sub, cfg.window, cfg.eta)


def _locations_for_windows(a: np.ndarray, mh: np.ndarray | None, cfg: IdlConfig) -> np.ndarray:
    """Compose bit locations for every k-window of `a` under cfg.scheme."""
    nk = a.size - cfg.k + 1
    m_part = np.uint64(cfg.m_part)
    out = np.empty((nk, cfg.eta), dtype=np.uint64)
    with np.errstate(over="ignore"):
        if cfg.scheme is HashScheme.RH:
            for j in range(cfg.eta):
                kd = _hash_windows(a, cfg.k, cfg.seeds_rh[j])
                out[:, j] = np.uint64(j) * m_part + kd % m_part
            return out
        if cfg.scheme is HashScheme.MINHASH_ONLY:
            for j in range(cfg.eta):
                out[:, j] = np.uint64(j) * m_part + mh[:, j] % m_part
            return out
        # IDL: coarse placement from the MinHash digest + local offset in [0, L)
        lmask = np.uint64(cfg.l - 1)
        place_mod = np.uint64(cfg.m_part - cfg.l)
        kd = _hash_windows(a, cfg.k, cfg.seed_kmer) if cfg.sliced_local_hash else None
        for j in range(cfg.eta):
            place = _hash_u64_many(mh[:, j], cfg.seeds_place[j]) % place_mod
            if kd is not None:
                local = (kd >> np.uint64(j * cfg.log2_l)) & lmask
            else:
                local = _hash_windows(a, cfg.k, cfg.seeds_slice[j]) & lmask
            out[:, j] = np.uint64(j) * m_part + place + local
    return out


def sequence_locations(data, cfg: IdlConfig) -> np.ndarray:
    """Bit locations for every kmer of a sequence; uint64[n_kmers, eta]."""
    a = _as_u8(data)
    if a.size < cfg.k:
        raise ValueError("sequence shorter than k")
    mh = None
    if cfg.scheme is not HashScheme.RH:
        sub = _hash_windows(a, cfg.t, cfg.seed_subkmer)
        mh = kernels.rolling_min(sub, cfg.window, cfg.eta)
    return _locations_for_windows(a, mh, cfg)


def locations_from_minhashes(data, mh: np.ndarray | None, cfg: IdlConfig) -> np.ndarray:
    """Bit locations for every kmer given precomputed MinHash digests.

    Lets one MinHash pass feed many filters (multi-filter indices recompute
    only the per-range placement). `mh` may be None for the RH scheme.
    """
    a = _as_u8(data)
    if a.size < cfg.k:
        raise ValueError("sequence shorter than k")
    if cfg.scheme is not HashScheme.RH:
        if mh is None:
            raise ValueError("minhash digests required for this scheme")
        mh = np.ascontiguousarray(mh, dtype=np.uint64)
        if mh.shape != (a.size - cfg.k + 1, cfg.eta):
            raise ValueError("minhash digest array has wrong shape")
    return _locations_for_windows(a, mh, cfg)


def _single_kmer_locations(kmer: bytes, minhash_digests, cfg: IdlConfig) -> list[int]:
    a = _as_u8(kmer)
    if a.size != cfg.k:
        raise ValueError(f"kmer length {a.size} != k={cfg.k}")
    mh = None
    if minhash_digests is not None:
        mh = np.asarray([list(minhash_digests)], dtype=np.uint64)
        if mh.shape[1] != cfg.eta:
            raise ValueError("need exactly eta minhash digests")
    return [int(x) for x in _locations_for_windows(a, mh, cfg)[0]]


def idl_locations(kmer: bytes, minhash_digests, cfg: IdlConfig) -> list[int]:
    """Bit locations of one kmer under the IDL scheme, one per partition.

    Kmers with an equal MinHash digest in repetition j receive placements
    within l - 1 positions of each other in partition j.
    """
    if cfg.scheme is not HashScheme.IDL:
        raise ValueError("cfg.scheme must be IDL")
    return _single_kmer_locations(kmer, minhash_digests, cfg)


def rh_locations(kmer: bytes, cfg: IdlConfig) -> list[int]:
    """Bit locations of one kmer under the RH scheme (independent digests)."""
    if cfg.scheme is not HashScheme.RH:
        raise ValueError("cfg.scheme must be RH")
    return _single_kmer_locations(kmer, None, cfg)


def minhash_only_locations(kmer: bytes, minhash_digests, cfg: IdlConfig) -> list[int]:
    """Bit locations of one kmer from its MinHash digests alone."""
    if cfg.scheme is not HashScheme.MINHASH_ONLY:
        raise ValueError("cfg.scheme must be MINHASH_ONLY")
    return _single_kmer_locations(kmer, minhash_digests, cfg)


def kmer_minhashes(kmer: bytes, cfg: IdlConfig) -> list[int]:
    """One-permutation MinHash digests of a single kmer's sub-kmer windows."""
    a = _as_u8(kmer)
    if a.size != cfg.k:
        raise ValueError(f"kmer length {a.size} != k={cfg.k}")
    sub = _hash_windows(a, cfg.t, cfg.seed_subkmer)
    return [int(x) for x in kernels.rolling_min(sub, cfg.window, cfg.eta)[0]]


def kmer_locations(kmer: bytes, cfg: IdlConfig) -> list[int]:
    """Bit locations of one kmer under cfg.scheme (dispatching convenience)."""
    if cfg.scheme is HashScheme.RH:
        return rh_locations(kmer, cfg)
    mh = kmer_minhashes(kmer, cfg)
    if cfg.scheme is HashScheme.IDL:
        return idl_locations(kmer, mh, cfg)
    return minhash_only_locations(kmer, mh, cfg)
