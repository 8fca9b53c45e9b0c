"""Numpy implementations of the hot kernels.

Fallback backend used when the compiled extension is unavailable (or when
IDLHASH_BACKEND=python). Every function here must return bit-identical
results to the compiled versions in _kernels.pyx; the digests themselves
follow the XXH64 algorithm (see _xxh64.py for the scalar reference).
"""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from ._xxh64 import _MASK, _P1, _P2, _P3, _P4, _P5, xxh64

BACKEND = "python"

_U = np.uint64


def _as_u8(data) -> np.ndarray:
    if isinstance(data, np.ndarray):
        return np.ascontiguousarray(data, dtype=np.uint8)
    return np.frombuffer(bytes(data) if isinstance(data, memoryview) else data, dtype=np.uint8)


def _rotl(x, r: int):
    return (x << _U(r)) | (x >> _U(64 - r))


def _round0(lane):
    # one mixing round applied to a fresh accumulator
    return _rotl(lane * _U(_P2), 31) * _U(_P1)


def _avalanche(acc):
    acc = acc ^ (acc >> _U(33))
    acc = acc * _U(_P2)
    acc = acc ^ (acc >> _U(29))
    acc = acc * _U(_P3)
    return acc ^ (acc >> _U(32))


def hash_bytes(data, seed: int) -> int:
    """Scalar digest; identical to the vectorized window hash at width len(data)."""
    if isinstance(data, np.ndarray):
        data = data.tobytes()
    return xxh64(bytes(data), seed)


def hash_windows(data, width: int, seed: int) -> np.ndarray:
    """Digest every stride-1 window of `width` bytes; returns uint64[n-width+1]."""
    if width < 1:
        raise ValueError("window width must be >= 1")
    a = _as_u8(data)
    n = a.size - width + 1
    if n <= 0:
        return np.empty(0, dtype=np.uint64)
    seed &= _MASK

    # unaligned little-endian reads at every byte offset, shared by all windows
    u64at = None
    u32at = None
    if width >= 8:
        u64at = sliding_window_view(a, 8).copy().view("<u8").ravel()
    if (width & 7) >= 4:
        u32at = sliding_window_view(a, 4).copy().view("<u4").ravel()

    def lane64(off):
        return u64at[off : off + n]

    with np.errstate(over="ignore"):
        i = 0
        if width >= 32:
            v1 = np.full(n, (seed + _P1 + _P2) & _MASK, _U)
            v2 = np.full(n, (seed + _P2) & _MASK, _U)
            v3 = np.full(n, seed, _U)
            v4 = np.full(n, (seed - _P1) & _MASK, _U)
            while i + 32 <= width:
                v1 = _rotl(v1 + lane64(i) * _U(_P2), 31) * _U(_P1)
                v2 = _rotl(v2 + lane64(i + 8) * _U(_P2), 31) * _U(_P1)
                v3 = _rotl(v3 + lane64(i + 16) * _U(_P2), 31) * _U(_P1)
                v4 = _rotl(v4 + lane64(i + 24) * _U(_P2), 31) * _U(_P1)
                i += 32
            acc = _rotl(v1, 1) + _rotl(v2, 7) + _rotl(v3, 12) + _rotl(v4, 18)
            for v in (v1, v2, v3, v4):
                acc = (acc ^ _round0(v)) * _U(_P1) + _U(_P4)
        else:
            acc = np.full(n, (seed + _P5) & _MASK, _U)

        acc = acc + _U(width)
        while i + 8 <= width:
            acc = _rotl(acc ^ _round0(lane64(i)), 27) * _U(_P1) + _U(_P4)
            i += 8
        if i + 4 <= width:
            acc = _rotl(acc ^ (u32at[i : i + n].astype(_U) * _U(_P1)), 23) * _U(_P2) + _U(_P3)
            i += 4
        while i < width:
            acc = _rotl(acc ^ (a[i : i + n].astype(_U) * _U(_P5)), 11) * _U(_P1)
            i += 1
        return _avalanche(acc)


def hash_u64_many(vals: np.ndarray, seed: int) -> np.ndarray:
    """Digest of each value's 8-byte little-endian encoding."""
    vals = np.ascontiguousarray(vals, dtype=np.uint64)
    seed &= _MASK
    with np.errstate(over="ignore"):
        acc = np.full(vals.size, (seed + _P5 + 8) & _MASK, _U)
        acc = _rotl(acc ^ _round0(vals), 27) * _U(_P1) + _U(_P4)
        return _avalanche(acc)


def hash_many_seeds(key, seeds: np.ndarray) -> np.ndarray:
    """Digest of one key under many seeds; returns uint64[len(seeds)]."""
    a = _as_u8(key)
    width = a.size
    seeds = np.ascontiguousarray(seeds, dtype=np.uint64)
    if width < 1:
        raise ValueError("empty key")
    buf = a.tobytes()

    def lane64(off):
        return _U(int.from_bytes(buf[off : off + 8], "little"))

    with np.errstate(over="ignore"):
        i = 0
        if width >= 32:
            v1 = seeds + _U((_P1 + _P2) & _MASK)
            v2 = seeds + _U(_P2)
            v3 = seeds.copy()
            v4 = seeds - _U(_P1)
            while i + 32 <= width:
                v1 = _rotl(v1 + lane64(i) * _U(_P2), 31) * _U(_P1)
                v2 = _rotl(v2 + lane64(i + 8) * _U(_P2), 31) * _U(_P1)
                v3 = _rotl(v3 + lane64(i + 16) * _U(_P2), 31) * _U(_P1)
                v4 = _rotl(v4 + lane64(i + 24) * _U(_P2), 31) * _U(_P1)
                i += 32
            acc = _rotl(v1, 1) + _rotl(v2, 7) + _rotl(v3, 12) + _rotl(v4, 18)
            for v in (v1, v2, v3, v4):
                acc = (acc ^ _round0(v)) * _U(_P1) + _U(_P4)
        else:
            acc = seeds + _U(_P5)

        acc = acc + _U(width)
        while i + 8 <= width:
            acc = _rotl(acc ^ _U(_round0_scalar(int(lane64(i)))), 27) * _U(_P1) + _U(_P4)
            i += 8
        if i + 4 <= width:
            lane = int.from_bytes(buf[i : i + 4], "little")
            acc = _rotl(acc ^ _U((lane * _P1) & _MASK), 23) * _U(_P2) + _U(_P3)
            i += 4
        while i < width:
            acc = _rotl(acc ^ _U((buf[i] * _P5) & _MASK), 11) * _U(_P1)
            i += 1
        return _avalanche(acc)


def _round0_scalar(lane: int) -> int:
    lane = (lane * _P2) & _MASK
    lane = ((lane << 31) & _MASK) | (lane >> 33)
    return (lane * _P1) & _MASK


def one_perm_shift(eta: int) -> int:
    """Wrapped shift separating the repetitions of one-permutation MinHash."""
    return (2**64 // eta) & _MASK


def rolling_min(digests: np.ndarray, window: int, eta: int) -> np.ndarray:
    """Per-repetition window minima with one-permutation shifts.

    out[i, j] = min over digests[i : i+window] of (d - j*shift) mod 2^64.
    """
    d = np.ascontiguousarray(digests, dtype=np.uint64)
    if window < 1 or window > d.size:
        raise ValueError("window must be in [1, len(digests)]")
    n = d.size - window + 1
    out = np.empty((n, eta), dtype=np.uint64)
    shift = one_perm_shift(eta)
    with np.errstate(over="ignore"):
        for j in range(eta):
            shifted = d - _U((j * shift) & _MASK)
            out[:, j] = sliding_window_view(shifted, window).min(axis=1)
    return out


def bloom_set(words: np.ndarray, locs: np.ndarray) -> None:
    """Set bit `loc` for every loc; duplicates allowed (idempotent OR)."""
    if locs.size == 0:
        return
    locs = np.sort(locs.ravel())
    w = (locs >> _U(6)).astype(np.int64)
    masks = _U(1) << (locs & _U(63))
    starts = np.flatnonzero(np.r_[True, w[1:] != w[:-1]])
    ors = np.bitwise_or.reduceat(masks, starts)
    words[w[starts]] |= ors


def bloom_get(words: np.ndarray, locs: np.ndarray) -> np.ndarray:
    """Read bit `loc` for every loc; returns uint8 0/1 array of the same shape."""
    flat = locs.ravel()
    bits = (words[(flat >> _U(6)).astype(np.int64)] >> (flat & _U(63))) & _U(1)
    return bits.astype(np.uint8).reshape(locs.shape)
