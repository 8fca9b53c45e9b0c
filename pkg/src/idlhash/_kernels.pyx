# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: XXH64 digests, window hashing, segment-tree rolling
minima with one-permutation shifts, and Bloom bit set/test loops.

Must stay bit-compatible with _kernels_np.py / _xxh64.py.
"""

from libc.stdint cimport uint8_t, uint32_t, uint64_t
from libc.string cimport memcpy

import numpy as np

BACKEND = "compiled"

cdef uint64_t P1 = 11400714785074694791ULL
cdef uint64_t P2 = 14029467366897019727ULL
cdef uint64_t P3 = 1609587929392839161ULL
cdef uint64_t P4 = 9650029242287828579ULL
cdef uint64_t P5 = 2870177450012600261ULL
cdef uint64_t U64MAX = 18446744073709551615ULL


cdef inline uint64_t _rotl(uint64_t x, int r) nogil:
    return (x << r) | (x >> (64 - r))


cdef inline uint64_t _read64(const uint8_t* p) nogil:
    cdef uint64_t v
    memcpy(&v, p, 8)
    return v


cdef inline uint64_t _read32(const uint8_t* p) nogil:
    cdef uint32_t v
    memcpy(&v, p, 4)
    return <uint64_t>v


cdef inline uint64_t _round(uint64_t acc, uint64_t lane) nogil:
    return _rotl(acc + lane * P2, 31) * P1


cdef uint64_t _xxh64(const uint8_t* p, size_t length, uint64_t seed) nogil:
    cdef uint64_t acc, v1, v2, v3, v4
    cdef size_t i = 0
    if length >= 32:
        v1 = seed + P1 + P2
        v2 = seed + P2
        v3 = seed
        v4 = seed - P1
        while i + 32 <= length:
            v1 = _round(v1, _read64(p + i))
            v2 = _round(v2, _read64(p + i + 8))
            v3 = _round(v3, _read64(p + i + 16))
            v4 = _round(v4, _read64(p + i + 24))
            i += 32
        acc = _rotl(v1, 1) + _rotl(v2, 7) + _rotl(v3, 12) + _rotl(v4, 18)
        acc = (acc ^ _round(0, v1)) * P1 + P4
        acc = (acc ^ _round(0, v2)) * P1 + P4
        acc = (acc ^ _round(0, v3)) * P1 + P4
        acc = (acc ^ _round(0, v4)) * P1 + P4
    else:
        acc = seed + P5
    acc += <uint64_t>length
    while i + 8 <= length:
        acc = _rotl(acc ^ _round(0, _read64(p + i)), 27) * P1 + P4
        i += 8
    if i + 4 <= length:
        acc = _rotl(acc ^ (_read32(p + i) * P1), 23) * P2 + P3
        i += 4
    while i < length:
        acc = _rotl(acc ^ (<uint64_t>p[i] * P5), 11) * P1
        i += 1
    acc ^= acc >> 33
    acc *= P2
    acc ^= acc >> 29
    acc *= P3
    acc ^= acc >> 32
    return acc


def hash_bytes(data, seed):
    cdef const uint8_t[::1] buf = _as_view(data)
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    if buf.shape[0] == 0:
        return int(_xxh64(NULL, 0, s))
    return int(_xxh64(&buf[0], buf.shape[0], s))


cdef const uint8_t[::1] _as_view(data):
    if isinstance(data, np.ndarray):
        return np.ascontiguousarray(data, dtype=np.uint8)
    return data  # bytes / bytearray / memoryview


def hash_windows(data, int width, seed):
    """Digest every stride-1 window of `width` bytes; returns uint64[n-width+1]."""
    if width < 1:
        raise ValueError("window width must be >= 1")
    cdef const uint8_t[::1] buf = _as_view(data)
    cdef Py_ssize_t n = buf.shape[0] - width + 1
    if n <= 0:
        return np.empty(0, dtype=np.uint64)
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            o[i] = _xxh64(&buf[i], width, s)
    return out


def hash_u64_many(vals, seed):
    """Digest of each value's 8-byte little-endian encoding."""
    arr = np.ascontiguousarray(vals, dtype=np.uint64)
    cdef const uint64_t[::1] v = arr
    cdef Py_ssize_t n = v.shape[0]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t s = <uint64_t>(seed & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t le
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            le = v[i]  # little-endian host assumed; guarded at import
            o[i] = _xxh64(<const uint8_t*>&le, 8, s)
    return out


def hash_many_seeds(key, seeds):
    """Digest of one key under many seeds; returns uint64[len(seeds)]."""
    cdef const uint8_t[::1] buf = _as_view(key)
    if buf.shape[0] < 1:
        raise ValueError("empty key")
    arr = np.ascontiguousarray(seeds, dtype=np.uint64)
    cdef const uint64_t[::1] sd = arr
    cdef Py_ssize_t n = sd.shape[0]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    cdef size_t ln = buf.shape[0]
    with nogil:
        for i in range(n):
            o[i] = _xxh64(&buf[0], ln, sd[i])
    return out


def one_perm_shift(int eta):
    """Wrapped shift separating the repetitions of one-permutation MinHash."""
    cdef uint64_t shift = U64MAX // <uint64_t>eta
    if eta & (eta - 1) == 0:
        shift += 1  # 2**64 divisible by eta: floor(2**64/eta) == floor((2**64-1)/eta) + 1
    return int(shift)


def rolling_min(digests, int window, int eta):
    """Per-repetition window minima via one segment tree per repetition.

    Leaves hold the shifted digests of the current window in cyclic order;
    each slide replaces one leaf and updates log2(window) ancestors.
    """
    arr = np.ascontiguousarray(digests, dtype=np.uint64)
    cdef const uint64_t[::1] d = arr
    if window < 1 or window > d.shape[0]:
        raise ValueError("window must be in [1, len(digests)]")
    cdef Py_ssize_t n = d.shape[0] - window + 1
    cdef int cap = 1
    while cap < window:
        cap *= 2
    cdef int tree_len = 2 * cap - 1
    trees_arr = np.full((eta, tree_len), U64MAX, dtype=np.uint64)
    cdef uint64_t[:, ::1] t = trees_arr
    out = np.empty((n, eta), dtype=np.uint64)
    cdef uint64_t[:, ::1] o = out
    cdef uint64_t shift = U64MAX // <uint64_t>eta
    if eta & (eta - 1) == 0:
        shift += 1
    cdef Py_ssize_t step
    cdef int i, j, node, pop
    cdef uint64_t val
    with nogil:
        for j in range(eta):
            for i in range(window):
                t[j, cap - 1 + i] = d[i] - (<uint64_t>j) * shift
            for node in range(cap - 2, -1, -1):
                t[j, node] = min(t[j, 2 * node + 1], t[j, 2 * node + 2])
            o[0, j] = t[j, 0]
        pop = 0
        for step in range(1, n):
            for j in range(eta):
                val = d[window - 1 + step] - (<uint64_t>j) * shift
                node = cap - 1 + pop
                t[j, node] = val
                while node > 0:
                    node = (node - 1) // 2
                    t[j, node] = min(t[j, 2 * node + 1], t[j, 2 * node + 2])
                o[step, j] = t[j, 0]
            pop += 1
            if pop == window:
                pop = 0
    return out


def bloom_set(words, locs):
    """Set bit `loc` for every loc; duplicates allowed (idempotent OR)."""
    cdef uint64_t[::1] w = words
    larr = np.ascontiguousarray(locs.ravel() if isinstance(locs, np.ndarray) else locs, dtype=np.uint64)
    cdef const uint64_t[::1] l = larr
    cdef Py_ssize_t i
    with nogil:
        for i in range(l.shape[0]):
            w[l[i] >> 6] |= (<uint64_t>1) << (l[i] & 63)


def bloom_get(words, locs):
    """Read bit `loc` for every loc; returns uint8 0/1 array of the same shape."""
    cdef const uint64_t[::1] w = words
    arr = locs if isinstance(locs, np.ndarray) else np.asarray(locs, dtype=np.uint64)
    larr = np.ascontiguousarray(arr.ravel(), dtype=np.uint64)
    cdef const uint64_t[::1] l = larr
    out = np.empty(l.shape[0], dtype=np.uint8)
    cdef uint8_t[::1] o = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(l.shape[0]):
            o[i] = <uint8_t>((w[l[i] >> 6] >> (l[i] & 63)) & 1)
    return out.reshape(arr.shape)
