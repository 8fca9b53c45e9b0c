"""Digest correctness: frozen vectors, scalar/vector/compiled agreement."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from idlhash import _kernels_np as knp
from idlhash._xxh64 import xxh64

try:
    from idlhash import _kernels as kc

    BACKENDS = [knp, kc]
except ImportError:
    kc = None
    BACKENDS = [knp]

# independently published/verified digests of the reference algorithm
VECTORS = [
    (b"", 0, 0xEF46DB3751D8E999),
    (b"a", 0, 0xD24EC4F1A98C6E5B),
    (b"abc", 0, 0x44BC2CF5AD770999),
    (b"ACGTACGTACGTACGTACGTACGTACGTACG", 7, 0x8CD42B6B574C6156),
    (b"0123456789abcdef0123456789abcdef01234567", 2**64 - 1, 0xF52B93BB3B18EEDB),
]


@pytest.mark.parametrize("data,seed,expected", VECTORS)
def test_frozen_vectors_scalar(data, seed, expected):
    assert xxh64(data, seed) == expected


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
@pytest.mark.parametrize("data,seed,expected", VECTORS)
def test_frozen_vectors_backends(backend, data, seed, expected):
    if data:
        assert backend.hash_bytes(data, seed) == expected


def test_compiled_backend_available():
    # the build ships the extension; the numpy path is a fallback, not the norm
    assert kc is not None, "compiled kernels failed to build/import"


@settings(max_examples=200, deadline=None)
@given(data=st.binary(min_size=1, max_size=100), seed=st.integers(0, 2**64 - 1))
def test_scalar_matches_all_backends(data, seed):
    expected = xxh64(data, seed)
    for backend in BACKENDS:
        assert backend.hash_bytes(data, seed) == expected


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
@pytest.mark.parametrize("width", [1, 3, 4, 7, 8, 9, 15, 16, 23, 31, 32, 33, 47, 64, 100])
def test_hash_windows_matches_scalar(backend, width):
    rng = np.random.default_rng(width)
    data = rng.integers(0, 256, size=300, dtype=np.uint8).tobytes()
    seed = int(rng.integers(0, 2**64, dtype=np.uint64))
    out = backend.hash_windows(data, width, seed)
    assert out.dtype == np.uint64
    assert out.size == len(data) - width + 1
    for i in range(0, out.size, 17):
        assert int(out[i]) == xxh64(data[i : i + width], seed)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_hash_windows_short_input(backend):
    assert backend.hash_windows(b"ab", 5, 1).size == 0


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_hash_u64_many_matches_scalar(backend):
    rng = np.random.default_rng(5)
    vals = rng.integers(0, 2**64, size=64, dtype=np.uint64)
    out = backend.hash_u64_many(vals, 99)
    for v, h in zip(vals.tolist(), out.tolist()):
        assert h == xxh64(v.to_bytes(8, "little"), 99)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
@pytest.mark.parametrize("keylen", [1, 4, 8, 16, 31, 32, 40, 64])
def test_hash_many_seeds_matches_scalar(backend, keylen):
    rng = np.random.default_rng(keylen)
    key = rng.integers(0, 256, size=keylen, dtype=np.uint8).tobytes()
    seeds = rng.integers(0, 2**64, size=32, dtype=np.uint64)
    out = backend.hash_many_seeds(key, seeds)
    for s, h in zip(seeds.tolist(), out.tolist()):
        assert h == xxh64(key, s)


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
@pytest.mark.parametrize("eta", [1, 2, 3, 4, 7, 8])
def test_rolling_min_matches_bruteforce(backend, eta):
    rng = np.random.default_rng(eta)
    d = rng.integers(0, 2**64, size=200, dtype=np.uint64)
    window = 16
    out = backend.rolling_min(d, window, eta)
    shift = (2**64 // eta) % 2**64
    for i in range(0, d.size - window + 1, 7):
        for j in range(eta):
            expected = min((int(x) - j * shift) % 2**64 for x in d[i : i + window])
            assert int(out[i, j]) == expected


@pytest.mark.parametrize("backend", BACKENDS, ids=lambda b: b.BACKEND)
def test_bloom_set_get_roundtrip(backend):
    rng = np.random.default_rng(8)
    words = np.zeros(128, dtype=np.uint64)
    locs = rng.integers(0, 128 * 64, size=500, dtype=np.uint64)
    backend.bloom_set(words, locs)
    expected = np.zeros(128 * 64, dtype=np.uint8)
    expected[np.unique(locs)] = 1
    got = backend.bloom_get(words, np.arange(128 * 64, dtype=np.uint64))
    assert (got == expected).all()


@pytest.mark.skipif(kc is None, reason="compiled backend unavailable")
def test_backends_bit_identical_on_random_streams():
    rng = np.random.default_rng(77)
    data = rng.integers(0, 256, size=4000, dtype=np.uint8).tobytes()
    for width in (16, 31):
        a = knp.hash_windows(data, width, 3)
        b = kc.hash_windows(data, width, 3)
        assert (a == b).all()
    d = rng.integers(0, 2**64, size=2000, dtype=np.uint64)
    for eta in (1, 3, 4):
        assert (knp.rolling_min(d, 16, eta) == kc.rolling_min(d, 16, eta)).all()
        assert knp.one_perm_shift(eta) == kc.one_perm_shift(eta)
    w1 = np.zeros(256, dtype=np.uint64)
    w2 = np.zeros(256, dtype=np.uint64)
    locs = rng.integers(0, 256 * 64, size=4000, dtype=np.uint64)
    knp.bloom_set(w1, locs)
    kc.bloom_set(w2, locs)
    assert (w1 == w2).all()
