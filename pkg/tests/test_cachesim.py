"""Trace recording and the two-level inclusive LRU model."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_cfg

from idlhash import cachesim, gene, hash_core
from idlhash.bloom import bf_new
from idlhash.cachesim import AccessTrace, CacheModel, CacheReport, compare_schemes, scaled_model, simulate, trace_queries
from idlhash.hash_core import HashScheme


def _trace(blocks, block_bits=512):
    return AccessTrace(np.asarray(blocks, dtype=np.uint64), block_bits)


def _model(l1_blocks, l2_blocks, block_bytes=64):
    return CacheModel(l1_blocks * block_bytes, l2_blocks * block_bytes, block_bytes)


class TestModelValidation:
    def test_block_must_divide_capacities(self):
        with pytest.raises(ValueError, match="divide"):
            CacheModel(l1_bytes=100, l2_bytes=256, block_bytes=64)

    def test_l1_smaller_than_l2(self):
        with pytest.raises(ValueError, match="smaller"):
            CacheModel(l1_bytes=1024, l2_bytes=1024, block_bytes=64)

    def test_trace_block_size_must_match(self):
        with pytest.raises(ValueError, match="block size"):
            simulate(_trace([1, 2], block_bits=4096), _model(4, 8))


class TestSimulate:
    def test_repeated_single_block(self):
        rep = simulate(_trace([5] * 100), _model(4, 8))
        assert rep == CacheReport(accesses=100, l1_misses=1, l2_misses=1, distinct_blocks=1)

    def test_classic_lru_cycle_worst_case(self):
        # C+1 distinct blocks cycled twice through capacity C: every access misses L1
        c = 8
        blocks = list(range(c + 1)) * 2
        rep = simulate(_trace(blocks), _model(c, 64))
        assert rep.l1_misses == 2 * (c + 1)
        assert rep.l2_misses == c + 1  # second cycle still hits L2

    def test_both_levels_thrash_when_both_small(self):
        c = 8
        blocks = list(range(c + 2)) * 2
        rep = simulate(_trace(blocks), _model(c, c + 1))
        assert rep.l1_misses == 2 * (c + 2)
        assert rep.l2_misses == 2 * (c + 2)

    def test_cold_misses_only_when_capacity_covers_trace(self, rng):
        blocks = rng.integers(0, 50, size=400)
        rep = simulate(_trace(blocks), _model(512, 1024))
        distinct = len(np.unique(blocks))
        assert rep.l1_misses == rep.l2_misses == rep.distinct_blocks == distinct

    def test_random_uniform_steady_state_rate(self, rng):
        total_blocks, c1, c2 = 4096, 256, 1024
        blocks = rng.integers(0, total_blocks, size=60_000)
        rep = simulate(_trace(blocks), _model(c1, c2))
        assert rep.l1_miss_rate == pytest.approx(1 - c1 / total_blocks, abs=0.02)
        assert rep.l2_miss_rate == pytest.approx(1 - c2 / total_blocks, abs=0.02)

    def test_deterministic(self, rng):
        blocks = rng.integers(0, 1000, size=5000)
        m = _model(64, 256)
        assert simulate(_trace(blocks), m) == simulate(_trace(blocks), m)

    @given(
        blocks=st.lists(st.integers(0, 60), min_size=1, max_size=400),
        c1=st.integers(1, 16),
        c2e=st.integers(1, 16),
    )
    @settings(max_examples=120, deadline=None)
    def test_invariants(self, blocks, c1, c2e):
        rep = simulate(_trace(blocks), _model(c1, c1 + c2e))
        assert rep.l2_misses <= rep.l1_misses <= rep.accesses
        assert rep.l1_misses >= rep.distinct_blocks  # cold misses at least
        assert rep.l2_misses >= min(rep.distinct_blocks, 1)


class TestTrace:
    @pytest.fixture()
    def frozen_bf(self, genome_100k):
        cfg = make_cfg(m=2**22, l=512, eta=4)
        return bf_new(cfg).insert_sequence(genome_100k[:30_000]).freeze()

    def test_one_kmer_eta_accesses(self, frozen_bf):
        t = trace_queries(frozen_bf, [gene.random_genome(31, 1)])
        assert t.accesses == 4

    def test_repeat_kmer_identical_blocks(self, frozen_bf):
        km = gene.random_genome(31, 2)
        t = trace_queries(frozen_bf, [km, km])
        assert (t.blocks[:4] == t.blocks[4:]).all()

    def test_trace_length_is_eta_per_kmer(self, frozen_bf, genome_100k):
        q = genome_100k[500:700]  # 170 kmers
        t = trace_queries(frozen_bf, [q])
        assert t.accesses == 4 * 170

    def test_requires_frozen_filter(self, genome_100k):
        bf = bf_new(make_cfg()).insert_sequence(genome_100k[:1000])
        with pytest.raises(RuntimeError, match="frozen"):
            trace_queries(bf, [genome_100k[:100]])

    def test_block_ids_are_bit_over_blocksize(self, frozen_bf):
        km = gene.random_genome(31, 3)
        locs = hash_core.kmer_locations(km, frozen_bf.cfg)
        t = trace_queries(frozen_bf, [km], block_size_bits=512)
        assert t.blocks.tolist() == [loc // 512 for loc in locs]

    def test_result_unaffected_by_tracing(self, frozen_bf, genome_100k):
        q = genome_100k[100:300]
        before = frozen_bf.query_sequence(q, early_exit=False)
        trace_queries(frozen_bf, [q])
        assert frozen_bf.query_sequence(q, early_exit=False) == before

    def test_idl_locality_bounds_distinct_blocks(self, genome_100k):
        # with L <= block bits, one read touches at most two blocks per
        # distinct MinHash digest per repetition
        cfg = make_cfg(scheme=HashScheme.IDL, m=2**24, l=512, eta=2)
        bf = bf_new(cfg).insert_sequence(genome_100k[:30_000]).freeze()
        read = genome_100k[40_000:40_128]
        mh = hash_core.sequence_minhashes(read, cfg)
        distinct_mh = sum(len(np.unique(mh[:, j])) for j in range(cfg.eta))
        t = trace_queries(bf, [read], block_size_bits=512)
        assert t.distinct_blocks() <= 2 * distinct_mh


class TestScaledModel:
    def test_reference_regime_at_full_size(self):
        m = scaled_model(2**30)
        assert m.l1_bytes == 2 * 2**20 and m.l2_bytes == 256 * 2**20

    def test_proportional_below_reference(self):
        m = scaled_model(2**26)  # filter 16x smaller
        assert m.l1_bytes == 2 * 2**20 // 16
        assert m.l2_bytes == 256 * 2**20 // 16

    def test_never_below_one_block(self):
        m = scaled_model(512)
        assert m.l1_bytes >= 64 and m.l2_bytes > m.l1_bytes


@pytest.fixture(scope="module")
def rows(genome_1m):
    corpus = [genome_1m[:120_000]]
    queries = [genome_1m[i : i + 160] for i in range(0, 6000, 160)]
    base = make_cfg(scheme=HashScheme.IDL, m=2**24, l=512, eta=4)
    return compare_schemes(corpus, queries, base)


class TestCompareSchemes:
    def test_all_schemes_present(self, rows):
        assert [r.scheme for r in rows] == ["minhash_only", "idl", "rh"]

    def test_distinct_block_ordering(self, rows):
        mh, idl, rh = rows
        assert mh.distinct_blocks <= idl.distinct_blocks <= rh.distinct_blocks

    def test_miss_rate_ordering(self, rows):
        mh, idl, rh = rows
        assert mh.l1_miss_rate <= idl.l1_miss_rate <= rh.l1_miss_rate
        assert rh.l1_miss_rate / idl.l1_miss_rate >= 1.8

    def test_identical_inputs_identical_rows(self, rows, genome_1m):
        corpus = [genome_1m[:120_000]]
        queries = [genome_1m[i : i + 160] for i in range(0, 6000, 160)]
        base = make_cfg(scheme=HashScheme.IDL, m=2**24, l=512, eta=4)
        again = compare_schemes(corpus, queries, base)
        assert again == rows

    def test_csv_has_fixed_columns(self, rows, tmp_path):
        text = cachesim.rows_to_csv(rows, config={"demo": 1})
        lines = text.strip().splitlines()
        assert lines[0].startswith("# ")
        assert lines[1] == ",".join(cachesim.CSV_COLUMNS)
        assert len(lines) == 2 + len(rows)
        out = tmp_path / "cache.csv"
        cachesim.write_csv(rows, out, config={"demo": 1})
        assert out.read_text() == text
