"""False-positive bound evaluation and bound-vs-empirical reports."""

import numpy as np
import pytest

from conftest import make_cfg
from oracles import SimilarKmerCounter

from idlhash import gene
from idlhash.analysis import BoundInputs, bound_vs_empirical, fpr_bound, gene_w2
from idlhash.bloom import bf_new, empirical_fpr
from idlhash.gene import ExactKmerIndex
from idlhash.hash_core import HashScheme


def _bi(m=2**24, eta=2, l=4096, n=2**20, w1=31, w2=256):
    return BoundInputs(m=m, eta=eta, l=l, n=n, w1=w1, w2=w2)


class TestFprBound:
    def test_no_insertions_no_similars_is_zero(self):
        assert fpr_bound(_bi(n=0, w2=0)).exact == 0.0

    def test_no_insertions_keeps_similarity_term(self):
        b = _bi(n=0)
        res = fpr_bound(b)
        assert res.exact == pytest.approx((256 * (1 / 4096 + 2 / 2**24)) ** 2)

    def test_huge_range_limit_is_w2_over_l_to_eta(self):
        # m -> infinity leaves only the similarity term (w2/L)^eta
        for eta in (1, 2, 4):
            res = fpr_bound(_bi(m=2**60, eta=eta, n=2**20))
            assert res.exact == pytest.approx((256 / 4096) ** eta, rel=1e-3)

    def test_exact_and_approx_agree_when_load_moderate(self):
        # within 5% whenever eta*n/m <= 0.5
        for m in (2**22, 2**26):
            for eta in (1, 2, 4):
                for load in (0.05, 0.25, 0.5):
                    n = int(load * m / eta)
                    res = fpr_bound(_bi(m=m, eta=eta, n=n))
                    assert res.exact == pytest.approx(res.approx, rel=0.05)

    def test_monotone_in_l_and_m(self):
        vals_l = [fpr_bound(_bi(l=l)).exact for l in (256, 1024, 4096, 2**14)]
        assert all(a >= b for a, b in zip(vals_l, vals_l[1:]))
        vals_m = [fpr_bound(_bi(m=m)).exact for m in (2**23, 2**24, 2**26, 2**28)]
        assert all(a >= b for a, b in zip(vals_m, vals_m[1:]))

    def test_monotone_in_n_and_w2(self):
        vals_n = [fpr_bound(_bi(n=n)).exact for n in (0, 2**18, 2**20, 2**22)]
        assert all(a <= b for a, b in zip(vals_n, vals_n[1:]))
        vals_w2 = [fpr_bound(_bi(w2=w)).exact for w in (0, 64, 256, 1024)]
        assert all(a <= b for a, b in zip(vals_w2, vals_w2[1:]))

    def test_clamped_flag_keeps_sweeps_total(self):
        res = fpr_bound(_bi(m=2**18, n=2**22, eta=1))
        assert res.clamped and res.exact == 1.0

    def test_inapplicable_when_horizon_exceeds_range(self):
        with pytest.raises(ValueError, match="inapplicable"):
            fpr_bound(BoundInputs(m=100, eta=4, l=8, n=10, w1=31, w2=4))


class TestGeneW2:
    def test_reference_values(self):
        assert gene_w2(31, 16) == 256
        assert gene_w2(31, 31) == 1

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            gene_w2(16, 31)

    def test_bruteforce_never_exceeds(self, genome_100k):
        counter = SimilarKmerCounter(genome_100k, 31, 16)
        rng = np.random.default_rng(5)
        worst = 0
        for _ in range(200):
            i = int(rng.integers(0, len(genome_100k) - 31))
            worst = max(worst, counter.count(genome_100k[i : i + 31]))
        assert worst <= gene_w2(31, 16)


@pytest.fixture(scope="module")
def setup(genome_1m):
    corpus = genome_1m[: 2**18 + 30]
    records = gene.gen_poisoned_queries([gene.Sequence(corpus, "g")], 400, rng_seed=11)
    oracle = ExactKmerIndex(corpus, 31)
    negs = [r.poisoned.bases for r in records if not oracle.is_subset(r.poisoned.bases)]
    return corpus, negs, oracle


class TestBoundVsEmpirical:
    def test_bound_holds_with_slack(self, setup):
        corpus, negs, oracle = setup
        cfg = make_cfg(scheme=HashScheme.IDL, m=2**22, eta=2, l=4096)
        rep = bound_vs_empirical(corpus, cfg, negs, oracle=oracle)
        assert rep.holds
        assert rep.empirical_fpr > 0.0
        assert rep.slack > 1.0  # the bound is loose in practice
        assert rep.inputs.w1 == 31 and rep.inputs.w2 == 256

    def test_bound_nonincreasing_in_l(self, setup):
        corpus, negs, oracle = setup
        bounds = []
        for l in (1024, 4096, 2**14):
            cfg = make_cfg(scheme=HashScheme.IDL, m=2**22, eta=2, l=l)
            bounds.append(bound_vs_empirical(corpus, cfg, negs, oracle=oracle).bound_exact)
        assert bounds == sorted(bounds, reverse=True)

    def test_reuses_prebuilt_filter(self, setup):
        corpus, negs, oracle = setup
        cfg = make_cfg(scheme=HashScheme.IDL, m=2**22, eta=2, l=4096)
        bf = bf_new(cfg).insert_sequence(corpus).freeze()
        rep = bound_vs_empirical(corpus, cfg, negs, bf=bf, oracle=oracle)
        est = empirical_fpr(bf, negs, oracle)
        assert rep.empirical_fpr == est.kmer_fpr
