"""Upper bounds on the false-positive rate under locality assumptions.

The bound treats the inserted kmer stream as similar only within a horizon
of w1 positions, with at most w2 data kmers similar to any query kmer. For
gene tokenization those hold with w1 = k and w2 = (k - t + 1)^2, because a
query kmer has at most k - t + 1 sub-kmers, each shared by at most
k - t + 1 data kmers. Empirical rates are expected to sit well below the
bound; a measured rate above it signals an implementation bug.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .bloom import BloomFilter, empirical_fpr
from .gene import ExactKmerIndex, _bases_of
from .hash_core import IdlConfig


@dataclass(frozen=True)
class BoundInputs:
    """Parameters of the false-positive bound."""

    m: int
    eta: int
    l: int
    n: int
    w1: int
    w2: int

    def __post_init__(self):
        if min(self.m, self.eta, self.l, self.w1) < 1 or self.n < 0 or self.w2 < 0:
            raise ValueError("m, eta, l, w1 must be >= 1 and n, w2 >= 0")


@dataclass(frozen=True)
class BoundResult:
    exact: float
    approx: float
    clamped: bool  # raw value exceeded 1; reported as 1 (uninformative)


def fpr_bound(b: BoundInputs) -> BoundResult:
    """Per-query false-positive bound; exact and exponential-approx forms.

    Inner term per repetition: w2*(1/l + eta/m) for the similar kmers, plus
    2*(1 - (1 - w1*eta/m)^(n/2w1)) for the dissimilar bulk. Values above 1
    are clamped and flagged rather than rejected, keeping sweeps total.
    """
    if b.w1 * b.eta >= b.m:
        raise ValueError("bound inapplicable: w1*eta/m must be < 1")
    sim = b.w2 * (1.0 / b.l + b.eta / b.m)
    bulk_exact = 2.0 * (1.0 - (1.0 - b.w1 * b.eta / b.m) ** (b.n / (2.0 * b.w1)))
    bulk_approx = 2.0 * (1.0 - math.exp(-b.eta * b.n / (2.0 * b.m)))
    exact = (sim + bulk_exact) ** b.eta
    approx = (sim + bulk_approx) ** b.eta
    clamped = exact > 1.0 or approx > 1.0
    return BoundResult(exact=min(exact, 1.0), approx=min(approx, 1.0), clamped=clamped)


def gene_w2(k: int, t: int) -> int:
    """Maximum count of data kmers similar to one query kmer: (k - t + 1)^2."""
    if not 1 <= t <= k:
        raise ValueError("need 1 <= t <= k")
    return (k - t + 1) ** 2


@dataclass(frozen=True)
class BoundReport:
    inputs: BoundInputs
    bound_exact: float
    bound_approx: float
    clamped: bool
    empirical_fpr: float
    slack: float
    holds: bool


def bound_vs_empirical(
    corpus,
    cfg: IdlConfig,
    negative_queries,
    w1: int | None = None,
    w2: int | None = None,
    bf: BloomFilter | None = None,
    oracle: ExactKmerIndex | None = None,
) -> BoundReport:
    """Compare the bound against the measured per-kmer false-positive rate.

    Builds (or reuses) a filter over the corpus, measures the per-kmer rate
    on oracle-verified negatives, and reports the slack ratio. `holds` False
    means the measurement exceeded the bound.
    """
    seqs = [corpus] if isinstance(corpus, (bytes, bytearray)) else list(corpus)
    if bf is None:
        bf = BloomFilter(cfg)
        for s in seqs:
            bf.insert_sequence(s)
        bf.freeze()
    if oracle is None:
        oracle = ExactKmerIndex([_bases_of(s) for s in seqs], cfg.k)
    inputs = BoundInputs(
        m=cfg.m,
        eta=cfg.eta,
        l=cfg.l,
        n=bf.n_inserted,
        w1=w1 if w1 is not None else cfg.k,
        w2=w2 if w2 is not None else gene_w2(cfg.k, cfg.t),
    )
    bound = fpr_bound(inputs)
    est = empirical_fpr(bf, negative_queries, oracle)
    emp = est.kmer_fpr
    slack = math.inf if emp == 0.0 else bound.exact / emp
    return BoundReport(
        inputs=inputs,
        bound_exact=bound.exact,
        bound_approx=bound.approx,
        clamped=bound.clamped,
        empirical_fpr=emp,
        slack=slack,
        holds=emp <= bound.exact,
    )


CSV_COLUMNS = ["m", "eta", "L", "n", "w1", "w2", "bound_exact", "bound_approx", "empirical_fpr", "slack"]


def report_csv_row(rep: BoundReport) -> list:
    i = rep.inputs
    return [
        i.m,
        i.eta,
        i.l,
        i.n,
        i.w1,
        i.w2,
        repr(rep.bound_exact),
        repr(rep.bound_approx),
        repr(rep.empirical_fpr),
        "inf" if math.isinf(rep.slack) else repr(rep.slack),
    ]


def bound_csv_row(inputs: BoundInputs) -> list:
    """Sweep row without an empirical measurement."""
    bound = fpr_bound(inputs)
    return [
        inputs.m,
        inputs.eta,
        inputs.l,
        inputs.n,
        inputs.w1,
        inputs.w2,
        repr(bound.exact),
        repr(bound.approx),
        "",
        "",
    ]
