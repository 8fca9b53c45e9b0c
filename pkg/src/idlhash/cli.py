"""Command-line front end: build indices, generate queries, run benchmarks,
simulate caches, and evaluate false-positive bounds.

Every output file carries the full effective configuration as a leading
`# {json}` comment so runs are reproducible from their artifacts. Timing
columns are informational only and live in dedicated *_seconds columns.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys
import time
from pathlib import Path

import click

from . import analysis, cachesim, gene
from ._backend import backend_name
from .bloom import BloomFilter, optimal_eta
from .hash_core import HashScheme, IdlConfig
from .index import CobsIndex, RamboIndex, load_index, save_bf_index

_SCHEMES = [s.value for s in HashScheme]


def _resolve(path: str | None) -> Path | None:
    """Relative paths resolve under IDLHASH_DATA_DIR when it is set."""
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get("IDLHASH_DATA_DIR")
    if base and not p.is_absolute():
        return Path(base) / p
    return p


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    tmp.replace(path)


def _csv_text(config: dict, header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _cfg_options(fn):
    fn = click.option("--k", default=31, show_default=True, help="kmer length (bases)")(fn)
    fn = click.option("--t", default=16, show_default=True, help="sub-kmer length (bases)")(fn)
    fn = click.option("--log2-l", default=12, show_default=True, help="log2 of the locality range in bits")(fn)
    fn = click.option("--m", default=2**26, show_default=True, help="total filter range in bits")(fn)
    fn = click.option("--eta", default=4, show_default=True, help="hash repetitions")(fn)
    fn = click.option("--seed", default=0, show_default=True, help="base seed for all derived hashing")(fn)
    return fn


def _make_cfg(k, t, log2_l, m, eta, seed, scheme) -> IdlConfig:
    return IdlConfig(k=k, t=t, l=1 << log2_l, m=m, eta=eta, base_seed=seed, scheme=HashScheme(scheme))


def _read_inputs(paths, k: int):
    out = []
    for p in paths:
        p = _resolve(p)
        try:
            out.append((p.name, list(gene.parse_fastx(p, min_run=k))))
        except OSError as e:
            raise click.ClickException(f"cannot read {p}: {e}")
    return out


@click.group()
@click.version_option(package_name="idlhash")
def main():
    """Locality-preserving kmer hashing, Bloom-filter indices and analysis."""


@main.command("gen-corpus")
@click.option("--bases", required=True, type=int, help="total bases of synthetic genome")
@click.option("--reads", default=0, show_default=True, help="split into this many reads (0 = one record)")
@click.option("--read-len", default=256, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def gen_corpus(bases, reads, read_len, seed, out_path):
    """Write a uniform-random synthetic corpus as FASTA/FASTQ."""
    out = _resolve(out_path)
    genome = gene.random_genome(bases, seed)
    if reads > 0:
        seqs = gene.sample_reads(genome, reads, read_len, seed + 1)
    else:
        seqs = [gene.Sequence(genome, "genome0")]
    name = str(out)
    if ".fastq" in name or ".fq" in name:
        gene.write_fastq(out, seqs)
    else:
        gene.write_fasta(out, seqs)
    click.echo(f"wrote {len(seqs)} record(s), {bases} bases to {out}")


@main.command()
@click.option("--type", "index_type", type=click.Choice(["bf", "cobs", "rambo"]), default="bf", show_default=True)
@click.option("--scheme", type=click.Choice(_SCHEMES), default="idl", show_default=True)
@_cfg_options
@click.option("--in", "inputs", multiple=True, required=True, type=click.Path(), help="FASTQ/FASTA input (repeatable)")
@click.option("--out", "out_dir", required=True, type=click.Path(), help="index directory")
@click.option("--threads", default=1, show_default=True)
@click.option("--b", "b_buckets", default=0, help="RAMBO: filters per repetition")
@click.option("--r", "r_reps", default=0, help="RAMBO: repetitions")
@click.option("--assignment-seed", default=0, show_default=True)
@click.option("--m-per-kmer", type=float, default=None, help="COBS: size each filter as m_i = f * n_i")
def build(index_type, scheme, k, t, log2_l, m, eta, seed, inputs, out_dir, threads, b_buckets, r_reps, assignment_seed, m_per_kmer):
    """Build a single filter, a COBS array, or a RAMBO grid.

    --eta 0 picks the FPR-optimal repetition count ln(2)*m/n from the
    input's kmer count.
    """
    loaded = _read_inputs(inputs, k)
    total_reads = sum(len(seqs) for _, seqs in loaded)
    total_kmers = sum(len(s) - k + 1 for _, seqs in loaded for s in seqs)
    if total_reads == 0:
        raise click.ClickException("inputs contain no usable reads")
    if eta == 0:
        per_filter = total_kmers if index_type == "bf" else max(1, total_kmers // max(len(loaded), 1))
        eta = optimal_eta(m, max(per_filter, 1))
    cfg = _make_cfg(k, t, log2_l, m, eta, seed, scheme)
    out = _resolve(out_dir)
    t0 = time.perf_counter()
    if index_type == "bf":
        bf = BloomFilter(cfg)
        for _, seqs in loaded:
            for s in seqs:
                bf.insert_sequence(s)
        bf.freeze()
        save_bf_index(bf, out, [fid for fid, _ in loaded])
    elif index_type == "cobs":
        CobsIndex.build(loaded, cfg, m_per_kmer=m_per_kmer, threads=threads).save(out)
    else:
        if b_buckets < 1 or r_reps < 1:
            raise click.ClickException("rambo requires --b >= 1 and --r >= 1")
        RamboIndex.build(loaded, b_buckets, r_reps, cfg, assignment_seed, threads=threads).save(out)
    elapsed = time.perf_counter() - t0
    click.echo(
        f"indexed {total_reads} reads ({total_kmers} kmers) into {out} "
        f"[{index_type}/{scheme}, backend={backend_name()}]: "
        f"{elapsed / total_reads:.6f} s/read"
    )


@main.command("gen-queries")
@click.option("--in", "input_path", required=True, type=click.Path())
@click.option("--count", default=1000, show_default=True)
@click.option("--min-len", default=128, show_default=True, help="sampled subsequence length")
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def gen_queries(input_path, count, min_len, seed, out_path):
    """Sample subsequences and poison one base of each (hard negatives)."""
    records = gene.gen_poisoned_queries(_resolve(input_path), count, min_len=min_len, rng_seed=seed)
    gene.save_queries(records, _resolve(out_path))
    click.echo(f"wrote {len(records)} poisoned queries to {out_path} (+ sidecar .meta.jsonl)")


@main.command()
@click.option("--index", "index_dir", required=True, type=click.Path())
@click.option("--queries", "queries_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--fractions", is_flag=True, help="report per-file kmer match fractions (disables early exit)")
@click.option("--no-early-exit", is_flag=True, help="test every kmer even after a failure")
def query(index_dir, queries_path, out_path, fractions, no_early_exit):
    """Run queries against an index; results go to the CSV, never the exit code."""
    try:
        idx = load_index(_resolve(index_dir))
        queries = gene.load_queries(_resolve(queries_path))
    except (OSError, FileNotFoundError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)
    usable = [q for q in queries if len(q) >= idx.cfg.k]
    if len(usable) < len(queries):
        click.echo(f"skipping {len(queries) - len(usable)} queries shorter than k", err=True)
    queries = usable
    early_exit = not (no_early_exit or fractions)
    config = {
        "command": "query",
        "index": str(index_dir),
        "queries": str(queries_path),
        "fractions": fractions,
        "early_exit": early_exit,
        "cfg": idx.cfg.to_dict(),
        "backend": backend_name(),
    }
    rows = []
    if isinstance(idx, BloomFilter):
        header = ["query_index", "is_member", "kmers_tested", "first_failing_kmer_index"]
        for qi, q in enumerate(queries):
            r = idx.query_sequence(q, early_exit=early_exit)
            ff = "" if r.first_failing_kmer_index is None else r.first_failing_kmer_index
            rows.append([qi, int(r.is_member), r.kmers_tested, ff])
    elif isinstance(idx, CobsIndex):
        header = ["query_index", "file_id", "is_member", "match_fraction"]
        for qi, q in enumerate(queries):
            res = idx.query(q, early_exit=early_exit, fractions=fractions)
            for fi, fid in enumerate(res.file_ids):
                frac = "" if res.fractions is None else repr(res.fractions[fi])
                rows.append([qi, fid, int(res.memberships[fi]), frac])
    else:
        header = ["query_index", "file_id", "is_candidate"]
        for qi, q in enumerate(queries):
            res = idx.query(q)
            for fi, fid in enumerate(res.file_ids):
                rows.append([qi, fid, int(res.memberships[fi])])
    _write_atomic(_resolve(out_path), _csv_text(config, header, rows))
    click.echo(f"wrote {len(rows)} result rows to {out_path}")


@main.command()
@click.option("--in", "input_path", required=True, type=click.Path())
@click.option("--queries", "queries_path", required=True, type=click.Path())
@click.option("--schemes", default="rh,idl", show_default=True, help="comma-separated scheme list")
@_cfg_options
@click.option("--out", "out_path", required=True, type=click.Path())
def bench(input_path, queries_path, schemes, k, t, log2_l, m, eta, seed, out_path):
    """Per-read index and query wall-clock per scheme (single thread).

    Timing columns are informational; correctness comparisons should use the
    query and simcache commands.
    """
    corpus = list(gene.parse_fastx(_resolve(input_path), min_run=k))
    queries = [q for q in gene.load_queries(_resolve(queries_path)) if len(q) >= k]
    if not corpus or not queries:
        raise click.ClickException("need non-empty corpus and queries")
    header = [
        "scheme", "k", "t", "l", "m", "eta", "base_seed", "reads", "queries",
        "index_seconds_per_read", "query_seconds_per_read",
    ]
    rows = []
    for scheme in schemes.split(","):
        cfg = _make_cfg(k, t, log2_l, m, eta, seed, scheme.strip())
        bf = BloomFilter(cfg)
        t0 = time.perf_counter()
        for s in corpus:
            bf.insert_sequence(s)
        index_dt = (time.perf_counter() - t0) / len(corpus)
        bf.freeze()
        t0 = time.perf_counter()
        for q in queries:
            bf.query_sequence(q, early_exit=False)
        query_dt = (time.perf_counter() - t0) / len(queries)
        rows.append(
            [scheme, k, t, cfg.l, m, eta, seed, len(corpus), len(queries), repr(index_dt), repr(query_dt)]
        )
    config = {
        "command": "bench", "input": str(input_path), "queries": str(queries_path),
        "k": k, "t": t, "l": 1 << log2_l, "m": m, "eta": eta, "base_seed": seed,
        "schemes": schemes, "backend": backend_name(), "threads": 1,
    }
    _write_atomic(_resolve(out_path), _csv_text(config, header, rows))
    click.echo(f"wrote bench rows to {out_path}")


@main.command()
@click.option("--in", "input_path", required=True, type=click.Path())
@click.option("--queries", "queries_path", required=True, type=click.Path())
@click.option("--schemes", default="minhash_only,idl,rh", show_default=True)
@_cfg_options
@click.option("--block-bytes", default=64, show_default=True)
@click.option("--l1-bytes", default=0, help="override level-1 capacity (default: 2MB scaled to m/2^30)")
@click.option("--l2-bytes", default=0, help="override level-2 capacity (default: 256MB scaled to m/2^30)")
@click.option("--out", "out_path", required=True, type=click.Path())
def simcache(input_path, queries_path, schemes, k, t, log2_l, m, eta, seed, block_bytes, l1_bytes, l2_bytes, out_path):
    """Trace filter bit reads per scheme and run the two-level LRU model."""
    corpus = list(gene.parse_fastx(_resolve(input_path), min_run=k))
    queries = [q for q in gene.load_queries(_resolve(queries_path)) if len(q) >= k]
    if not corpus or not queries:
        raise click.ClickException("need non-empty corpus and queries")
    base_cfg = _make_cfg(k, t, log2_l, m, eta, seed, "idl")
    if l1_bytes and l2_bytes:
        model = cachesim.CacheModel(l1_bytes=l1_bytes, l2_bytes=l2_bytes, block_bytes=block_bytes)
    else:
        model = cachesim.scaled_model(m, block_bytes=block_bytes)
    scheme_list = [HashScheme(s.strip()) for s in schemes.split(",")]
    rows = cachesim.compare_schemes(corpus, queries, base_cfg, schemes=scheme_list, model=model)
    config = {
        "command": "simcache", "input": str(input_path), "queries": str(queries_path),
        "cfg": base_cfg.to_dict(), "schemes": schemes, "block_bytes": model.block_bytes,
        "l1_bytes": model.l1_bytes, "l2_bytes": model.l2_bytes,
        "replacement": "lru_fully_associative_inclusive", "backend": backend_name(),
    }
    _write_atomic(_resolve(out_path), cachesim.rows_to_csv(rows, config))
    for row in rows:
        click.echo(
            f"{row.scheme}: l1_miss_rate={row.l1_miss_rate:.4f} "
            f"l2_miss_rate={row.l2_miss_rate:.4f} distinct_blocks={row.distinct_blocks}"
        )


@main.command()
@click.option("--m-list", default=None, help="comma list; default: the single --m value")
@click.option("--eta-list", default=None, help="comma list; default: the single --eta value")
@click.option("--log2-l-list", default=None, help="comma list; default: the single --log2-l value")
@_cfg_options
@click.option("--n", "n_kmers", default=0, help="inserted kmers for the bound (no-empirical mode)")
@click.option("--w1", default=0, help="similarity horizon (default k)")
@click.option("--w2", default=0, help="max similar kmers (default (k-t+1)^2)")
@click.option("--empirical", is_flag=True, help="also build filters over --in and measure the rate")
@click.option("--in", "input_path", default=None, type=click.Path())
@click.option("--negatives", default=2000, show_default=True, help="poisoned negatives for --empirical")
@click.option("--neg-seed", default=1, show_default=True)
@click.option("--out", "out_path", required=True, type=click.Path())
def bound(m_list, eta_list, log2_l_list, k, t, log2_l, m, eta, seed, n_kmers, w1, w2, empirical, input_path, negatives, neg_seed, out_path):
    """Evaluate the false-positive bound over a parameter sweep."""
    w1 = w1 or k
    w2 = w2 or analysis.gene_w2(k, t)
    ms = [int(x) for x in (m_list or str(m)).split(",")]
    etas = [int(x) for x in (eta_list or str(eta)).split(",")]
    lbits = [int(x) for x in (log2_l_list or str(log2_l)).split(",")]

    corpus = oracle = negs = None
    if empirical:
        if not input_path:
            raise click.ClickException("--empirical requires --in")
        corpus = list(gene.parse_fastx(_resolve(input_path), min_run=k))
        records = gene.gen_poisoned_queries(corpus, negatives, rng_seed=neg_seed)
        oracle = gene.ExactKmerIndex([s.bases for s in corpus], k)
        negs = [r.poisoned.bases for r in records if not oracle.is_subset(r.poisoned.bases)]
        if not negs:
            raise click.ClickException("no verified-negative queries could be generated")

    rows = []
    for mm in ms:
        for ee in etas:
            for lb in lbits:
                if not empirical:
                    rows.append(analysis.bound_csv_row(
                        analysis.BoundInputs(m=mm, eta=ee, l=1 << lb, n=n_kmers, w1=w1, w2=w2)))
                    continue
                cfg = _make_cfg(k, t, lb, mm, ee, seed, "idl")
                rep = analysis.bound_vs_empirical(corpus, cfg, negs, w1=w1, w2=w2, oracle=oracle)
                rows.append(analysis.report_csv_row(rep))
    config = {
        "command": "bound", "k": k, "t": t, "w1": w1, "w2": w2, "base_seed": seed,
        "m_list": ms, "eta_list": etas, "log2_l_list": lbits,
        "n": n_kmers, "empirical": empirical, "input": str(input_path),
        "negatives": negatives if empirical else None, "neg_seed": neg_seed if empirical else None,
        "backend": backend_name(),
    }
    _write_atomic(_resolve(out_path), _csv_text(config, analysis.CSV_COLUMNS, rows))
    click.echo(f"wrote {len(rows)} bound rows to {out_path}")


if __name__ == "__main__":
    main()
