"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with ``pytest tests/test_acceptance.py -s`` to see them).

Tolerances are pinned here and nowhere else. Oracles are the independent
implementations in tests/oracles.py.
"""

import math
import struct
import time

import numpy as np
import pytest

from spix import (
    CollectionStats,
    SearchParams,
    SweepSpec,
    bm25_doc_vector,
    bm25_query_vector,
    dot,
    flops_estimate,
    formats,
    from_pairs,
    load_index,
    mrr_at_k,
    plan_query,
    prune_index,
    retrieve_candidates,
    run_sweep,
    save_index,
    search,
    select_query_terms,
    sss_at_k,
    threshold_filter,
)
from spix.cli import main as cli_main
from spix.errors import (
    BadMagicError,
    ChecksumMismatchError,
    TruncatedFileError,
)
from spix.losses import gradient_selftest, in_batch_loss
from spix.metrics import EmbeddingStore, Judgments, RunResults
from spix.storage import index_from_bytes, index_to_bytes
from spix.synthetic import SyntheticSpec, generate, write_dataset

from conftest import index_from_oracle_corpus
from oracles import (
    brute_force_top_n,
    classic_bm25_scores,
    conjunctive_top_n,
    flops_loss_direct,
    in_batch_loss_direct,
    joint_flops_loss_direct,
    pair_intersection_flops,
    random_corpus,
    random_query,
)
from test_bm25 import random_token_corpus


def report(criterion: str, passed: bool = True) -> None:
    print(f"\n{'PASS' if passed else 'FAIL'}  {criterion}")
    assert passed


def as_vector(query: dict[int, float]):
    return from_pairs(sorted(query.items()))


def test_criterion_1_brute_force_equivalence():
    """search(threshold=0, qk=0, top_n=10) matches the exhaustive oracle."""
    start = time.monotonic()
    rng = np.random.default_rng(1001)
    trials = 100
    for trial in range(trials):
        doc_count = int(rng.integers(1, 1001)) if trial % 5 == 0 else int(rng.integers(1, 250))
        vocab_size = int(rng.integers(5, 501))
        corpus = random_corpus(rng, doc_count, vocab_size, max_terms=15)
        index = index_from_oracle_corpus(corpus, vocab_size)
        for _ in range(3):
            query = random_query(rng, vocab_size, max_terms=20)
            results, _ = search(index, as_vector(query), SearchParams(top_n=10))
            expected = brute_force_top_n(corpus, query, 10)
            assert [r.external_id for r in results] == [d for d, _ in expected], (
                f"trial {trial}: doc id mismatch"
            )
            for r, (_, score) in zip(results, expected):
                assert abs(r.score - score) <= 1e-6 * max(abs(score), 1e-30)
    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"took {elapsed:.1f}s"
    report(f"criterion 1: brute-force equivalence, {trials} trials in {elapsed:.1f}s")


def test_criterion_2_threshold_semantics():
    """Nested candidate sets, non-increasing counts, exact conjunction at 1.0."""
    rng = np.random.default_rng(1002)
    thresholds = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    conjunctive_checked = 0
    for trial in range(30):
        corpus = random_corpus(rng, int(rng.integers(5, 150)), 20, 9)
        index = index_from_oracle_corpus(corpus, 20)
        for _ in range(3):
            query = random_query(rng, 20, 6)
            survivor_sets = []
            for threshold in thresholds:
                plan = plan_query(as_vector(query), SearchParams(threshold=threshold), index)
                table = threshold_filter(retrieve_candidates(index, plan), plan)
                survivor_sets.append(set(table.ordinals.tolist()))
            for lower, higher in zip(survivor_sets, survivor_sets[1:]):
                assert higher <= lower
            counts = [len(s) for s in survivor_sets]
            assert counts == sorted(counts, reverse=True)

            results, _ = search(index, as_vector(query), SearchParams(threshold=1.0))
            expected = conjunctive_top_n(corpus, query, 10)
            assert [r.external_id for r in results] == [d for d, _ in expected]
            conjunctive_checked += len(expected)
    assert conjunctive_checked > 0
    report("criterion 2: threshold nesting + conjunctive oracle at threshold=1.0")


def test_criterion_3_pruning_identities():
    """Pruning no-ops and monotonicity over 100 randomized trials."""
    rng = np.random.default_rng(1003)
    for trial in range(100):
        corpus = random_corpus(rng, int(rng.integers(1, 60)), 40, 10)
        index = index_from_oracle_corpus(corpus, 40)

        max_terms = int(index.term_counts.max()) if index.doc_count else 1
        assert prune_index(index, max_terms + int(rng.integers(0, 4))) == index

        query = as_vector(random_query(rng, 40, 8))
        unpruned, _ = search(index, query, SearchParams())
        relaxed, _ = search(
            index, query, SearchParams(query_k=len(query) + int(rng.integers(0, 5)))
        )
        assert unpruned == relaxed

        k1 = int(rng.integers(1, 6))
        k2 = int(rng.integers(k1, 11))
        small, large = prune_index(index, k1), prune_index(index, k2)
        for t in range(index.vocab_size):
            assert set(small.posting_docs[t].tolist()) <= set(large.posting_docs[t].tolist())
    report("criterion 3: pruning identities and monotonicity, 100 trials")


def test_criterion_4_loss_kernel():
    """Closed forms, naive-loop oracles, gradient checks, stability."""
    for n in (1, 2, 3, 10):
        assert abs(in_batch_loss(np.full((n, n), 2.3)) - math.log(n)) < 1e-9

    rng = np.random.default_rng(1004)
    from spix import flops_loss, joint_flops_loss

    for _ in range(20):
        s = rng.uniform(-2, 4, (4, 4))
        assert abs(in_batch_loss(s) - in_batch_loss_direct(s)) <= 1e-12 * max(1.0, abs(in_batch_loss_direct(s)))
        r = rng.uniform(0, 5, (5, 7))
        assert abs(flops_loss(r) - flops_loss_direct(r)) <= 1e-12 * max(1.0, flops_loss_direct(r))
        q, d = rng.uniform(0, 5, (4, 6)), rng.uniform(0, 5, (6, 6))
        expected = joint_flops_loss_direct(q, d)
        assert abs(joint_flops_loss(q, d) - expected) <= 1e-12 * max(1.0, expected)

    checks = gradient_selftest(seed=1004, sizes=((3, 8), (5, 12)), instances=25,
                               eps=1e-5, tolerance=1e-5)
    for check in checks:
        assert check.passed, f"{check.name}: {check.max_error:.3e}"

    big = np.random.default_rng(7).uniform(-1e4, 1e4, (6, 6))
    assert math.isfinite(in_batch_loss(big))
    report("criterion 4: loss kernel values, gradients (50 instances each), stability")


def test_criterion_5_flops_estimator():
    """Exact vs pair-intersection oracle; rescaling invariance; strict
    decrease when pruning removes activated terms."""
    rng = np.random.default_rng(1005)
    for _ in range(25):
        corpus = random_corpus(rng, int(rng.integers(1, 201)), 30, 10)
        queries = [random_query(rng, 30, 8) for _ in range(int(rng.integers(1, 201)))]
        index = index_from_oracle_corpus(corpus, 30)
        got = flops_estimate(index, [as_vector(q) for q in queries])
        expected = float(pair_intersection_flops(
            [set(w) for _, w in corpus], [set(q) for q in queries]
        ))
        assert abs(got - expected) < 1e-12

        scale_docs = [(d, {t: w * 123.0 for t, w in ws.items()}) for d, ws in corpus]
        scale_queries = [as_vector({t: w * 0.007 for t, w in q.items()}) for q in queries]
        rescaled = flops_estimate(index_from_oracle_corpus(scale_docs, 30), scale_queries)
        assert rescaled == pytest.approx(got, rel=1e-12)

    strict_checked = 0
    for _ in range(20):
        corpus = random_corpus(rng, 40, 25, 10)
        index = index_from_oracle_corpus(corpus, 25)
        full_query = [from_pairs([(t, 1.0) for t in range(25)])]  # activates every term
        base = flops_estimate(index, full_query)
        k = int(rng.integers(1, 8))
        pruned = prune_index(index, k)
        if pruned.total_postings < index.total_postings:
            assert flops_estimate(pruned, full_query) < base
            strict_checked += 1
        multi = [as_vector(random_query(rng, 25, 10)) for _ in range(10)]
        wide = flops_estimate(index, multi)
        narrowed = [select_query_terms(q, 2) for q in multi]
        if sum(len(q) for q in narrowed) < sum(len(q) for q in multi):
            assert flops_estimate(index, narrowed) < wide
            strict_checked += 1
    assert strict_checked >= 30
    report("criterion 5: FLOPS estimator vs exhaustive oracle, invariances")


def test_criterion_6_metrics_hand_scenarios():
    """Three constructed scenarios with hand-computed MRR/SSS."""
    inv_sqrt2 = 1.0 / math.sqrt(2.0)
    store = EmbeddingStore({
        "g1": np.array([1.0, 0.0]),
        "g2": np.array([0.0, 1.0]),
        "mix": np.array([inv_sqrt2, inv_sqrt2]),
        "anti": np.array([0.0, -1.0]),
    })

    # scenario A: upper bound, retrieved == truth, every rank-1 relevant
    run = RunResults(ranked={"q1": [("g1", 2.0)], "q2": [("g2", 1.0)]})
    judgments = Judgments({"q1": ["g1"], "q2": ["g2"]})
    assert mrr_at_k(run, judgments, 10) == 1.0
    assert abs(sss_at_k(run, judgments, store, 10) - 1.0) < 1e-9

    # scenario B: first relevant at rank 3 for q1, none in top-10 for q2
    run = RunResults(ranked={
        "q1": [("mix", 3.0), ("anti", 2.5), ("g1", 2.0)],
        "q2": [("anti", 1.0)],
    })
    judgments = Judgments({"q1": ["g1"], "q2": ["g2"]})
    assert mrr_at_k(run, judgments, 10) == (1.0 / 3.0 + 0.0) / 2
    # q1 docs vs truth g1: mix=inv_sqrt2, anti=0, g1=1; q2: anti vs g2 = -1
    expected = ((inv_sqrt2 + 0.0 + 1.0) / 3.0 + (-1.0) / 1.0) / 2.0
    assert abs(sss_at_k(run, judgments, store, 10) - expected) < 1e-9

    # scenario C: empty retrieval contributes zero; max over two truths
    run = RunResults(ranked={"q1": [("mix", 1.0), ("g2", 0.5)], "q2": []})
    judgments = Judgments({"q1": ["g1", "g2"], "q2": ["g1"]})
    assert mrr_at_k(run, judgments, 10) == (1.0 / 2.0 + 0.0) / 2
    expected = ((max(inv_sqrt2, inv_sqrt2) + max(0.0, 1.0)) / 2.0 + 0.0) / 2.0
    assert abs(sss_at_k(run, judgments, store, 10) - expected) < 1e-9
    report("criterion 6: MRR/SSS hand-computed scenarios (bounds, empty retrieval)")


def test_criterion_7_bm25_equivalence():
    """Dot products over BM25-transformed vectors vs textbook BM25."""
    rng = np.random.default_rng(1007)
    compared = 0
    for _ in range(50):
        docs = random_token_corpus(rng, int(rng.integers(1, 12)), vocab=15, max_len=10)
        stats = CollectionStats.from_tokenized(docs, k1=1.2, b=0.75)
        doc_vecs = [bm25_doc_vector(d, stats) for d in docs]
        query = random_token_corpus(rng, 1, vocab=15, max_len=5)[0]
        qvec = bm25_query_vector(query, stats)
        for dvec, expected in zip(doc_vecs, classic_bm25_scores(query, docs, 1.2, 0.75)):
            got = dot(qvec, dvec)
            assert abs(got - expected) <= 1e-9 * max(abs(expected), 1e-12)
            compared += 1
    assert compared >= 50
    report("criterion 7: BM25 dot-product scoring vs independent implementation")


def test_criterion_8_trend_shape(tmp_path):
    """Threshold sweep on a 50k-doc synthetic corpus reproduces the
    efficiency/effectiveness trade-off shapes."""
    start = time.monotonic()
    spec = SyntheticSpec(seed=42, doc_count=50_000, vocab_size=20_000,
                         query_count=200, cluster_size=16)
    paths = write_dataset(generate(spec), tmp_path)
    records, vocab = formats.read_vector_corpus(paths["corpus"])
    queries = formats.read_vector_queries(paths["queries"], vocab)
    judgments = formats.read_judgments(paths["judgments"])
    embeddings = formats.read_embeddings(paths["embeddings"])

    rows = run_sweep(
        records, vocab, queries, judgments, embeddings,
        SweepSpec(thresholds=(0.0, 0.2, 0.4, 0.6, 0.8), repetitions=10),
    )

    post = [r.mean_candidates_post for r in rows]
    assert post == sorted(post, reverse=True), f"(a) candidate counts rose: {post}"

    sss = [r.sss for r in rows]
    for i in range(1, 4):
        assert sss[i + 1] <= sss[i] + 0.01, f"(b) SSS rose at step {i}: {sss}"

    wins = sum(
        1 for high, low in zip(rows[4].rep_mean_latency_s, rows[0].rep_mean_latency_s)
        if high < low
    )
    assert wins >= 8, f"(c) threshold-0.8 faster in only {wins}/10 runs"

    elapsed = time.monotonic() - start
    assert elapsed < 600.0, f"took {elapsed:.1f}s"
    report(
        "criterion 8: trend shapes on 50k docs "
        f"(sss {' -> '.join(f'{x:.3f}' for x in sss)}; latency wins {wins}/10; {elapsed:.0f}s)"
    )


def test_criterion_9_persistence(tmp_path):
    """100 random indexes round-trip bit-exactly; corruption raises."""
    rng = np.random.default_rng(1009)
    for trial in range(100):
        corpus = random_corpus(rng, int(rng.integers(0, 50)), 30, 8)
        index = index_from_oracle_corpus(corpus, 30)
        path = tmp_path / f"i{trial}.spix"
        save_index(index, path)
        loaded = load_index(path)
        assert loaded == index
        assert index_to_bytes(loaded) == path.read_bytes()[:]

    data = index_to_bytes(index_from_oracle_corpus(random_corpus(rng, 10, 20, 6), 20))
    bad_magic = b"XXXX" + data[4:]
    with pytest.raises(BadMagicError):
        index_from_bytes(bad_magic)
    with pytest.raises(TruncatedFileError):
        index_from_bytes(data[: len(data) // 2])
    corrupted = bytearray(data)
    corrupted[-1] ^= 0x55
    with pytest.raises(ChecksumMismatchError):
        index_from_bytes(bytes(corrupted))
    report("criterion 9: persistence round-trips and corruption errors")


def test_criterion_10_sweep_determinism(tmp_path):
    """Identical seeds, different worker counts: byte-identical CSVs
    (latency columns excluded)."""
    assert cli_main([
        "gen-synthetic", str(tmp_path / "data"), "--seed", "77",
        "--doc-count", "600", "--vocab-size", "900", "--query-count", "20",
        "--cluster-size", "6",
    ]) == 0
    data = tmp_path / "data"
    base = [
        "sweep", str(data / "corpus.tsv"), str(data / "queries.tsv"),
        str(data / "judgments.tsv"),
    ]
    tail = [
        "--embeddings", str(data / "embeddings.tsv"),
        "--document-ks", "0,8", "--query-ks", "0,4",
        "--thresholds", "0,0.2,0.4,0.6,0.8", "--repetitions", "2",
    ]
    csv1, csv4 = tmp_path / "w1.csv", tmp_path / "w4.csv"
    assert cli_main(base + [str(csv1)] + tail + ["--workers", "1"]) == 0
    assert cli_main(base + [str(csv4)] + tail + ["--workers", "4"]) == 0

    def without_latency(path):
        lines = path.read_text().splitlines()
        header = lines[0].split(",")
        keep = [i for i, name in enumerate(header) if "latency" not in name]
        return "\n".join(",".join(line.split(",")[i] for i in keep) for line in lines)

    text1, text4 = without_latency(csv1), without_latency(csv4)
    assert text1.encode() == text4.encode()
    assert len(text1.splitlines()) == 1 + 2 * 2 * 5
    report("criterion 10: sweep CSVs byte-identical across worker counts")
