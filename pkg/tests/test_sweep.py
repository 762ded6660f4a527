import pytest

from spix import SearchParams, SweepSpec, build_index, formats, mrr_at_k, run_sweep, sss_at_k
from spix.batch import run_queries
from spix.errors import DataError
from spix.sweep import CSV_COLUMNS, rows_to_csv
from spix.synthetic import SyntheticSpec, generate, write_dataset


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("sweepdata")
    spec = SyntheticSpec(seed=13, doc_count=500, vocab_size=800, query_count=25, cluster_size=8)
    paths = write_dataset(generate(spec), tmp)
    records, vocab = formats.read_vector_corpus(paths["corpus"])
    queries = formats.read_vector_queries(paths["queries"], vocab)
    judgments = formats.read_judgments(paths["judgments"])
    embeddings = formats.read_embeddings(paths["embeddings"])
    return records, vocab, queries, judgments, embeddings


def test_degenerate_grid_single_row(dataset):
    records, vocab, queries, judgments, embeddings = dataset
    spec = SweepSpec(document_ks=(0,), query_ks=(0,), thresholds=(0.0,))
    rows = run_sweep(records, vocab, queries, judgments, embeddings, spec)
    assert len(rows) == 1
    row = rows[0]
    assert (row.document_k, row.query_k, row.threshold) == (0, 0, 0.0)


def test_grid_size_and_order(dataset):
    records, vocab, queries, judgments, _ = dataset
    spec = SweepSpec(
        document_ks=(0, 10),
        query_ks=(0, 5, 7),
        thresholds=(0.0, 0.2, 0.4, 0.6, 0.8),
    )
    rows = run_sweep(records, vocab, queries, judgments, None, spec)
    assert len(rows) == 30
    cells = [(r.document_k, r.query_k, r.threshold) for r in rows]
    expected = [
        (dk, qk, t)
        for dk in (0, 10)
        for qk in (0, 5, 7)
        for t in (0.0, 0.2, 0.4, 0.6, 0.8)
    ]
    assert cells == expected
    assert all(r.sss is None for r in rows)


def test_candidate_counts_non_increasing_across_thresholds(dataset):
    records, vocab, queries, judgments, embeddings = dataset
    spec = SweepSpec(thresholds=(0.0, 0.2, 0.4, 0.6, 0.8))
    rows = run_sweep(records, vocab, queries, judgments, embeddings, spec)
    post = [r.mean_candidates_post for r in rows]
    assert post == sorted(post, reverse=True)
    pre = {r.mean_candidates_pre for r in rows}
    assert len(pre) == 1  # pre-filter counts don't depend on the threshold


def test_baseline_row_matches_standalone_run(dataset):
    records, vocab, queries, judgments, embeddings = dataset
    spec = SweepSpec(document_ks=(0,), query_ks=(0,), thresholds=(0.0,))
    row = run_sweep(records, vocab, queries, judgments, embeddings, spec)[0]
    index = build_index(records, vocab=vocab)
    outcome = run_queries(index, queries, SearchParams(top_n=10))
    assert row.mrr == mrr_at_k(outcome.run, judgments, 10)
    assert row.sss == sss_at_k(outcome.run, judgments, embeddings, 10)


def test_csv_shape_and_columns(dataset):
    records, vocab, queries, judgments, embeddings = dataset
    spec = SweepSpec(document_ks=(0, 5), thresholds=(0.0, 0.4))
    rows = run_sweep(records, vocab, queries, judgments, embeddings, spec)
    text = rows_to_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + len(rows)
    assert all(len(line.split(",")) == len(CSV_COLUMNS) for line in lines)


def test_repetitions_recorded(dataset):
    records, vocab, queries, judgments, _ = dataset
    spec = SweepSpec(document_ks=(0,), query_ks=(0,), thresholds=(0.0,), repetitions=3)
    row = run_sweep(records, vocab, queries, judgments, None, spec)[0]
    assert len(row.rep_mean_latency_s) == 3
    assert row.mean_latency_s == pytest.approx(sum(row.rep_mean_latency_s) / 3)


def test_spec_validation():
    with pytest.raises(DataError):
        SweepSpec(thresholds=())
    with pytest.raises(DataError):
        SweepSpec(thresholds=(1.5,))
    with pytest.raises(DataError):
        SweepSpec(document_ks=(-1,))
