import asyncio

import httpx
import pytest

from spix.service import create_app
from spix.synthetic import SyntheticSpec, generate, write_dataset


def call(path, payload):
    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(
            transport=transport, base_url="http://test", timeout=None
        ) as client:
            response = await client.post(path, json=payload)
            return response.status_code, response.json()

    return asyncio.run(go())


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("svc")
    spec = SyntheticSpec(seed=3, doc_count=300, vocab_size=500, query_count=12, cluster_size=6)
    paths = write_dataset(generate(spec), tmp)
    paths["dir"] = str(tmp)
    return paths


@pytest.fixture(scope="module")
def built_index(dataset):
    index_path = dataset["dir"] + "/idx.spix"
    status, body = call(
        "/build", {"corpus_path": dataset["corpus"], "output_path": index_path}
    )
    assert status == 200, body
    return index_path, body


def test_health():
    async def go():
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://t") as client:
            return (await client.get("/health")).json()

    body = asyncio.run(go())
    assert body["status"] == "ok"


def test_build_reports_stats(built_index):
    _, body = built_index
    assert body["doc_count"] == 300
    assert body["vocab_size"] > 0
    assert body["total_postings"] > 0


def test_stats_endpoint(built_index):
    index_path, build_body = built_index
    status, body = call("/stats", {"index_path": index_path})
    assert status == 200
    assert body["doc_count"] == build_body["doc_count"]
    assert body["total_postings"] == build_body["total_postings"]
    assert len(body["activation_histogram"]) == 10


def test_search_inline_and_to_file(dataset, built_index):
    index_path, _ = built_index
    payload = {
        "index_path": index_path,
        "queries_path": dataset["queries"],
        "top_n": 5,
    }
    status, body = call("/search", payload)
    assert status == 200
    assert body["query_count"] == 12
    assert len(body["results"]) == 12
    assert all(len(q["hits"]) <= 5 for q in body["results"])
    assert body["latency"] is not None

    out_path = dataset["dir"] + "/results.tsv"
    status, body = call("/search", {**payload, "output_path": out_path})
    assert status == 200
    assert body["results"] is None
    lines = open(out_path).read().splitlines()
    assert all(len(line.split("\t")) == 5 for line in lines)


def test_eval_endpoint(dataset, built_index):
    index_path, _ = built_index
    out_path = dataset["dir"] + "/results_eval.tsv"
    call(
        "/search",
        {
            "index_path": index_path,
            "queries_path": dataset["queries"],
            "output_path": out_path,
        },
    )
    status, body = call(
        "/eval",
        {
            "results_path": out_path,
            "judgments_path": dataset["judgments"],
            "embeddings_path": dataset["embeddings"],
        },
    )
    assert status == 200
    assert 0.0 <= body["mrr"] <= 1.0
    assert -1.0 <= body["sss"] <= 1.0
    assert body["judged_queries"] == 12


def test_flops_endpoint(dataset, built_index):
    index_path, _ = built_index
    status, body = call(
        "/flops", {"index_path": index_path, "queries_path": dataset["queries"]}
    )
    assert status == 200
    assert body["flops"] > 0.0
    assert body["query_count"] == 12


def test_sweep_endpoint(dataset):
    out_csv = dataset["dir"] + "/sweep.csv"
    status, body = call(
        "/sweep",
        {
            "corpus_path": dataset["corpus"],
            "queries_path": dataset["queries"],
            "judgments_path": dataset["judgments"],
            "embeddings_path": dataset["embeddings"],
            "output_csv": out_csv,
            "thresholds": [0.0, 0.5],
            "document_ks": [0, 6],
        },
    )
    assert status == 200
    assert len(body["rows"]) == 4
    assert open(out_csv).read().count("\n") == 5


def test_text_mode_build_and_search(tmp_path):
    corpus = tmp_path / "corpus.txt"
    corpus.write_text(
        "doc1\tred apples and green apples\n"
        "doc2\tgreen pears\n"
        "doc3\tred wine\n"
    )
    queries = tmp_path / "queries.txt"
    queries.write_text("q1\tred apples\n")
    index_path = str(tmp_path / "idx.spix")
    status, body = call(
        "/build",
        {"corpus_path": str(corpus), "output_path": index_path, "mode": "text"},
    )
    assert status == 200
    assert body["doc_count"] == 3

    status, body = call(
        "/search",
        {"index_path": index_path, "queries_path": str(queries), "mode": "text"},
    )
    assert status == 200
    hits = body["results"][0]["hits"]
    assert hits[0]["external_id"] == "doc1"
    assert hits[0]["matched_terms"] == 2


def test_losses_selftest_endpoint():
    status, body = call("/losses/selftest", {"seed": 1, "instances": 2, "sizes": [[2, 4]]})
    assert status == 200
    assert body["passed"] is True


def test_synthetic_endpoint(tmp_path):
    status, body = call(
        "/synthetic",
        {"out_dir": str(tmp_path), "seed": 5, "doc_count": 50, "vocab_size": 80,
         "query_count": 4, "cluster_size": 3},
    )
    assert status == 200
    assert body["doc_count"] == 50
    assert (tmp_path / "corpus.tsv").exists()


class TestErrorMapping:
    def test_missing_file_is_400(self):
        status, body = call("/stats", {"index_path": "/nonexistent/idx.spix"})
        assert status == 400
        assert body["kind"] == "FileNotFound"

    def test_bad_magic_is_400_with_kind(self, dataset):
        status, body = call("/stats", {"index_path": dataset["corpus"]})
        assert status == 400
        assert body["kind"] == "BadMagicError"

    def test_validation_error_is_422(self):
        status, _ = call("/search", {"index_path": "x"})  # queries_path missing
        assert status == 422

    def test_malformed_corpus_line_is_400(self, dataset, tmp_path):
        bad = tmp_path / "bad.tsv"
        bad.write_text("only_an_id_no_tab\n")
        status, body = call(
            "/build", {"corpus_path": str(bad), "output_path": str(tmp_path / "o")}
        )
        assert status == 400
        assert "line 1" in body["detail"]
