"""FastAPI service wrapping the retrieval engine.

Endpoints operate on server-local files (the CLI runs this app in-process
by default, so "server-local" is simply local). Loaded indexes are cached
by (path, mtime, size); everything else is stateless.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, bm25, formats
from ..batch import run_queries
from ..errors import DataError
from ..index import ImpactIndex, build_index, index_stats
from ..losses import gradient_selftest
from ..metrics import flops_estimate, latency_stats, mrr_at_k, sss_at_k
from ..retrieval import SearchParams
from ..storage import load_index, save_index
from ..sweep import SweepSpec, rows_to_csv, run_sweep
from ..synthetic import SyntheticSpec, generate, write_dataset
from . import schemas


@lru_cache(maxsize=8)
def _cached_index(path: str, mtime_ns: int, size: int) -> ImpactIndex:
    return load_index(path)


def _get_index(path: str) -> ImpactIndex:
    st = Path(path).stat()
    return _cached_index(str(Path(path).resolve()), st.st_mtime_ns, st.st_size)


def _read_corpus(path: str, mode: str, k1: float, b: float):
    """Returns (records, vocab) ready for build_index."""
    if mode == "vector":
        return formats.read_vector_corpus(path)
    docs = formats.read_text_corpus(path)
    stats = bm25.CollectionStats.from_tokenized((t for _, t in docs), k1=k1, b=b)
    records = [
        (ext_id, bm25.bm25_doc_vector(tokens, stats), len(tokens))
        for ext_id, tokens in docs
    ]
    return records, stats.vocab


def _read_queries(path: str, mode: str, index: ImpactIndex, k1: float, b: float):
    if mode == "vector":
        return formats.read_vector_queries(path, index.vocab)
    stats = bm25.CollectionStats.from_index(index, k1=k1, b=b)
    return [
        (qid, bm25.bm25_query_vector(tokens, stats))
        for qid, tokens in formats.read_text_queries(path)
    ]


def create_app() -> FastAPI:
    app = FastAPI(title="spix", version=__version__)

    @app.exception_handler(DataError)
    async def data_error_handler(request: Request, exc: DataError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "kind": type(exc).__name__},
        )

    @app.exception_handler(FileNotFoundError)
    async def missing_file_handler(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=400,
            content={"detail": str(exc), "kind": "FileNotFound"},
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/build", response_model=schemas.BuildResponse)
    def build(req: schemas.BuildRequest):
        records, vocab = _read_corpus(req.corpus_path, req.mode, req.k1, req.b)
        index = build_index(records, vocab=vocab, document_k=req.document_k)
        save_index(index, req.output_path)
        return schemas.BuildResponse(
            output_path=req.output_path,
            doc_count=index.doc_count,
            vocab_size=index.vocab_size,
            total_postings=index.total_postings,
        )

    @app.post("/stats", response_model=schemas.StatsResponse)
    def stats(req: schemas.StatsRequest):
        report = index_stats(_get_index(req.index_path))
        return schemas.StatsResponse(**report.to_dict())

    @app.post("/search", response_model=schemas.SearchResponse)
    def search_batch(req: schemas.SearchRequest):
        index = _get_index(req.index_path)
        queries = _read_queries(req.queries_path, req.mode, index, req.k1, req.b)
        params = SearchParams(
            top_n=req.top_n, query_k=req.query_k, threshold=req.threshold
        )
        outcome = run_queries(index, queries, params, workers=req.workers)

        ordered = [
            (qid, [(h.external_id, h.score, h.matched_terms) for h in outcome.hits[qid]])
            for qid, _ in queries
        ]
        results = None
        if req.output_path is not None:
            formats.save_text(
                req.output_path, lambda fh: formats.write_results(fh, ordered)
            )
        else:
            results = [
                schemas.QueryHits(
                    query_id=qid,
                    hits=[
                        schemas.Hit(
                            rank=i + 1,
                            external_id=ext,
                            score=score,
                            matched_terms=matched,
                        )
                        for i, (ext, score, matched) in enumerate(hits)
                    ],
                )
                for qid, hits in ordered
            ]
        latency = None
        if outcome.run.latencies:
            latency = schemas.LatencySummary(
                **latency_stats(list(outcome.run.latencies.values())).to_dict()
            )
        return schemas.SearchResponse(
            results=results,
            warnings=[
                schemas.QueryWarning(query_id=qid, reason=reason)
                for qid, reason in outcome.warnings
            ],
            latency=latency,
            query_count=len(queries),
            output_path=req.output_path,
        )

    @app.post("/eval", response_model=schemas.EvalResponse)
    def evaluate(req: schemas.EvalRequest):
        run = formats.read_results(req.results_path)
        judgments = formats.read_judgments(req.judgments_path)
        mrr = mrr_at_k(run, judgments, req.k)
        sss = None
        if req.embeddings_path is not None:
            store = formats.read_embeddings(req.embeddings_path)
            sss = sss_at_k(run, judgments, store, req.k, req.sss_aggregate)
        if req.csv_path is not None:
            header = f"k,mrr,sss\n{req.k},{mrr!r},{'' if sss is None else repr(sss)}\n"
            formats.save_text(req.csv_path, lambda fh: fh.write(header))
        return schemas.EvalResponse(
            k=req.k,
            mrr=mrr,
            sss=sss,
            judged_queries=len(judgments),
            csv_path=req.csv_path,
        )

    @app.post("/flops", response_model=schemas.FlopsResponse)
    def flops(req: schemas.FlopsRequest):
        index = _get_index(req.index_path)
        queries = _read_queries(req.queries_path, req.mode, index, bm25.DEFAULT_K1, bm25.DEFAULT_B)
        value = flops_estimate(index, [v for _, v in queries])
        return schemas.FlopsResponse(flops=value, query_count=len(queries))

    @app.post("/sweep", response_model=schemas.SweepResponse)
    def sweep(req: schemas.SweepRequest):
        records, vocab = _read_corpus(req.corpus_path, req.mode, req.k1, req.b)
        if req.mode == "vector":
            queries = formats.read_vector_queries(req.queries_path, vocab)
        else:
            stats = bm25.CollectionStats.from_index(
                build_index(records, vocab=vocab), req.k1, req.b
            )
            queries = [
                (qid, bm25.bm25_query_vector(tokens, stats))
                for qid, tokens in formats.read_text_queries(req.queries_path)
            ]
        judgments = formats.read_judgments(req.judgments_path)
        embeddings = (
            formats.read_embeddings(req.embeddings_path)
            if req.embeddings_path is not None
            else None
        )
        spec = SweepSpec(
            document_ks=tuple(req.document_ks),
            query_ks=tuple(req.query_ks),
            thresholds=tuple(req.thresholds),
            top_n=req.top_n,
            repetitions=req.repetitions,
        )
        rows = run_sweep(
            records, vocab, queries, judgments, embeddings, spec, workers=req.workers
        )
        formats.save_text(req.output_csv, lambda fh: fh.write(rows_to_csv(rows)))
        return schemas.SweepResponse(
            rows=[
                schemas.SweepRowModel(
                    document_k=r.document_k,
                    query_k=r.query_k,
                    threshold=r.threshold,
                    mrr=r.mrr,
                    sss=r.sss,
                    flops=r.flops,
                    mean_candidates_pre=r.mean_candidates_pre,
                    mean_candidates_post=r.mean_candidates_post,
                    mean_latency_s=r.mean_latency_s,
                    rep_mean_latency_s=list(r.rep_mean_latency_s),
                )
                for r in rows
            ],
            output_csv=req.output_csv,
        )

    @app.post("/losses/selftest", response_model=schemas.SelftestResponse)
    def losses_selftest(req: schemas.SelftestRequest):
        checks = gradient_selftest(
            seed=req.seed,
            sizes=tuple((n, v) for n, v in req.sizes),
            instances=req.instances,
        )
        return schemas.SelftestResponse(
            checks=[
                schemas.SelftestCheckModel(
                    name=c.name,
                    max_error=c.max_error,
                    tolerance=c.tolerance,
                    passed=c.passed,
                )
                for c in checks
            ],
            passed=all(c.passed for c in checks),
        )

    @app.post("/synthetic", response_model=schemas.SyntheticResponse)
    def synthetic(req: schemas.SyntheticRequest):
        spec = SyntheticSpec(
            seed=req.seed,
            doc_count=req.doc_count,
            vocab_size=req.vocab_size,
            query_count=req.query_count,
            doc_len_min=req.doc_len_min,
            doc_len_max=req.doc_len_max,
            cluster_size=req.cluster_size,
            query_len_min=req.query_len_min,
            query_len_max=req.query_len_max,
            query_noise_max=req.query_noise_max,
            zipf_exponent=req.zipf_exponent,
            embedding_dim=req.embedding_dim,
        )
        data = generate(spec)
        paths = write_dataset(data, req.out_dir)
        return schemas.SyntheticResponse(
            corpus=paths["corpus"],
            queries=paths["queries"],
            judgments=paths["judgments"],
            embeddings=paths["embeddings"],
            doc_count=len(data.docs),
            query_count=len(data.queries),
        )

    return app
