"""Pruning/threshold sweep: one row per (document_k, query_k, threshold) cell.

For every document_k a pruned index is materialized through the save/load
path (static pruning produces a real artifact, and the sweep exercises
persistence for free). Query pruning and thresholding are search-time
parameters. Effectiveness (MRR, SSS), the FLOPS estimate, and candidate
counts are deterministic for fixed inputs; latency is measured wall-clock
and is the one column excluded from reproducibility guarantees.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .batch import run_queries
from .errors import DataError
from .index import ImpactIndex, Vocabulary, build_index, prune_index
from .metrics import EmbeddingStore, Judgments, flops_estimate, mrr_at_k, sss_at_k
from .retrieval import SearchParams, select_query_terms
from .sparse import SparseVector
from .storage import load_index, save_index

CSV_COLUMNS = (
    "document_k",
    "query_k",
    "threshold",
    "mrr",
    "sss",
    "flops",
    "mean_candidates_pre",
    "mean_candidates_post",
    "mean_latency_s",
)


@dataclass(frozen=True)
class SweepSpec:
    document_ks: tuple[int, ...] = (0,)
    query_ks: tuple[int, ...] = (0,)
    thresholds: tuple[float, ...] = (0.0, 0.2, 0.4, 0.6, 0.8)
    top_n: int = 10
    repetitions: int = 1

    def __post_init__(self):
        if not self.document_ks or not self.query_ks or not self.thresholds:
            raise DataError("document_ks, query_ks and thresholds must be non-empty")
        if any(k < 0 for k in self.document_ks) or any(k < 0 for k in self.query_ks):
            raise DataError("document_k and query_k values must be >= 0")
        if any(not 0.0 <= t <= 1.0 for t in self.thresholds):
            raise DataError("thresholds must lie in [0, 1]")
        if self.top_n < 1 or self.repetitions < 1:
            raise DataError("top_n and repetitions must be >= 1")


@dataclass(frozen=True)
class SweepRow:
    document_k: int
    query_k: int
    threshold: float
    mrr: float
    sss: float | None
    flops: float
    mean_candidates_pre: float
    mean_candidates_post: float
    mean_latency_s: float
    rep_mean_latency_s: tuple[float, ...]  # per repetition; not part of the CSV

    def csv_fields(self) -> list[str]:
        sss = "" if self.sss is None else repr(self.sss)
        return [
            str(self.document_k),
            str(self.query_k),
            repr(self.threshold),
            repr(self.mrr),
            sss,
            repr(self.flops),
            repr(self.mean_candidates_pre),
            repr(self.mean_candidates_post),
            repr(self.mean_latency_s),
        ]


def rows_to_csv(rows: Sequence[SweepRow]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    lines.extend(",".join(row.csv_fields()) for row in rows)
    return "\n".join(lines) + "\n"


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def run_sweep(
    corpus: Sequence[tuple[str, SparseVector, int]],
    vocab: Vocabulary | None,
    queries: Sequence[tuple[str, SparseVector]],
    judgments: Judgments,
    embeddings: EmbeddingStore | None,
    spec: SweepSpec,
    workers: int = 1,
    sss_aggregate: str = "max",
    work_dir: str | None = None,
) -> list[SweepRow]:
    """Evaluate the full (document_k, query_k, threshold) grid.

    Rows come out in grid order: document_ks outermost, thresholds
    innermost. Metrics are computed at k = spec.top_n.
    """
    base = build_index(corpus, vocab=vocab)
    rows: list[SweepRow] = []
    with tempfile.TemporaryDirectory(prefix="spix-sweep-", dir=work_dir) as tmp:
        for dk in spec.document_ks:
            pruned = base if dk == 0 else prune_index(base, dk)
            index_path = Path(tmp) / f"index_dk{dk}.spix"
            save_index(pruned, index_path)
            index = load_index(index_path)
            for qk in spec.query_ks:
                pruned_queries = [(qid, select_query_terms(v, qk)) for qid, v in queries]
                flops = flops_estimate(index, [v for _, v in pruned_queries])
                for threshold in spec.thresholds:
                    params = SearchParams(
                        top_n=spec.top_n, query_k=qk, threshold=threshold
                    )
                    rep_means: list[float] = []
                    first = None
                    for _ in range(spec.repetitions):
                        outcome = run_queries(index, queries, params, workers=workers)
                        if first is None:
                            first = outcome
                        rep_means.append(_mean(outcome.run.latencies.values()))
                    run = first.run
                    sss = (
                        sss_at_k(run, judgments, embeddings, spec.top_n, sss_aggregate)
                        if embeddings is not None
                        else None
                    )
                    rows.append(
                        SweepRow(
                            document_k=dk,
                            query_k=qk,
                            threshold=threshold,
                            mrr=mrr_at_k(run, judgments, spec.top_n),
                            sss=sss,
                            flops=flops,
                            mean_candidates_pre=_mean(run.candidates_pre.values()),
                            mean_candidates_post=_mean(run.candidates_post.values()),
                            mean_latency_s=_mean(rep_means),
                            rep_mean_latency_s=tuple(rep_means),
                        )
                    )
    return rows
