"""Batch query execution over an immutable index.

Queries may be evaluated by a thread pool; results are aggregated in input
(query-id) order, so output is identical for any worker count. Per-query
wall-clock latency and candidate counts are recorded for the metrics layer.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

from .errors import EmptyQueryError
from .index import ImpactIndex
from .metrics import RunResults
from .retrieval import SearchParams, SearchResult, search
from .sparse import SparseVector


@dataclass
class BatchOutcome:
    run: RunResults
    hits: dict[str, list[SearchResult]]
    # query ids that produced no searchable terms, with the reason
    warnings: list[tuple[str, str]] = field(default_factory=list)


def run_queries(
    index: ImpactIndex,
    queries: Sequence[tuple[str, SparseVector]],
    params: SearchParams,
    workers: int = 1,
) -> BatchOutcome:
    """Search every (query_id, vector) pair; empty queries become warnings
    instead of aborting the batch.
    """

    def one(item: tuple[str, SparseVector]):
        qid, qvec = item
        try:
            return qid, search(index, qvec, params), None
        except EmptyQueryError as exc:
            return qid, None, str(exc)

    if workers > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(one, queries))
    else:
        outcomes = [one(q) for q in queries]

    run = RunResults(ranked={}, latencies={}, candidates_pre={}, candidates_post={})
    hits: dict[str, list[SearchResult]] = {}
    warnings: list[tuple[str, str]] = []
    for qid, outcome, problem in outcomes:
        if problem is not None:
            warnings.append((qid, problem))
            run.ranked[qid] = []
            hits[qid] = []
            continue
        results, stats = outcome
        hits[qid] = results
        run.ranked[qid] = [(r.external_id, r.score) for r in results]
        run.latencies[qid] = stats.latency_s
        run.candidates_pre[qid] = stats.candidates_pre_filter
        run.candidates_post[qid] = stats.candidates_post_filter
    return BatchOutcome(run=run, hits=hits, warnings=warnings)
