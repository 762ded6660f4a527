"""Two-stage search: should-based candidate retrieval, threshold filtering,
top-n ranking.

Stage one walks the posting lists of every query term and accumulates, per
touched document, a partial dot-product score and a matched-term count.
Stage two keeps only documents matching at least ``required_matches``
distinct query terms, then ranks survivors by score (ties broken toward the
smaller doc ordinal). Query-side pruning (keep the k heaviest query terms)
happens during planning.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DataError, EmptyQueryError
from .index import ImpactIndex
from .sparse import SparseVector, top_k_truncate


@dataclass(frozen=True)
class SearchParams:
    """Pruning knobs: query_k=0 means no query-term pruning, threshold is
    the fraction of query terms a document must match (0 = should baseline).
    """

    top_n: int = 10
    query_k: int = 0
    threshold: float = 0.0

    def __post_init__(self):
        if self.top_n < 1:
            raise DataError(f"top_n must be >= 1, got {self.top_n}")
        if self.query_k < 0:
            raise DataError(f"query_k must be >= 0, got {self.query_k}")
        if not 0.0 <= self.threshold <= 1.0:
            raise DataError(f"threshold must be in [0, 1], got {self.threshold}")


@dataclass(frozen=True)
class QueryPlan:
    terms: SparseVector      # post-pruning, restricted to the index vocabulary
    m: int                   # distinct query terms
    required_matches: int    # max(1, ceil(threshold * m))


@dataclass(frozen=True)
class CandidateTable:
    """Accumulator output: parallel arrays sorted by doc ordinal."""

    ordinals: np.ndarray   # int32
    scores: np.ndarray     # float64, partial dot products
    matched: np.ndarray    # int32, distinct matched query terms

    def __len__(self) -> int:
        return len(self.ordinals)

    def as_dict(self) -> dict[int, tuple[float, int]]:
        return {
            int(o): (float(s), int(m))
            for o, s, m in zip(self.ordinals, self.scores, self.matched)
        }


class SearchResult(NamedTuple):
    external_id: str
    score: float
    matched_terms: int


class SearchStats(NamedTuple):
    latency_s: float
    candidates_pre_filter: int
    candidates_post_filter: int


def select_query_terms(qvec: SparseVector, query_k: int) -> SparseVector:
    """Keep the query_k heaviest query terms; 0 means keep everything."""
    if query_k < 0:
        raise DataError(f"query_k must be >= 0, got {query_k}")
    if query_k == 0 or len(qvec) <= query_k:
        return qvec
    return top_k_truncate(qvec, query_k)


def plan_query(qvec: SparseVector, params: SearchParams, index: ImpactIndex) -> QueryPlan:
    """Prune the query, drop out-of-vocabulary terms, fix required_matches.

    Pruning runs before the vocabulary restriction, so an unknown
    high-weight term can consume one of the query_k slots. threshold=0
    yields required_matches=1 (at least one term must be present).
    """
    pruned = select_query_terms(qvec, params.query_k)
    vocab_size = index.vocab_size
    kept = [(t, w) for t, w in pruned if t < vocab_size]
    if not kept:
        raise EmptyQueryError("no query terms survive pruning and vocabulary mapping")
    terms = SparseVector(tuple(t for t, _ in kept), tuple(w for _, w in kept))
    m = len(kept)
    # the 1e-9 slack absorbs float repr noise in threshold * m (e.g. 0.2 * 5)
    required = max(1, math.ceil(params.threshold * m - 1e-9))
    return QueryPlan(terms=terms, m=m, required_matches=required)


def _accumulate(index: ImpactIndex, plan: QueryPlan):
    """Dense accumulator pass over the plan terms' posting lists."""
    doc_count = index.doc_count
    scores = np.zeros(doc_count, dtype=np.float64)
    matched = np.zeros(doc_count, dtype=np.int32)
    touched = np.zeros(doc_count, dtype=bool)
    for t, qw in plan.terms:
        docs = index.posting_docs[t]
        if len(docs) == 0:
            continue
        impacts = index.posting_impacts[t]
        scores[docs] += np.multiply(impacts, qw, dtype=np.float64)
        matched[docs] += 1
        touched[docs] = True
    return scores, matched, touched


def retrieve_candidates(index: ImpactIndex, plan: QueryPlan) -> CandidateTable:
    """Should-based traversal: every document sharing at least one plan term
    gets its partial score (dot product over shared terms) and matched count.
    """
    scores, matched, touched = _accumulate(index, plan)
    ordinals = np.flatnonzero(touched).astype(np.int32)
    return CandidateTable(
        ordinals=ordinals, scores=scores[ordinals], matched=matched[ordinals]
    )


def threshold_filter(candidates: CandidateTable, plan: QueryPlan) -> CandidateTable:
    """Keep candidates matching at least plan.required_matches terms."""
    keep = candidates.matched >= plan.required_matches
    return CandidateTable(
        ordinals=candidates.ordinals[keep],
        scores=candidates.scores[keep],
        matched=candidates.matched[keep],
    )


def rank_top_n(index: ImpactIndex, candidates: CandidateTable, top_n: int) -> list[SearchResult]:
    """Exact top-n by (score desc, ordinal asc).

    Uses partition-based selection so only the entries at or above the
    cutoff score are ever sorted; equivalent to full-sort-then-truncate.
    """
    if top_n < 1:
        raise DataError(f"top_n must be >= 1, got {top_n}")
    n = len(candidates)
    if n == 0:
        return []
    scores = candidates.scores
    ordinals = candidates.ordinals
    if n > top_n:
        cutoff = np.partition(scores, n - top_n)[n - top_n]
        sel = np.flatnonzero(scores >= cutoff)
    else:
        sel = np.arange(n)
    order = np.lexsort((ordinals[sel], -scores[sel]))[:top_n]
    chosen = sel[order]
    external_ids = index.external_ids
    return [
        SearchResult(
            external_id=external_ids[int(ordinals[i])],
            score=float(scores[i]),
            matched_terms=int(candidates.matched[i]),
        )
        for i in chosen
    ]


def search(
    index: ImpactIndex, qvec: SparseVector, params: SearchParams
) -> tuple[list[SearchResult], SearchStats]:
    """Full pipeline; also reports wall-clock latency and candidate counts.

    Equivalent to plan_query -> retrieve_candidates -> threshold_filter ->
    rank_top_n, but the filter is applied on the dense accumulators so only
    surviving candidates are ever extracted (the point of the two-step
    pipeline: a high threshold shrinks the ranking stage). Pure function of
    its arguments apart from the timing field; any number of searches may
    run concurrently against the same index.
    """
    start = time.perf_counter()
    plan = plan_query(qvec, params, index)
    scores, matched, touched = _accumulate(index, plan)
    pre_filter = int(np.count_nonzero(touched))
    if plan.required_matches > 1:
        touched &= matched >= plan.required_matches
    ordinals = np.flatnonzero(touched).astype(np.int32)
    filtered = CandidateTable(
        ordinals=ordinals, scores=scores[ordinals], matched=matched[ordinals]
    )
    results = rank_top_n(index, filtered, params.top_n)
    latency = time.perf_counter() - start
    return results, SearchStats(
        latency_s=latency,
        candidates_pre_filter=pre_filter,
        candidates_post_filter=len(filtered),
    )
