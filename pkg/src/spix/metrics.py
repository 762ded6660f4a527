"""Effectiveness and efficiency metrics.

Effectiveness: MRR@k over relevance judgments, and SSS@k (semantic
similarity of retrieved documents to ground-truth documents under an
external embedding store). Efficiency: an activation-probability FLOPS
estimate over an index + query workload, and latency order statistics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DataError,
    DimensionMismatchError,
    EmptyQuerySetError,
    EmptySamplesError,
    MissingEmbeddingError,
    NoJudgedQueriesError,
    ZeroVectorError,
)
from .index import ImpactIndex
from .sparse import SparseVector


class Judgments:
    """query_id -> ordered, deduplicated, non-empty set of relevant doc ids."""

    def __init__(self, mapping: dict[str, Sequence[str]]):
        self._by_query: dict[str, tuple[str, ...]] = {}
        for qid, doc_ids in mapping.items():
            deduped = tuple(dict.fromkeys(doc_ids))
            if not deduped:
                raise DataError(f"query {qid!r} has no relevant documents")
            self._by_query[qid] = deduped

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[str, str]]) -> "Judgments":
        acc: dict[str, list[str]] = {}
        for qid, doc_id in pairs:
            acc.setdefault(qid, []).append(doc_id)
        return cls(acc)

    def relevant(self, qid: str) -> tuple[str, ...]:
        return self._by_query[qid]

    def query_ids(self) -> list[str]:
        return list(self._by_query)

    def __contains__(self, qid: str) -> bool:
        return qid in self._by_query

    def __len__(self) -> int:
        return len(self._by_query)


class EmbeddingStore:
    """doc_id -> dense unit-normalizable vector, all of one dimension."""

    def __init__(self, vectors: dict[str, np.ndarray]):
        self._vectors: dict[str, np.ndarray] = {}
        self.dim: int | None = None
        for doc_id, vec in vectors.items():
            v = np.asarray(vec, dtype=np.float64)
            if v.ndim != 1:
                raise DataError(f"embedding for {doc_id!r} must be 1-D")
            if self.dim is None:
                self.dim = len(v)
            elif len(v) != self.dim:
                raise DimensionMismatchError(
                    f"embedding for {doc_id!r} has dim {len(v)}, expected {self.dim}"
                )
            if not np.any(v):
                raise ZeroVectorError(f"embedding for {doc_id!r} is all zeros")
            self._vectors[doc_id] = v

    def vector(self, doc_id: str) -> np.ndarray:
        try:
            return self._vectors[doc_id]
        except KeyError:
            raise MissingEmbeddingError(doc_id) from None

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._vectors

    def __len__(self) -> int:
        return len(self._vectors)


@dataclass
class RunResults:
    """Ranked lists plus per-query instrumentation from a batch search."""

    ranked: dict[str, list[tuple[str, float]]]
    latencies: dict[str, float] = field(default_factory=dict)
    candidates_pre: dict[str, int] = field(default_factory=dict)
    candidates_post: dict[str, int] = field(default_factory=dict)


def mrr_at_k(run: RunResults, judgments: Judgments, k: int = 10) -> float:
    """Mean reciprocal rank of the first relevant doc within the top k.

    Judged queries missing from the run (or with no relevant doc in the
    top k) contribute 0; unjudged run queries are ignored.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if len(judgments) == 0:
        raise NoJudgedQueriesError("judgments contain no queries")
    total = 0.0
    for qid in judgments.query_ids():
        relevant = set(judgments.relevant(qid))
        for rank, (doc_id, _) in enumerate(run.ranked.get(qid, [])[:k], start=1):
            if doc_id in relevant:
                total += 1.0 / rank
                break
    return total / len(judgments)


def cosine(a, b) -> float:
    va = np.asarray(a, dtype=np.float64)
    vb = np.asarray(b, dtype=np.float64)
    if va.shape != vb.shape:
        raise DimensionMismatchError(f"shapes differ: {va.shape} vs {vb.shape}")
    na = np.linalg.norm(va)
    nb = np.linalg.norm(vb)
    if na == 0.0 or nb == 0.0:
        raise ZeroVectorError("cosine is undefined for a zero vector")
    return float(va @ vb / (na * nb))


def sss_at_k(
    run: RunResults,
    judgments: Judgments,
    store: EmbeddingStore,
    k: int = 10,
    aggregate: str = "max",
) -> float:
    """Semantic similarity of the top-k retrieved docs to the ground truth.

    Per retrieved doc: cosine to each ground-truth doc's embedding,
    aggregated with max (default) or mean across the truth set. Per query:
    mean over the retrieved docs actually present (0 when nothing was
    retrieved). Overall: mean across judged queries.
    """
    if k < 1:
        raise DataError(f"k must be >= 1, got {k}")
    if len(judgments) == 0:
        raise NoJudgedQueriesError("judgments contain no queries")
    if aggregate not in ("max", "mean"):
        raise DataError(f"aggregate must be 'max' or 'mean', got {aggregate!r}")
    combine = max if aggregate == "max" else lambda xs: sum(xs) / len(xs)
    total = 0.0
    for qid in judgments.query_ids():
        truth_embs = [store.vector(g) for g in judgments.relevant(qid)]
        retrieved = run.ranked.get(qid, [])[:k]
        if not retrieved:
            continue
        per_doc = [
            combine([cosine(store.vector(doc_id), g) for g in truth_embs])
            for doc_id, _ in retrieved
        ]
        total += sum(per_doc) / len(per_doc)
    return total / len(judgments)


def flops_estimate(index: ImpactIndex, query_vectors: Sequence[SparseVector]) -> float:
    """Expected weight multiplications per (query, document) pair.

    Sum over vocabulary terms of query activation probability times
    document activation probability. Depends only on activation supports,
    so it is invariant under positive weight rescaling.
    """
    if len(query_vectors) == 0:
        raise EmptyQuerySetError("at least one query vector is required")
    if index.doc_count == 0:
        return 0.0
    vocab_size = index.vocab_size
    counts = np.zeros(vocab_size, dtype=np.float64)
    for q in query_vectors:
        for t in q.terms:
            if t < vocab_size:
                counts[t] += 1.0
    p_q = counts / len(query_vectors)
    return float(p_q @ index.activation_probability)


@dataclass(frozen=True)
class LatencyStats:
    mean: float
    p50: float
    p95: float
    max: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "p50": self.p50, "p95": self.p95, "max": self.max}


def latency_stats(samples: Sequence[float]) -> LatencyStats:
    """Mean/median/p95/max with nearest-rank percentiles."""
    if len(samples) == 0:
        raise EmptySamplesError("no latency samples")
    ordered = sorted(samples)
    n = len(ordered)

    def nearest_rank(p: float) -> float:
        return ordered[max(0, math.ceil(p * n) - 1)]

    return LatencyStats(
        mean=sum(ordered) / n,
        p50=nearest_rank(0.50),
        p95=nearest_rank(0.95),
        max=ordered[-1],
    )
