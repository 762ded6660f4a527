"""BM25 impact transforms.

BM25 rides the same dot-product retrieval path as learned sparse models:
documents are vectorized once with the tf-saturation/length-normalization
factor as the impact weight, queries carry the idf side, and
``dot(query, doc)`` reproduces the classic BM25 score.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError
from .index import ImpactIndex, Vocabulary
from .sparse import SparseVector, from_pairs

DEFAULT_K1 = 1.2
DEFAULT_B = 0.75


def bm25_doc_impact(
    tf: int, doc_len: int, avgdl: float, k1: float = DEFAULT_K1, b: float = DEFAULT_B
) -> float:
    """Robertson tf saturation with document-length normalization."""
    if tf < 1:
        raise DataError(f"tf must be >= 1, got {tf}")
    if doc_len < 1:
        raise DataError(f"doc_len must be >= 1, got {doc_len}")
    if avgdl <= 0:
        raise DataError(f"avgdl must be > 0, got {avgdl}")
    return tf * (k1 + 1.0) / (tf + k1 * (1.0 - b + b * doc_len / avgdl))


def bm25_query_weight(df: int, doc_count: int) -> float:
    """Robertson idf with +1 inside the log, so weights are always positive."""
    if not 1 <= df <= doc_count:
        raise DataError(f"df must be in [1, doc_count], got df={df} doc_count={doc_count}")
    return float(np.log(1.0 + (doc_count - df + 0.5) / (df + 0.5)))


@dataclass(frozen=True)
class CollectionStats:
    """Everything the BM25 transforms need about a collection."""

    vocab: Vocabulary
    df: np.ndarray          # document frequency per term id
    doc_count: int
    avgdl: float
    k1: float = DEFAULT_K1
    b: float = DEFAULT_B

    @classmethod
    def from_tokenized(
        cls,
        docs: Iterable[Sequence[str]],
        k1: float = DEFAULT_K1,
        b: float = DEFAULT_B,
    ) -> "CollectionStats":
        """One pass over tokenized documents: vocabulary in first-seen order,
        per-term document frequency, average raw length.
        """
        vocab = Vocabulary()
        df_counts: list[int] = []
        total_len = 0
        doc_count = 0
        for tokens in docs:
            doc_count += 1
            total_len += len(tokens)
            for tok in set(tokens):
                tid = vocab.intern(tok)
                if tid == len(df_counts):
                    df_counts.append(0)
                df_counts[tid] += 1
        avgdl = total_len / doc_count if doc_count else 0.0
        return cls(
            vocab=vocab,
            df=np.asarray(df_counts, dtype=np.int64),
            doc_count=doc_count,
            avgdl=avgdl,
            k1=k1,
            b=b,
        )

    @classmethod
    def from_index(
        cls, index: ImpactIndex, k1: float = DEFAULT_K1, b: float = DEFAULT_B
    ) -> "CollectionStats":
        """Derive stats from a built index (df = posting list lengths), for
        query-side vectorization at search time.
        """
        return cls(
            vocab=index.vocab,
            df=index.df,
            doc_count=index.doc_count,
            avgdl=index.avg_raw_length,
            k1=k1,
            b=b,
        )


def bm25_doc_vector(tokens: Sequence[str], stats: CollectionStats) -> SparseVector:
    """Document-side transform: one entry per distinct known token, weighted
    by the tf/length factor. ``doc_len`` is the raw token count.
    """
    doc_len = len(tokens)
    pairs = []
    for tok, tf in Counter(tokens).items():
        tid = stats.vocab.id_of(tok)
        if tid is None:
            continue
        pairs.append((tid, bm25_doc_impact(tf, doc_len, stats.avgdl, stats.k1, stats.b)))
    return from_pairs(pairs)


def bm25_query_vector(tokens: Sequence[str], stats: CollectionStats) -> SparseVector:
    """Query-side transform: idf per distinct token; tokens unseen in the
    collection (df = 0) are dropped.
    """
    pairs = []
    for tok in set(tokens):
        tid = stats.vocab.id_of(tok)
        if tid is None:
            continue
        df = int(stats.df[tid])
        if df < 1:
            continue
        pairs.append((tid, bm25_query_weight(df, stats.doc_count)))
    return from_pairs(pairs)
