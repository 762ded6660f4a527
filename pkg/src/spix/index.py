"""Inverted impact index: build, static document-centric pruning, stats.

The index maps every term to a posting list of (doc ordinal, impact weight)
pairs sorted by ordinal, for document-at-a-time traversal. Impact weights
are quantized to 32-bit floats at build time so the in-memory index and its
on-disk form (see :mod:`spix.storage`) hold identical values and round-trip
bit-exactly.

A built index is immutable (posting arrays are marked read-only); any number
of concurrent readers are safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import DataError, DuplicateDocIdError
from .sparse import SparseVector, from_pairs, top_k_truncate


class Vocabulary:
    """Bijection between term strings and dense term ids."""

    def __init__(self, terms: Iterable[str] = ()):
        self._terms: list[str] = []
        self._ids: dict[str, int] = {}
        for t in terms:
            self.intern(t)

    def intern(self, term: str) -> int:
        """Return the id for term, assigning the next id if unseen."""
        tid = self._ids.get(term)
        if tid is None:
            tid = len(self._terms)
            self._ids[term] = tid
            self._terms.append(term)
        return tid

    def id_of(self, term: str) -> int | None:
        return self._ids.get(term)

    def term(self, tid: int) -> str:
        return self._terms[tid]

    def __len__(self) -> int:
        return len(self._terms)

    def __iter__(self) -> Iterator[str]:
        return iter(self._terms)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Vocabulary) and self._terms == other._terms


@dataclass(frozen=True)
class DocRecord:
    external_id: str
    ordinal: int
    term_count: int   # vector entries after pruning
    raw_length: int   # token count pre-vectorization (BM25 length norm)


class ImpactIndex:
    """Vocabulary + document table + per-term posting lists + stats.

    Construct via :func:`build_index` or :func:`spix.storage.load_index`;
    instances are treated as immutable after construction.
    """

    def __init__(
        self,
        vocab: Vocabulary,
        external_ids: list[str],
        term_counts: np.ndarray,
        raw_lengths: np.ndarray,
        posting_docs: list[np.ndarray],
        posting_impacts: list[np.ndarray],
    ):
        self.vocab = vocab
        self.external_ids = external_ids
        self.term_counts = term_counts
        self.raw_lengths = raw_lengths
        self.posting_docs = posting_docs
        self.posting_impacts = posting_impacts
        self._ordinals = {ext: i for i, ext in enumerate(external_ids)}
        for arr in (term_counts, raw_lengths, *posting_docs, *posting_impacts):
            arr.flags.writeable = False

    # --- stats -----------------------------------------------------------

    @property
    def doc_count(self) -> int:
        return len(self.external_ids)

    @property
    def vocab_size(self) -> int:
        return len(self.vocab)

    @property
    def df(self) -> np.ndarray:
        """Document frequency per term (= posting list length)."""
        return np.array([len(d) for d in self.posting_docs], dtype=np.int64)

    @property
    def activation_probability(self) -> np.ndarray:
        """p_D(t) = df(t) / doc_count (zeros for an empty index)."""
        if self.doc_count == 0:
            return np.zeros(self.vocab_size, dtype=np.float64)
        return self.df / float(self.doc_count)

    @property
    def avg_raw_length(self) -> float:
        if self.doc_count == 0:
            return 0.0
        return float(self.raw_lengths.mean())

    @property
    def total_postings(self) -> int:
        return sum(len(d) for d in self.posting_docs)

    # --- lookups ----------------------------------------------------------

    def ordinal_of(self, external_id: str) -> int | None:
        return self._ordinals.get(external_id)

    def doc_record(self, ordinal: int) -> DocRecord:
        return DocRecord(
            external_id=self.external_ids[ordinal],
            ordinal=ordinal,
            term_count=int(self.term_counts[ordinal]),
            raw_length=int(self.raw_lengths[ordinal]),
        )

    def doc_vectors(self) -> list[SparseVector]:
        """Reconstruct every document vector from the posting lists."""
        pairs: list[list[tuple[int, float]]] = [[] for _ in range(self.doc_count)]
        for tid in range(self.vocab_size):
            docs = self.posting_docs[tid]
            imps = self.posting_impacts[tid]
            for o, w in zip(docs.tolist(), imps.tolist()):
                pairs[o].append((tid, w))
        # postings are visited in ascending term order, so pairs are sorted
        return [SparseVector(tuple(t for t, _ in p), tuple(w for _, w in p)) for p in pairs]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ImpactIndex):
            return NotImplemented
        return (
            self.vocab == other.vocab
            and self.external_ids == other.external_ids
            and np.array_equal(self.term_counts, other.term_counts)
            and np.array_equal(self.raw_lengths, other.raw_lengths)
            and all(
                np.array_equal(a, b)
                for a, b in zip(self.posting_docs, other.posting_docs)
            )
            and all(
                np.array_equal(a, b)
                for a, b in zip(self.posting_impacts, other.posting_impacts)
            )
        )


def quantize_weights(v: SparseVector) -> SparseVector:
    """Round weights to float32, dropping entries that underflow to zero."""
    if not v.terms:
        return v
    w32 = np.asarray(v.weights, dtype=np.float32).astype(np.float64)
    if np.all(w32 > 0.0):
        return SparseVector(v.terms, tuple(w32.tolist()))
    kept = [(t, w) for t, w in zip(v.terms, w32.tolist()) if w > 0.0]
    return SparseVector(tuple(t for t, _ in kept), tuple(w for _, w in kept))


def build_index(
    corpus: Iterable[tuple[str, SparseVector, int]],
    vocab: Vocabulary | None = None,
    document_k: int = 0,
) -> ImpactIndex:
    """Build an impact index from (external_id, vector, raw_length) records.

    document_k > 0 applies top-k document-centric pruning: each vector is
    truncated to its k highest-weight terms before postings are inserted
    (0 means no pruning). When vocab is omitted, a numeric vocabulary
    covering the largest term id is synthesized.

    An empty corpus yields an empty index; duplicate external ids raise.
    """
    if document_k < 0:
        raise DataError(f"document_k must be >= 0, got {document_k}")
    external_ids: list[str] = []
    seen: set[str] = set()
    term_counts: list[int] = []
    raw_lengths: list[int] = []
    vectors: list[SparseVector] = []
    max_term = -1

    for external_id, vec, raw_length in corpus:
        if external_id in seen:
            raise DuplicateDocIdError(f"duplicate document id {external_id!r}")
        seen.add(external_id)
        if raw_length < 0:
            raise DataError(f"document {external_id!r}: raw_length {raw_length} < 0")
        vec = quantize_weights(vec)
        if document_k:
            vec = top_k_truncate(vec, document_k)
        if vec.max_term > max_term:
            max_term = vec.max_term
        external_ids.append(external_id)
        term_counts.append(len(vec))
        raw_lengths.append(int(raw_length))
        vectors.append(vec)

    if vocab is None:
        vocab = Vocabulary(str(i) for i in range(max_term + 1))
    elif max_term >= len(vocab):
        raise DataError(
            f"term id {max_term} out of range for vocabulary of size {len(vocab)}"
        )

    vocab_size = len(vocab)
    docs_acc: list[list[int]] = [[] for _ in range(vocab_size)]
    imps_acc: list[list[float]] = [[] for _ in range(vocab_size)]
    for ordinal, vec in enumerate(vectors):
        for t, w in vec:
            docs_acc[t].append(ordinal)
            imps_acc[t].append(w)

    posting_docs = [np.asarray(d, dtype=np.int32) for d in docs_acc]
    posting_impacts = [np.asarray(w, dtype=np.float32) for w in imps_acc]
    return ImpactIndex(
        vocab=vocab,
        external_ids=external_ids,
        term_counts=np.asarray(term_counts, dtype=np.int32),
        raw_lengths=np.asarray(raw_lengths, dtype=np.int32),
        posting_docs=posting_docs,
        posting_impacts=posting_impacts,
    )


def prune_index(index: ImpactIndex, document_k: int) -> ImpactIndex:
    """Rebuild the index with top-k document-centric pruning applied.

    Equivalent to build_index over the reconstructed per-document vectors;
    the vocabulary is preserved (pruned terms keep empty posting lists).
    """
    if document_k < 1:
        raise DataError(f"document_k must be >= 1, got {document_k}")
    corpus = (
        (ext, vec, int(raw))
        for ext, vec, raw in zip(index.external_ids, index.doc_vectors(), index.raw_lengths)
    )
    return build_index(corpus, vocab=index.vocab, document_k=document_k)


@dataclass(frozen=True)
class IndexStats:
    doc_count: int
    vocab_size: int
    total_postings: int
    mean_postings_per_term: float
    mean_term_count_per_doc: float
    avg_raw_length: float
    activation_histogram: tuple[int, ...]  # p_D counts over 10 equal bins of [0, 1]

    def to_dict(self) -> dict:
        return {
            "doc_count": self.doc_count,
            "vocab_size": self.vocab_size,
            "total_postings": self.total_postings,
            "mean_postings_per_term": self.mean_postings_per_term,
            "mean_term_count_per_doc": self.mean_term_count_per_doc,
            "avg_raw_length": self.avg_raw_length,
            "activation_histogram": list(self.activation_histogram),
        }


def index_stats(index: ImpactIndex) -> IndexStats:
    """Summary statistics; pure read."""
    total = index.total_postings
    vocab_size = index.vocab_size
    doc_count = index.doc_count
    hist, _ = np.histogram(index.activation_probability, bins=np.linspace(0.0, 1.0, 11))
    return IndexStats(
        doc_count=doc_count,
        vocab_size=vocab_size,
        total_postings=total,
        mean_postings_per_term=total / vocab_size if vocab_size else 0.0,
        mean_term_count_per_doc=total / doc_count if doc_count else 0.0,
        avg_raw_length=index.avg_raw_length,
        activation_histogram=tuple(int(c) for c in hist),
    )
