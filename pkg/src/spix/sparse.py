"""Sparse term-weight vectors and the dot-product similarity.

A :class:`SparseVector` is the canonical representation of both queries and
documents: (term id, positive weight) pairs stored in strictly ascending
term order. All retrieval models in this package (BM25 transforms,
learned-impact vectors) score through the same :func:`dot`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator

from .errors import DataError, DuplicateTermError, NegativeWeightError, NonFiniteError

TermId = int


@dataclass(frozen=True)
class SparseVector:
    """Immutable sparse vector: parallel tuples sorted by term id.

    Invariants (enforced by :func:`from_pairs`): no duplicate term ids,
    every weight positive and finite, terms strictly ascending.
    """

    terms: tuple[TermId, ...]
    weights: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[TermId, float]]:
        return zip(self.terms, self.weights)

    def as_dict(self) -> dict[TermId, float]:
        return dict(zip(self.terms, self.weights))

    @property
    def max_term(self) -> TermId:
        """Largest term id, or -1 for the empty vector."""
        return self.terms[-1] if self.terms else -1


EMPTY_VECTOR = SparseVector((), ())


def from_pairs(pairs: Iterable[tuple[TermId, float]]) -> SparseVector:
    """Build a SparseVector from unordered (term, weight) pairs.

    Zero weights are silently dropped. Raises on duplicate terms, negative
    weights, non-finite weights, and negative term ids.
    """
    items = []
    for term, weight in pairs:
        weight = float(weight)
        if math.isnan(weight) or math.isinf(weight):
            raise NonFiniteError(f"term {term}: weight {weight!r} is not finite")
        if weight < 0.0:
            raise NegativeWeightError(f"term {term}: weight {weight!r} is negative")
        if term < 0:
            raise DataError(f"term id {term} is negative")
        if weight == 0.0:
            continue
        items.append((int(term), weight))
    items.sort(key=lambda it: it[0])
    for a, b in zip(items, items[1:]):
        if a[0] == b[0]:
            raise DuplicateTermError(f"term {a[0]} appears more than once")
    return SparseVector(tuple(t for t, _ in items), tuple(w for _, w in items))


def dot(a: SparseVector, b: SparseVector) -> float:
    """Inner product over shared terms (0 when supports are disjoint)."""
    i, j, total = 0, 0, 0.0
    ta, tb = a.terms, b.terms
    while i < len(ta) and j < len(tb):
        if ta[i] == tb[j]:
            total += a.weights[i] * b.weights[j]
            i += 1
            j += 1
        elif ta[i] < tb[j]:
            i += 1
        else:
            j += 1
    return total


def top_k_truncate(v: SparseVector, k: int) -> SparseVector:
    """Keep the k highest-weight entries of v.

    Ties at the cutoff weight are broken toward the smaller term id, so
    truncation is deterministic. Returns v itself when it already has at
    most k entries.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    if len(v) <= k:
        return v
    # Rank by (weight desc, term asc); term order is restored afterwards.
    order = sorted(range(len(v)), key=lambda i: (-v.weights[i], v.terms[i]))
    keep = sorted(order[:k])
    return SparseVector(
        tuple(v.terms[i] for i in keep),
        tuple(v.weights[i] for i in keep),
    )
