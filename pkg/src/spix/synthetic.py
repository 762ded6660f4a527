"""Seeded synthetic corpus/query/judgments/embeddings generator.

Desk-scale stand-in for a production corpus. Construction:

- Document term ids are drawn from a Zipf-like distribution (id 0 most
  frequent), weights from a shifted gamma, so posting lists have the
  skewed lengths an impact index sees in practice.
- Each query gets a relevance cluster: one seed document plus
  ``cluster_size - 1`` siblings derived from it by keeping most seed terms
  and mixing in fresh ones. The query itself samples a few of the seed's
  heavier terms and adds a little off-topic noise, so the seed document is
  always a strong match (and is recorded as the query's judgment).
- Background embeddings are unit-normalized random projections of the
  sparse vectors (one fixed random direction per vocabulary term), so
  lexical overlap translates into cosine similarity. Cluster members sit
  tightly around their seed's projection, so every document relevant to a
  query scores a high cosine against the query's truth, however many terms
  its perturbation kept.

Everything is drawn from one seeded generator in a fixed order: identical
spec -> byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from . import formats


@dataclass(frozen=True)
class SyntheticSpec:
    seed: int
    doc_count: int
    vocab_size: int
    query_count: int
    doc_len_min: int = 8
    doc_len_max: int = 24
    cluster_size: int = 16
    query_len_min: int = 4
    query_len_max: int = 8
    query_noise_max: int = 3
    zipf_exponent: float = 1.05
    embedding_dim: int = 16

    def __post_init__(self):
        if self.doc_count < 1:
            raise DataError("doc_count must be >= 1")
        if self.vocab_size < 2:
            raise DataError("vocab_size must be >= 2")
        if self.query_count < 0:
            raise DataError("query_count must be >= 0")
        if not 1 <= self.doc_len_min <= self.doc_len_max:
            raise DataError("need 1 <= doc_len_min <= doc_len_max")
        if not 1 <= self.query_len_min <= self.query_len_max:
            raise DataError("need 1 <= query_len_min <= query_len_max")
        if self.cluster_size < 1:
            raise DataError("cluster_size must be >= 1")
        if self.query_count * self.cluster_size > self.doc_count:
            raise DataError(
                f"{self.query_count} clusters of {self.cluster_size} docs "
                f"exceed doc_count {self.doc_count}"
            )
        if self.embedding_dim < 2:
            raise DataError("embedding_dim must be >= 2")


@dataclass
class SyntheticData:
    docs: list[tuple[str, list[tuple[str, float]]]]
    queries: list[tuple[str, list[tuple[str, float]]]]
    judgments: list[tuple[str, str]]
    embeddings: list[tuple[str, np.ndarray]]


def _term_name(tid: int, width: int) -> str:
    return f"t{tid:0{width}d}"


def _draw_weights(rng, n: int) -> np.ndarray:
    # narrow spread: a single lucky weight must not outscore a multi-term match
    return rng.gamma(4.0, 0.1, size=n) + 0.7


def _draw_doc(rng, spec: SyntheticSpec, probs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """One document: unique sorted term ids and their weights."""
    length = int(rng.integers(spec.doc_len_min, spec.doc_len_max + 1))
    terms = np.unique(rng.choice(spec.vocab_size, size=length, p=probs))
    return terms, _draw_weights(rng, len(terms))


def _perturb_doc(
    rng, spec: SyntheticSpec, probs: np.ndarray, terms: np.ndarray, weights: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Cluster sibling: keep most of the source terms, jitter weights, add
    a few fresh terms."""
    keep = rng.random(len(terms)) < 0.92
    if not keep.any():
        keep[int(np.argmax(weights))] = True
    kept_terms = terms[keep]
    kept_weights = weights[keep] * rng.lognormal(0.0, 0.15, size=keep.sum())
    fresh_n = max(1, round(0.12 * len(kept_terms)))
    fresh = rng.choice(spec.vocab_size, size=fresh_n, p=probs)
    fresh = np.setdiff1d(np.unique(fresh), kept_terms)
    fresh_weights = _draw_weights(rng, len(fresh))
    all_terms = np.concatenate([kept_terms, fresh])
    all_weights = np.concatenate([kept_weights, fresh_weights])
    order = np.argsort(all_terms)
    return all_terms[order], all_weights[order]


def generate(spec: SyntheticSpec) -> SyntheticData:
    rng = np.random.default_rng(spec.seed)
    width = len(str(spec.vocab_size - 1))

    ranks = np.arange(1, spec.vocab_size + 1, dtype=np.float64)
    probs = ranks ** (-spec.zipf_exponent)
    probs /= probs.sum()

    # raw docs in generation order: (terms, weights, cluster id or -1)
    raw_docs: list[tuple[np.ndarray, np.ndarray, int]] = []
    seed_positions: list[int] = []
    for q in range(spec.query_count):
        terms, weights = _draw_doc(rng, spec, probs)
        seed_positions.append(len(raw_docs))
        raw_docs.append((terms, weights, q))
        for _ in range(spec.cluster_size - 1):
            raw_docs.append((*_perturb_doc(rng, spec, probs, terms, weights), q))
    for _ in range(spec.doc_count - len(raw_docs)):
        raw_docs.append((*_draw_doc(rng, spec, probs), -1))

    position = rng.permutation(spec.doc_count)  # generation order -> final ordinal
    final_of = np.empty(spec.doc_count, dtype=np.int64)
    final_of[position] = np.arange(spec.doc_count)
    id_width = len(str(spec.doc_count - 1))
    doc_ids = [f"d{i:0{id_width}d}" for i in range(spec.doc_count)]

    docs: list[tuple[str, list[tuple[str, float]]]] = [None] * spec.doc_count  # type: ignore
    for gen_pos, (terms, weights, _cluster) in enumerate(raw_docs):
        final = int(final_of[gen_pos])
        docs[final] = (
            doc_ids[final],
            [(_term_name(int(t), width), float(w)) for t, w in zip(terms, weights)],
        )

    queries: list[tuple[str, list[tuple[str, float]]]] = []
    judgments: list[tuple[str, str]] = []
    q_width = len(str(max(spec.query_count - 1, 1)))
    for q in range(spec.query_count):
        terms, weights, _ = raw_docs[seed_positions[q]]
        n_pick = min(len(terms), int(rng.integers(spec.query_len_min, spec.query_len_max + 1)))
        # discriminative picks: favor the seed's heavier and rarer terms, the
        # way learned impact weights concentrate on informative tokens
        pick_p = weights * probs[terms] ** -0.9
        pick = rng.choice(len(terms), size=n_pick, replace=False, p=pick_p / pick_p.sum())
        q_terms = terms[pick]
        q_weights = weights[pick] * rng.lognormal(0.0, 0.2, size=n_pick)
        n_noise = int(rng.integers(0, spec.query_noise_max + 1))
        if n_noise:
            # frequency-distributed off-topic terms with weak weights: they
            # inflate the candidate pool without steering the ranking
            noise = rng.choice(spec.vocab_size, size=n_noise, p=probs)
            noise = np.setdiff1d(np.unique(noise), q_terms)
            noise_weights = 0.4 * _draw_weights(rng, len(noise))
            q_terms = np.concatenate([q_terms, noise])
            q_weights = np.concatenate([q_weights, noise_weights])
        order = np.argsort(q_terms)
        qid = f"q{q:0{q_width}d}"
        queries.append(
            (
                qid,
                [
                    (_term_name(int(t), width), float(w))
                    for t, w in zip(q_terms[order], q_weights[order])
                ],
            )
        )
        seed_final = int(final_of[seed_positions[q]])
        judgments.append((qid, doc_ids[seed_final]))

    term_directions = rng.standard_normal((spec.vocab_size, spec.embedding_dim))

    def project(terms: np.ndarray, weights: np.ndarray) -> np.ndarray:
        emb = weights @ term_directions[terms]
        norm = float(np.linalg.norm(emb))
        if norm < 1e-9:
            emb = term_directions[0].copy()
            norm = float(np.linalg.norm(emb))
        return emb / norm

    centers = [
        project(*raw_docs[seed_positions[q]][:2]) for q in range(spec.query_count)
    ]
    embeddings_by_final: list[np.ndarray] = [None] * spec.doc_count  # type: ignore
    noise_scale = 0.45 / np.sqrt(spec.embedding_dim)
    for gen_pos, (terms, weights, cluster) in enumerate(raw_docs):
        if cluster >= 0:
            emb = centers[cluster] + noise_scale * rng.standard_normal(spec.embedding_dim)
            emb /= np.linalg.norm(emb)
        else:
            emb = project(terms, weights)
        embeddings_by_final[int(final_of[gen_pos])] = emb
    embeddings = [(doc_ids[i], embeddings_by_final[i]) for i in range(spec.doc_count)]

    return SyntheticData(docs=docs, queries=queries, judgments=judgments, embeddings=embeddings)


def write_dataset(data: SyntheticData, out_dir: str | Path) -> dict[str, str]:
    """Write the four standard files into out_dir; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": out / "corpus.tsv",
        "queries": out / "queries.tsv",
        "judgments": out / "judgments.tsv",
        "embeddings": out / "embeddings.tsv",
    }
    formats.save_text(paths["corpus"], lambda fh: formats.write_corpus_vectors(fh, data.docs))
    formats.save_text(paths["queries"], lambda fh: formats.write_corpus_vectors(fh, data.queries))
    formats.save_text(paths["judgments"], lambda fh: formats.write_judgments(fh, data.judgments))
    formats.save_text(
        paths["embeddings"], lambda fh: formats.write_embeddings(fh, data.embeddings)
    )
    return {k: str(v) for k, v in paths.items()}
