"""Newline-delimited file formats.

corpus (vector mode)   external_id TAB space-separated term:weight pairs
corpus (text mode)     external_id TAB whitespace-tokenized text
queries (vector mode)  query_id TAB term:weight pairs
queries (text mode)    query_id TAB raw text
judgments              query_id TAB doc_id
embeddings             doc_id TAB space-separated reals
search results         query_id TAB rank TAB external_id TAB score TAB matched_terms

Parsers raise :class:`FileFormatError` naming the offending line. Blank
lines are ignored everywhere. Term strings are interned into a vocabulary
in first-seen order, which keeps index builds deterministic for a fixed
corpus order.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Iterator, Sequence, TextIO

import numpy as np

from .errors import DataError, FileFormatError
from .index import Vocabulary
from .metrics import EmbeddingStore, Judgments, RunResults
from .sparse import SparseVector, from_pairs

PathLike = str | os.PathLike


def _lines(path: PathLike) -> Iterator[tuple[int, str]]:
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n").rstrip("\r")
            if line:
                yield line_no, line


def _split_id_payload(path: PathLike, line_no: int, line: str) -> tuple[str, str]:
    parts = line.split("\t")
    if len(parts) != 2 or not parts[0]:
        raise FileFormatError(
            str(path), line_no, "expected exactly one TAB separating id and payload"
        )
    return parts[0], parts[1]


def _parse_weighted_terms(
    path: PathLike, line_no: int, payload: str, vocab: Vocabulary, extend: bool
) -> tuple[SparseVector, int]:
    """Parse term:weight pairs, returning the vector and raw pair count.

    With extend=True unseen terms are interned (corpus ingestion); with
    extend=False they get throwaway ids past the vocabulary so downstream
    planning can drop them (query ingestion).
    """
    pairs: list[tuple[int, float]] = []
    unknown: dict[str, int] = {}
    for piece in payload.split():
        term, sep, weight_text = piece.rpartition(":")
        if not sep or not term:
            raise FileFormatError(str(path), line_no, f"malformed term:weight pair {piece!r}")
        try:
            weight = float(weight_text)
        except ValueError:
            raise FileFormatError(
                str(path), line_no, f"weight {weight_text!r} is not a number"
            ) from None
        if extend:
            tid = vocab.intern(term)
        else:
            tid = vocab.id_of(term)
            if tid is None:
                tid = unknown.setdefault(term, len(vocab) + len(unknown))
        pairs.append((tid, weight))
    try:
        return from_pairs(pairs), len(pairs)
    except DataError as exc:
        raise FileFormatError(str(path), line_no, str(exc)) from exc


def read_vector_corpus(
    path: PathLike,
) -> tuple[list[tuple[str, SparseVector, int]], Vocabulary]:
    """Read a vector-mode corpus; raw_length is the entry count of the line.

    Returns the records and the vocabulary interned from term strings.
    """
    vocab = Vocabulary()
    records: list[tuple[str, SparseVector, int]] = []
    for line_no, line in _lines(path):
        ext_id, payload = _split_id_payload(path, line_no, line)
        vec, raw_len = _parse_weighted_terms(path, line_no, payload, vocab, extend=True)
        records.append((ext_id, vec, raw_len))
    return records, vocab


def read_text_corpus(path: PathLike) -> list[tuple[str, list[str]]]:
    """Read a text-mode corpus as (external_id, tokens)."""
    records = []
    for line_no, line in _lines(path):
        ext_id, payload = _split_id_payload(path, line_no, line)
        tokens = payload.split()
        if not tokens:
            raise FileFormatError(str(path), line_no, "document has no tokens")
        records.append((ext_id, tokens))
    return records


def read_vector_queries(
    path: PathLike, vocab: Vocabulary
) -> list[tuple[str, SparseVector]]:
    """Read vector-mode queries against an existing vocabulary.

    Unknown terms keep synthetic out-of-vocabulary ids so query-side
    pruning sees them before planning drops them.
    """
    queries = []
    for line_no, line in _lines(path):
        qid, payload = _split_id_payload(path, line_no, line)
        vec, _ = _parse_weighted_terms(path, line_no, payload, vocab, extend=False)
        queries.append((qid, vec))
    return queries


def read_text_queries(path: PathLike) -> list[tuple[str, list[str]]]:
    """Read text-mode queries as (query_id, tokens)."""
    queries = []
    for line_no, line in _lines(path):
        qid, payload = _split_id_payload(path, line_no, line)
        queries.append((qid, payload.split()))
    return queries


def read_judgments(path: PathLike) -> Judgments:
    pairs = []
    for line_no, line in _lines(path):
        qid, doc_id = _split_id_payload(path, line_no, line)
        if not doc_id:
            raise FileFormatError(str(path), line_no, "empty doc id")
        pairs.append((qid, doc_id))
    return Judgments.from_pairs(pairs)


def read_embeddings(path: PathLike) -> EmbeddingStore:
    vectors: dict[str, np.ndarray] = {}
    for line_no, line in _lines(path):
        doc_id, payload = _split_id_payload(path, line_no, line)
        try:
            vec = np.array([float(x) for x in payload.split()], dtype=np.float64)
        except ValueError:
            raise FileFormatError(str(path), line_no, "non-numeric embedding value") from None
        if len(vec) == 0:
            raise FileFormatError(str(path), line_no, "empty embedding")
        if doc_id in vectors:
            raise FileFormatError(str(path), line_no, f"duplicate embedding for {doc_id!r}")
        vectors[doc_id] = vec
    try:
        return EmbeddingStore(vectors)
    except DataError as exc:
        raise FileFormatError(str(path), 0, str(exc)) from exc


def format_result_lines(
    qid: str, hits: Sequence[tuple[str, float, int]]
) -> list[str]:
    """Wire format: query_id, rank, external_id, score, matched_terms."""
    return [
        f"{qid}\t{rank}\t{ext}\t{score:.9g}\t{matched}"
        for rank, (ext, score, matched) in enumerate(hits, start=1)
    ]


def write_results(
    out: TextIO, results: Sequence[tuple[str, Sequence[tuple[str, float, int]]]]
) -> None:
    for qid, hits in results:
        for line in format_result_lines(qid, hits):
            out.write(line + "\n")


def read_results(path: PathLike) -> RunResults:
    """Read a results file back into ranked lists (ranks must be 1..n)."""
    ranked: dict[str, list[tuple[str, float]]] = {}
    for line_no, line in _lines(path):
        parts = line.split("\t")
        if len(parts) != 5:
            raise FileFormatError(str(path), line_no, "expected 5 TAB-separated fields")
        qid, rank_text, ext_id, score_text, _matched = parts
        try:
            rank = int(rank_text)
            score = float(score_text)
        except ValueError:
            raise FileFormatError(str(path), line_no, "bad rank or score") from None
        hits = ranked.setdefault(qid, [])
        if rank != len(hits) + 1:
            raise FileFormatError(
                str(path), line_no, f"rank {rank} out of order for query {qid!r}"
            )
        hits.append((ext_id, score))
    return RunResults(ranked=ranked)


def write_corpus_vectors(
    out: TextIO,
    records: Sequence[tuple[str, Sequence[tuple[str, float]]]],
) -> None:
    """Write vector-mode corpus/query lines from (id, [(term, weight), ...])."""
    for ext_id, pairs in records:
        payload = " ".join(f"{t}:{w:.6f}" for t, w in pairs)
        out.write(f"{ext_id}\t{payload}\n")


def write_judgments(out: TextIO, pairs: Sequence[tuple[str, str]]) -> None:
    for qid, doc_id in pairs:
        out.write(f"{qid}\t{doc_id}\n")


def write_embeddings(out: TextIO, vectors: Sequence[tuple[str, Sequence[float]]]) -> None:
    for doc_id, vec in vectors:
        payload = " ".join(f"{x:.8f}" for x in vec)
        out.write(f"{doc_id}\t{payload}\n")


def save_text(path: PathLike, write_fn) -> None:
    """Write a text file atomically via a sibling temp file."""
    target = Path(path)
    tmp = target.with_name(target.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        write_fn(fh)
    tmp.replace(target)
