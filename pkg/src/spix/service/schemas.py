"""Pydantic request/response models for the HTTP service.

Heavy data (corpora, indexes, result sets) stays on the filesystem; the
API exchanges paths and parameters, plus inline results where small.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    detail: str
    kind: str


class HealthResponse(BaseModel):
    status: str
    version: str


# --- build / stats ------------------------------------------------------------

class BuildRequest(BaseModel):
    corpus_path: str
    output_path: str
    mode: Literal["vector", "text"] = "vector"
    document_k: int = Field(default=0, ge=0)
    k1: float = 1.2
    b: float = 0.75


class BuildResponse(BaseModel):
    output_path: str
    doc_count: int
    vocab_size: int
    total_postings: int


class StatsRequest(BaseModel):
    index_path: str


class StatsResponse(BaseModel):
    doc_count: int
    vocab_size: int
    total_postings: int
    mean_postings_per_term: float
    mean_term_count_per_doc: float
    avg_raw_length: float
    activation_histogram: list[int]


# --- search -------------------------------------------------------------------

class SearchRequest(BaseModel):
    index_path: str
    queries_path: str
    mode: Literal["vector", "text"] = "vector"
    top_n: int = Field(default=10, ge=1)
    query_k: int = Field(default=0, ge=0)
    threshold: float = Field(default=0.0, ge=0.0, le=1.0)
    workers: int = Field(default=1, ge=1)
    output_path: str | None = None
    k1: float = 1.2
    b: float = 0.75


class Hit(BaseModel):
    rank: int
    external_id: str
    score: float
    matched_terms: int


class QueryHits(BaseModel):
    query_id: str
    hits: list[Hit]


class QueryWarning(BaseModel):
    query_id: str
    reason: str


class LatencySummary(BaseModel):
    mean: float
    p50: float
    p95: float
    max: float


class SearchResponse(BaseModel):
    results: list[QueryHits] | None  # None when written to output_path
    warnings: list[QueryWarning]
    latency: LatencySummary | None
    query_count: int
    output_path: str | None


# --- eval ---------------------------------------------------------------------

class EvalRequest(BaseModel):
    results_path: str
    judgments_path: str
    embeddings_path: str | None = None
    k: int = Field(default=10, ge=1)
    sss_aggregate: Literal["max", "mean"] = "max"
    csv_path: str | None = None


class EvalResponse(BaseModel):
    k: int
    mrr: float
    sss: float | None
    judged_queries: int
    csv_path: str | None


# --- flops --------------------------------------------------------------------

class FlopsRequest(BaseModel):
    index_path: str
    queries_path: str
    mode: Literal["vector", "text"] = "vector"


class FlopsResponse(BaseModel):
    flops: float
    query_count: int


# --- sweep --------------------------------------------------------------------

class SweepRequest(BaseModel):
    corpus_path: str
    queries_path: str
    judgments_path: str
    output_csv: str
    embeddings_path: str | None = None
    mode: Literal["vector", "text"] = "vector"
    document_ks: list[int] = Field(default=[0], min_length=1)
    query_ks: list[int] = Field(default=[0], min_length=1)
    thresholds: list[float] = Field(default=[0.0, 0.2, 0.4, 0.6, 0.8], min_length=1)
    top_n: int = Field(default=10, ge=1)
    repetitions: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)
    k1: float = 1.2
    b: float = 0.75


class SweepRowModel(BaseModel):
    document_k: int
    query_k: int
    threshold: float
    mrr: float
    sss: float | None
    flops: float
    mean_candidates_pre: float
    mean_candidates_post: float
    mean_latency_s: float
    rep_mean_latency_s: list[float]


class SweepResponse(BaseModel):
    rows: list[SweepRowModel]
    output_csv: str


# --- losses selftest -----------------------------------------------------------

class SelftestRequest(BaseModel):
    seed: int = 0
    sizes: list[tuple[int, int]] = [(2, 5), (4, 16), (8, 32)]
    instances: int = Field(default=50, ge=1)


class SelftestCheckModel(BaseModel):
    name: str
    max_error: float
    tolerance: float
    passed: bool


class SelftestResponse(BaseModel):
    checks: list[SelftestCheckModel]
    passed: bool


# --- synthetic data -------------------------------------------------------------

class SyntheticRequest(BaseModel):
    out_dir: str
    seed: int = 0
    doc_count: int = Field(default=1000, ge=1)
    vocab_size: int = Field(default=2000, ge=2)
    query_count: int = Field(default=50, ge=0)
    doc_len_min: int = Field(default=8, ge=1)
    doc_len_max: int = Field(default=24, ge=1)
    cluster_size: int = Field(default=14, ge=1)
    query_len_min: int = Field(default=4, ge=1)
    query_len_max: int = Field(default=8, ge=1)
    query_noise_max: int = Field(default=2, ge=0)
    zipf_exponent: float = 1.05
    embedding_dim: int = Field(default=16, ge=2)


class SyntheticResponse(BaseModel):
    corpus: str
    queries: str
    judgments: str
    embeddings: str
    doc_count: int
    query_count: int
