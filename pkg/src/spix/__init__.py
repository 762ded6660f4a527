"""spix: sparse impact-retrieval engine.

Index term-weighted document vectors into an inverted impact index, search
with dot-product scoring under three pruning strategies (document-centric
static pruning, top-k query term selection, boolean term thresholding),
and measure the effectiveness/efficiency trade-off.
"""

__version__ = "0.1.0"

from .sparse import SparseVector, dot, from_pairs, top_k_truncate
from .index import ImpactIndex, Vocabulary, build_index, index_stats, prune_index
from .storage import load_index, save_index
from .retrieval import (
    CandidateTable,
    QueryPlan,
    SearchParams,
    SearchResult,
    plan_query,
    rank_top_n,
    retrieve_candidates,
    search,
    select_query_terms,
    threshold_filter,
)
from .bm25 import (
    CollectionStats,
    bm25_doc_impact,
    bm25_doc_vector,
    bm25_query_vector,
    bm25_query_weight,
)
from .losses import (
    Batch,
    flops_loss,
    flops_loss_grad,
    in_batch_loss,
    in_batch_loss_grad,
    joint_flops_grad,
    joint_flops_loss,
    score_matrix,
)
from .metrics import (
    EmbeddingStore,
    Judgments,
    RunResults,
    cosine,
    flops_estimate,
    latency_stats,
    mrr_at_k,
    sss_at_k,
)
from .sweep import SweepRow, SweepSpec, run_sweep

__all__ = [
    "__version__",
    "SparseVector",
    "from_pairs",
    "dot",
    "top_k_truncate",
    "Vocabulary",
    "ImpactIndex",
    "build_index",
    "prune_index",
    "index_stats",
    "save_index",
    "load_index",
    "SearchParams",
    "QueryPlan",
    "CandidateTable",
    "SearchResult",
    "select_query_terms",
    "plan_query",
    "retrieve_candidates",
    "threshold_filter",
    "rank_top_n",
    "search",
    "CollectionStats",
    "bm25_doc_impact",
    "bm25_query_weight",
    "bm25_doc_vector",
    "bm25_query_vector",
    "Batch",
    "score_matrix",
    "in_batch_loss",
    "in_batch_loss_grad",
    "flops_loss",
    "flops_loss_grad",
    "joint_flops_loss",
    "joint_flops_grad",
    "Judgments",
    "EmbeddingStore",
    "RunResults",
    "mrr_at_k",
    "cosine",
    "sss_at_k",
    "flops_estimate",
    "latency_stats",
    "SweepSpec",
    "SweepRow",
    "run_sweep",
]
