import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the oracles module

from spix import Vocabulary, build_index, from_pairs


@pytest.fixture
def two_doc_index():
    """The worked example used throughout: A={1:2.0, 2:1.0}, B={2:3.0}."""
    vocab = Vocabulary(["t0", "t1", "t2"])
    corpus = [
        ("A", from_pairs([(1, 2.0), (2, 1.0)]), 2),
        ("B", from_pairs([(2, 3.0)]), 1),
    ]
    return build_index(corpus, vocab=vocab)


def index_from_oracle_corpus(corpus, vocab_size=None, document_k=0):
    """Build an engine index from the oracle-form corpus
    [(doc_id, {term: weight})]; raw_length = entry count."""
    if vocab_size is None:
        vocab_size = 1 + max(
            (t for _, w in corpus for t in w), default=-1
        )
    vocab = Vocabulary(f"t{i}" for i in range(vocab_size))
    records = [
        (doc_id, from_pairs(sorted(weights.items())), len(weights))
        for doc_id, weights in corpus
    ]
    return build_index(records, vocab=vocab, document_k=document_k)
