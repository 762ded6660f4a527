"""Exception hierarchy.

Everything raised on bad *input* (malformed files, contract violations in
caller-supplied data) derives from ``DataError`` so the CLI and service can
map it to one exit code / HTTP status without enumerating subclasses.
"""


class SpixError(Exception):
    """Base class for all spix errors."""


class DataError(SpixError):
    """Invalid caller-supplied data (maps to exit code 2 / HTTP 400)."""


# --- sparse vectors ---------------------------------------------------------

class DuplicateTermError(DataError):
    """The same term id appears more than once in one vector."""


class NegativeWeightError(DataError):
    """A term weight is negative; impact weights must be >= 0."""


class NonFiniteError(DataError):
    """A term weight is NaN or infinite."""


# --- index build / persistence ----------------------------------------------

class DuplicateDocIdError(DataError):
    """Two corpus documents share an external id."""


class IndexFileError(DataError):
    """Base for malformed index files."""


class BadMagicError(IndexFileError):
    """File does not start with the index magic bytes."""


class UnsupportedVersionError(IndexFileError):
    """Index file declares a format version this build cannot read."""


class TruncatedFileError(IndexFileError):
    """Index file ends before its declared structure does."""


class ChecksumMismatchError(IndexFileError):
    """Index file checksum does not match its contents."""


# --- retrieval ----------------------------------------------------------------

class EmptyQueryError(DataError):
    """No query terms survive pruning and vocabulary mapping."""


# --- losses -------------------------------------------------------------------

class NonSquareError(DataError):
    """Score matrix passed to the in-batch loss is not square."""


class DimensionMismatchError(DataError):
    """Operands disagree on a required dimension."""


# --- metrics ------------------------------------------------------------------

class ZeroVectorError(DataError):
    """Cosine similarity is undefined for a zero vector."""


class MissingEmbeddingError(DataError):
    """A retrieved or judged doc id has no embedding in the store."""

    def __init__(self, doc_id: str):
        super().__init__(f"no embedding for doc id {doc_id!r}")
        self.doc_id = doc_id


class NoJudgedQueriesError(DataError):
    """The judgments set contains no queries."""


class EmptySamplesError(DataError):
    """Latency statistics need at least one sample."""


class EmptyQuerySetError(DataError):
    """The FLOPS estimate needs at least one query vector."""


# --- file parsing -------------------------------------------------------------

class FileFormatError(DataError):
    """Malformed line in a corpus/query/judgments/embeddings file."""

    def __init__(self, path: str, line_no: int, reason: str):
        super().__init__(f"{path}: line {line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason
