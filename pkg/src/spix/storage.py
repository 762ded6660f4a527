"""Index file persistence.

Layout (all little-endian):

    magic        "SPIX" (4 bytes)
    version      u32
    doc_count    u64
    vocab_size   u64
    vocab        per term, in term-id order: u32 byte length + UTF-8 bytes
    docs         per doc, in ordinal order:  u32 byte length + UTF-8
                 external id, u32 term_count, u32 raw_length
    postings     per term, ascending term id: u64 list length, then
                 (u32 doc ordinal + f32 impact) pairs
    crc          u32 CRC32C (Castagnoli) of every preceding byte

Loading is strict: wrong magic, unknown version, short files, and checksum
failures each raise their own error. load(save(x)) == x bit-exactly because
impacts are float32 both in memory and on disk.
"""

from __future__ import annotations

import os
import struct
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    ChecksumMismatchError,
    IndexFileError,
    TruncatedFileError,
    UnsupportedVersionError,
)
from .index import ImpactIndex, Vocabulary

MAGIC = b"SPIX"
FORMAT_VERSION = 1

_POSTING_DTYPE = np.dtype([("doc", "<u4"), ("impact", "<f4")])


def _make_crc_table() -> list[int]:
    poly = 0x82F63B78  # CRC-32C (Castagnoli), reflected
    table = []
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ (poly if c & 1 else 0)
        table.append(c)
    return table


_CRC_TABLE = _make_crc_table()


def crc32c(data: bytes, crc: int = 0) -> int:
    """CRC-32C over data, chainable via the crc argument."""
    table = _CRC_TABLE
    c = crc ^ 0xFFFFFFFF
    for b in data:
        c = table[(c ^ b) & 0xFF] ^ (c >> 8)
    return c ^ 0xFFFFFFFF


def index_to_bytes(index: ImpactIndex) -> bytes:
    parts = [MAGIC, struct.pack("<I", FORMAT_VERSION)]
    parts.append(struct.pack("<QQ", index.doc_count, index.vocab_size))

    for term in index.vocab:
        raw = term.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)

    term_counts = index.term_counts
    raw_lengths = index.raw_lengths
    for i, ext in enumerate(index.external_ids):
        raw = ext.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<II", int(term_counts[i]), int(raw_lengths[i])))

    for docs, imps in zip(index.posting_docs, index.posting_impacts):
        parts.append(struct.pack("<Q", len(docs)))
        rec = np.empty(len(docs), dtype=_POSTING_DTYPE)
        rec["doc"] = docs
        rec["impact"] = imps
        parts.append(rec.tobytes())

    payload = b"".join(parts)
    return payload + struct.pack("<I", crc32c(payload))


def save_index(index: ImpactIndex, destination: str | os.PathLike) -> None:
    data = index_to_bytes(index)
    path = Path(destination)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(data)
    tmp.replace(path)


class _Reader:
    def __init__(self, data: bytes, limit: int):
        self.data = data
        self.limit = limit  # payload end (checksum excluded)
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > self.limit:
            raise TruncatedFileError(
                f"needed {n} bytes at offset {self.pos}, payload ends at {self.limit}"
            )
        out = self.data[self.pos : self.pos + n]
        self.pos += n
        return out

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def string(self) -> str:
        return self.take(self.u32()).decode("utf-8")


def index_from_bytes(data: bytes) -> ImpactIndex:
    if len(data) < 4:
        raise TruncatedFileError(f"file is only {len(data)} bytes")
    if data[:4] != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r}, found {data[:4]!r}")
    if len(data) < 12:
        raise TruncatedFileError(f"file is only {len(data)} bytes")

    r = _Reader(data, limit=len(data) - 4)
    r.pos = 4
    version = r.u32()
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(
            f"format version {version}, this build reads {FORMAT_VERSION}"
        )

    doc_count = r.u64()
    vocab_size = r.u64()
    # cheap sanity before allocating: every term costs >= 4 bytes, every doc >= 12
    if vocab_size * 4 + doc_count * 12 > r.limit - r.pos:
        raise TruncatedFileError(
            f"declared {vocab_size} terms / {doc_count} docs exceed file size"
        )

    vocab = Vocabulary(r.string() for _ in range(vocab_size))
    if len(vocab) != vocab_size:
        raise IndexFileError("vocabulary contains duplicate terms")

    external_ids: list[str] = []
    term_counts = np.empty(doc_count, dtype=np.int32)
    raw_lengths = np.empty(doc_count, dtype=np.int32)
    for i in range(doc_count):
        external_ids.append(r.string())
        term_counts[i], raw_lengths[i] = struct.unpack("<II", r.take(8))

    posting_docs: list[np.ndarray] = []
    posting_impacts: list[np.ndarray] = []
    for _ in range(vocab_size):
        n = r.u64()
        rec = np.frombuffer(r.take(n * _POSTING_DTYPE.itemsize), dtype=_POSTING_DTYPE)
        posting_docs.append(rec["doc"].astype(np.int32))
        posting_impacts.append(np.array(rec["impact"], dtype=np.float32))

    if r.pos != r.limit:
        raise TruncatedFileError(
            f"{r.limit - r.pos} unexpected bytes between postings and checksum"
        )
    stored = struct.unpack("<I", data[-4:])[0]
    actual = crc32c(data[:-4])
    if stored != actual:
        raise ChecksumMismatchError(f"stored {stored:#010x}, computed {actual:#010x}")

    return ImpactIndex(
        vocab=vocab,
        external_ids=external_ids,
        term_counts=term_counts,
        raw_lengths=raw_lengths,
        posting_docs=posting_docs,
        posting_impacts=posting_impacts,
    )


def load_index(source: str | os.PathLike) -> ImpactIndex:
    return index_from_bytes(Path(source).read_bytes())
