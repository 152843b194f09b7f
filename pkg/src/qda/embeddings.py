"""Precomputed sentence-embedding matrices and the QDAE on-disk format.

Embedding computation happens elsewhere (any external model); this module
ingests, validates, and serves the resulting n x d float32 matrix, row-aligned
with the corpus sentence ids.

QDAE v1 layout, all little-endian:
    magic   4 bytes  b"QDAE"
    version u32      1
    n       u64      rows
    d       u32      columns
    tag_len u16      length of model tag in bytes
    tag     UTF-8    model tag (e.g. "all-mpnet-base-v2")
    payload n*d float32, row-major
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"QDAE"
VERSION = 1
_HEADER = struct.Struct("<4sIQIH")


class EmbeddingFormatError(ValueError):
    """Raised for unreadable, truncated, or invalid embedding files."""


@dataclass
class EmbeddingMatrix:
    data: np.ndarray  # (n, d) float32
    model_tag: str = ""

    def __post_init__(self) -> None:
        self.data = np.ascontiguousarray(self.data, dtype=np.float32)
        if self.data.ndim != 2:
            raise EmbeddingFormatError(f"embedding matrix must be 2-D, got shape {self.data.shape}")

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


def write_embeddings(m: EmbeddingMatrix, path: str | Path) -> None:
    tag = m.model_tag.encode("utf-8")
    if len(tag) > 0xFFFF:
        raise EmbeddingFormatError("model_tag too long")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, m.n, m.d, len(tag)))
        fh.write(tag)
        fh.write(np.ascontiguousarray(m.data, dtype="<f4").tobytes())


def load_embeddings(path: str | Path) -> EmbeddingMatrix:
    """Load a QDAE file, falling back to CSV when the magic does not match
    but the payload parses as comma-separated decimals."""
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != MAGIC:
        return _load_csv(path, raw)
    if len(raw) < _HEADER.size:
        raise EmbeddingFormatError(f"truncated file: {path}")
    _, version, n, d, tag_len = _HEADER.unpack_from(raw)
    if version != VERSION:
        raise EmbeddingFormatError(f"unsupported QDAE version {version}")
    offset = _HEADER.size + tag_len
    if len(raw) < offset:
        raise EmbeddingFormatError(f"truncated file: {path}")
    tag = raw[_HEADER.size : offset].decode("utf-8")
    expected = n * d * 4
    payload = raw[offset:]
    if len(payload) != expected:
        raise EmbeddingFormatError(
            f"truncated file: {path} (payload {len(payload)} bytes, expected {expected})"
        )
    data = np.frombuffer(payload, dtype="<f4").reshape(n, d).copy()
    return _validated(data, tag, path)


def _load_csv(path: Path, raw: bytes) -> EmbeddingMatrix:
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EmbeddingFormatError(f"not an embedding file: {path}") from exc
    rows = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rows.append([float(cell) for cell in line.split(",")])
        except ValueError as exc:
            if not rows:
                # First data line isn't numeric: this isn't vector CSV at all.
                raise EmbeddingFormatError(f"not an embedding file: {path}") from exc
            raise EmbeddingFormatError(f"invalid vector at row {lineno}: {path}") from exc
    if not rows:
        raise EmbeddingFormatError(f"not an embedding file: {path}")
    width = len(rows[0])
    if width < 1 or any(len(r) != width for r in rows):
        raise EmbeddingFormatError(f"ragged CSV embedding file: {path}")
    return _validated(np.asarray(rows, dtype=np.float32), path.stem, path)


def _validated(data: np.ndarray, tag: str, path: Path) -> EmbeddingMatrix:
    finite = np.isfinite(data).all(axis=1)
    if not finite.all():
        row = int(np.flatnonzero(~finite)[0])
        raise EmbeddingFormatError(f"invalid vector at row {row} in {path}")
    return EmbeddingMatrix(data, tag)


def validate_alignment(sentence_count: int, m: EmbeddingMatrix) -> None:
    """Check the matrix is row-aligned with the corpus, else raise."""
    if sentence_count <= 0:
        raise ValueError("empty corpus")
    if m.n != sentence_count:
        raise ValueError(f"embedding rows {m.n} != sentences {sentence_count}")


def cosine_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """u.v / (|u||v|), in [-1, 1]. Zero-norm vectors are a domain error."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"shape mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine similarity undefined for zero-norm vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))
