"""Dense text representations behind one provider interface.

Three sources: bag-of-words built in-process, precomputed vectors read from
an embedding file, or a remote vectorizer service. Dense variants differ
only in dimension and origin, so swapping the text representation never
touches the classifier.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import DataFormatError, MissingEmbeddingError, RemoteEmbeddingError
from .text import Vocabulary, vectorize

TOKEN_LIMIT_DEFAULT = 64

_MAGIC = b"EMB1"


class EmbeddingProvider:
    """Source of dense text vectors; subclasses fix dimension and lookup."""

    kind: str
    dimension: int
    token_limit: int = TOKEN_LIMIT_DEFAULT

    def embed(self, tokens: list[str], item_id: str | None = None) -> np.ndarray:
        raise NotImplementedError


@dataclass
class BowProvider(EmbeddingProvider):
    """In-process bag-of-words counts over a fixed vocabulary."""

    vocabulary: Vocabulary
    token_limit: int = TOKEN_LIMIT_DEFAULT
    kind: str = "bow"

    @property
    def dimension(self) -> int:  # type: ignore[override]
        return len(self.vocabulary)

    def embed(self, tokens: list[str], item_id: str | None = None) -> np.ndarray:
        return vectorize(tokens[: self.token_limit], self.vocabulary).to_dense()


@dataclass
class FileProvider(EmbeddingProvider):
    """Precomputed id -> vector table; a missing id is a hard error."""

    table: Mapping[str, np.ndarray]
    dimension: int
    token_limit: int = TOKEN_LIMIT_DEFAULT
    kind: str = "file"

    def embed(self, tokens: list[str], item_id: str | None = None) -> np.ndarray:
        if item_id is None:
            raise MissingEmbeddingError("file provider needs an item id")
        vector = self.table.get(item_id)
        if vector is None:
            raise MissingEmbeddingError(f"no embedding stored for id {item_id!r}")
        return np.asarray(vector, dtype=np.float64)

    @classmethod
    def from_file(cls, path: str | Path, token_limit: int = TOKEN_LIMIT_DEFAULT) -> "FileProvider":
        table, dimension = read_embedding_file(path)
        return cls(table=table, dimension=dimension, token_limit=token_limit)


@dataclass
class RemoteProvider(EmbeddingProvider):
    """HTTP vectorizer: POST {"id": ..., "text": ...} -> {"vector": [...]}.

    A timeout or malformed answer raises; there is no silent fallback,
    routing on wrong features is worse than failing over to human triage.
    """

    endpoint: str
    dimension: int
    timeout: float = 5.0
    token_limit: int = TOKEN_LIMIT_DEFAULT
    kind: str = "remote"

    def embed(self, tokens: list[str], item_id: str | None = None) -> np.ndarray:
        import httpx

        payload = {"text": " ".join(tokens[: self.token_limit])}
        if item_id is not None:
            payload["id"] = item_id
        try:
            response = httpx.post(self.endpoint, json=payload, timeout=self.timeout)
            response.raise_for_status()
            body = response.json()
        except httpx.TimeoutException as exc:
            raise RemoteEmbeddingError(f"vectorizer timed out after {self.timeout}s") from exc
        except Exception as exc:
            raise RemoteEmbeddingError(f"vectorizer request failed: {exc}") from exc
        vector = np.asarray(body.get("vector", ()), dtype=np.float64)
        if vector.shape != (self.dimension,):
            raise RemoteEmbeddingError(
                f"vectorizer returned shape {vector.shape}, expected ({self.dimension},)"
            )
        return vector


def write_embedding_file(table: Mapping[str, np.ndarray], dimension: int, path: str | Path) -> None:
    """Binary layout: magic "EMB1", uint32 count, uint32 dim, then per row a
    uint16 id length, the UTF-8 id bytes and dim little-endian float32s."""
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<II", len(table), dimension))
        for item_id, vector in table.items():
            vector = np.asarray(vector, dtype=np.float32)
            if vector.shape != (dimension,):
                raise ValueError(f"id {item_id!r}: vector shape {vector.shape} != ({dimension},)")
            encoded = item_id.encode("utf-8")
            fh.write(struct.pack("<H", len(encoded)))
            fh.write(encoded)
            fh.write(vector.tobytes())


def read_embedding_file(path: str | Path) -> tuple[dict[str, np.ndarray], int]:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise DataFormatError(f"{path}: not an embedding file (bad magic)")
        header = fh.read(8)
        if len(header) != 8:
            raise DataFormatError(f"{path}: truncated header")
        count, dimension = struct.unpack("<II", header)
        table: dict[str, np.ndarray] = {}
        for row in range(count):
            raw_len = fh.read(2)
            if len(raw_len) != 2:
                raise DataFormatError(f"{path}: truncated at row {row}")
            (id_len,) = struct.unpack("<H", raw_len)
            encoded = fh.read(id_len)
            payload = fh.read(4 * dimension)
            if len(encoded) != id_len or len(payload) != 4 * dimension:
                raise DataFormatError(f"{path}: truncated at row {row}")
            vector = np.frombuffer(payload, dtype="<f4").astype(np.float64)
            table[encoded.decode("utf-8")] = vector
    return table, dimension


def write_embedding_text(table: Mapping[str, np.ndarray], dimension: int, path: str | Path) -> None:
    """Debug format: "count<TAB>dim" header, then "id<TAB>v1 v2 ..." rows."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table)}\t{dimension}\n")
        for item_id, vector in table.items():
            values = " ".join(repr(float(v)) for v in np.asarray(vector, dtype=np.float32))
            fh.write(f"{item_id}\t{values}\n")


def read_embedding_text(path: str | Path) -> tuple[dict[str, np.ndarray], int]:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if len(header) != 2:
            raise DataFormatError("expected 'count<TAB>dim' header", line=1)
        count, dimension = int(header[0]), int(header[1])
        table: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 2:
                raise DataFormatError("expected 'id<TAB>values'", line=lineno)
            vector = np.array([float(v) for v in parts[1].split()], dtype=np.float64)
            if vector.shape != (dimension,):
                raise DataFormatError(f"row has {vector.size} values, expected {dimension}", line=lineno)
            table[parts[0]] = vector
    if len(table) != count:
        raise DataFormatError(f"header says {count} rows, file has {len(table)}")
    return table, dimension
