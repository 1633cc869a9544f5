"""Versioned, checksummed model container.

Layout: 4-byte magic, 2-byte little-endian format version, 8-byte payload
length, payload (an npz archive holding the parameter arrays and a JSON
metadata blob), 32-byte sha256 of the payload. Arrays round-trip bit-exact.
"""

from __future__ import annotations

import hashlib
import io
import json
from pathlib import Path

import numpy as np

from ..errors import CorruptModelError, ModelFormatError, ModelVersionError
from .linear import LinearModel
from .mlp import MLPModel

MAGIC = b"TBMF"
FORMAT_VERSION = 1


def predict_proba(model: LinearModel | MLPModel, X: np.ndarray) -> np.ndarray:
    """Softmax probabilities from either model family."""
    return model.predict_proba(X)


def _pack(arrays: dict[str, np.ndarray], meta: dict) -> bytes:
    buf = io.BytesIO()
    meta_bytes = np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8)
    np.savez(buf, __meta__=meta_bytes, **arrays)
    return buf.getvalue()


def save_model(model: LinearModel | MLPModel, path: str | Path) -> None:
    if isinstance(model, LinearModel):
        meta = {"kind": "linear", "penalty": model.penalty, "C": model.C}
        arrays = {
            "weights": model.weights,
            "bias": model.bias,
            "class_weights": model.class_weights,
        }
    elif isinstance(model, MLPModel):
        meta = {"kind": "mlp", "n_layers": len(model.layers), "l2": model.l2}
        arrays = {"class_weights": model.class_weights}
        for i, (W, b) in enumerate(model.layers):
            arrays[f"W{i}"] = W
            arrays[f"b{i}"] = b
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")

    payload = _pack(arrays, meta)
    digest = hashlib.sha256(payload).digest()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(FORMAT_VERSION.to_bytes(2, "little"))
        fh.write(len(payload).to_bytes(8, "little"))
        fh.write(payload)
        fh.write(digest)


def load_model(path: str | Path) -> LinearModel | MLPModel:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 14 or blob[:4] != MAGIC:
        raise ModelFormatError(f"{path}: not a model container")
    version = int.from_bytes(blob[4:6], "little")
    if version != FORMAT_VERSION:
        raise ModelVersionError(
            f"{path}: format version {version}, this build reads {FORMAT_VERSION}"
        )
    payload_len = int.from_bytes(blob[6:14], "little")
    payload_end = 14 + payload_len
    if len(blob) < payload_end + 32:
        raise CorruptModelError(f"{path}: truncated container")
    payload = blob[14:payload_end]
    digest = blob[payload_end : payload_end + 32]
    if hashlib.sha256(payload).digest() != digest:
        raise CorruptModelError(f"{path}: checksum mismatch")

    with np.load(io.BytesIO(payload)) as npz:
        arrays = {k: npz[k] for k in npz.files}
    meta = json.loads(arrays.pop("__meta__").tobytes().decode("utf-8"))

    if meta["kind"] == "linear":
        return LinearModel(
            weights=arrays["weights"],
            bias=arrays["bias"],
            penalty=meta["penalty"],
            C=meta["C"],
            class_weights=arrays["class_weights"],
        )
    if meta["kind"] == "mlp":
        layers = [(arrays[f"W{i}"], arrays[f"b{i}"]) for i in range(meta["n_layers"])]
        return MLPModel(layers=layers, class_weights=arrays["class_weights"], l2=meta["l2"])
    raise ModelFormatError(f"{path}: unknown model kind {meta['kind']!r}")
