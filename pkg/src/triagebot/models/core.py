"""Shared numerics for the classifier family."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TrainConfig:
    """Knobs shared by both trainers; the seed fixes initialization and batch order."""

    seed: int = 0
    max_epochs: int = 200
    batch_size: int = 128
    learning_rate: float = 1e-3
    patience: int = 5
    validation_fraction: float = 0.1
    class_weight: str = "none"  # "none" | "balanced"

    def __post_init__(self):
        if self.max_epochs < 1 or self.batch_size < 1 or self.patience < 1:
            raise ValueError("max_epochs, batch_size and patience must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must be in (0, 1)")
        if self.class_weight not in ("none", "balanced"):
            raise ValueError(f"unknown class_weight mode {self.class_weight!r}")


def softmax(logits: np.ndarray) -> np.ndarray:
    """Numerically stable row-wise softmax (row max subtracted before exp)."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def one_hot(y: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((y.shape[0], n_classes), dtype=np.float64)
    out[np.arange(y.shape[0]), y] = 1.0
    return out


def log_loss(logits: np.ndarray, y: np.ndarray, sample_weights: np.ndarray | None = None) -> float:
    """Mean (optionally weighted) cross-entropy computed through log-sum-exp."""
    ls = log_softmax(logits)
    nll = -ls[np.arange(y.shape[0]), y]
    if sample_weights is not None:
        nll = nll * sample_weights
    return float(nll.mean())


def balanced_class_weights(y: np.ndarray, n_classes: int) -> np.ndarray:
    """w_c = N / (K * N_c); weights average to 1 over the training set."""
    counts = np.bincount(y, minlength=n_classes).astype(np.float64)
    if np.any(counts == 0):
        missing = np.flatnonzero(counts == 0).tolist()
        raise ValueError(f"classes {missing} are absent from the training data")
    return y.shape[0] / (n_classes * counts)


def resolve_class_weights(mode: str, y: np.ndarray, n_classes: int) -> np.ndarray:
    if mode == "balanced":
        return balanced_class_weights(y, n_classes)
    return np.ones(n_classes, dtype=np.float64)


def validate_training_inputs(X: np.ndarray, y: np.ndarray, n_classes: int) -> None:
    if X.ndim != 2:
        raise ValueError(f"X must be 2-D, got shape {X.shape}")
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"X has {X.shape[0]} rows but y has {y.shape[0]}")
    if X.shape[0] < n_classes:
        raise ValueError("need at least one sample per class")
    if y.min() < 0 or y.max() >= n_classes:
        raise ValueError("labels must lie in [0, n_classes)")
    present = np.bincount(y, minlength=n_classes)
    if np.any(present == 0):
        missing = np.flatnonzero(present == 0).tolist()
        raise ValueError(f"classes {missing} are absent from the training data")


def train_validation_split(
    X: np.ndarray, y: np.ndarray, fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Seeded shuffle split; validation gets ceil(fraction * N), at least 1 row."""
    n = X.shape[0]
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_val = max(1, int(np.ceil(fraction * n)))
    if n_val >= n:
        raise ValueError("validation split would consume the whole training set")
    val_idx, train_idx = order[:n_val], order[n_val:]
    return X[train_idx], y[train_idx], X[val_idx], y[val_idx]
