"""Multinomial logistic regression trained by proximal gradient descent.

The objective is class-weighted mean cross-entropy plus penalty/(C*N), with
the bias unpenalized. Steps use backtracking line search, so the objective
is non-increasing across accepted iterations; l1 is handled by a proximal
soft-threshold after each gradient step. Parameters start at zero, which
makes training fully deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import (
    TrainConfig,
    log_loss,
    one_hot,
    resolve_class_weights,
    softmax,
    validate_training_inputs,
)

PENALTIES = ("l1", "l2")


@dataclass
class LinearModel:
    """Softmax classifier: K x D weights, K biases."""

    weights: np.ndarray
    bias: np.ndarray
    penalty: str = "l2"
    C: float = 1.0
    class_weights: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.penalty not in PENALTIES:
            raise ValueError(f"penalty must be one of {PENALTIES}")
        if self.C <= 0:
            raise ValueError("C must be positive")
        if self.weights.ndim != 2 or self.weights.shape[0] < 2:
            raise ValueError("weights must be K x D with K >= 2")
        if self.class_weights is None:
            self.class_weights = np.ones(self.weights.shape[0], dtype=np.float64)
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("model parameters must be finite")

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]

    def logits(self, X: np.ndarray) -> np.ndarray:
        return X @ self.weights.T + self.bias

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = _as_batch(X, self.n_features)
        return softmax(self.logits(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)


def _as_batch(X: np.ndarray, n_features: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != n_features:
        raise ValueError(f"expected {n_features} features, got {X.shape[1]}")
    if not np.all(np.isfinite(X)):
        raise ValueError("input contains non-finite values")
    return X


def _objective(
    W: np.ndarray,
    b: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    sw: np.ndarray,
    penalty: str,
    C: float,
) -> float:
    logits = X @ W.T + b
    data = log_loss(logits, y, sw)
    n = X.shape[0]
    if penalty == "l2":
        reg = 0.5 * float(np.sum(W * W)) / (C * n)
    else:
        reg = float(np.abs(W).sum()) / (C * n)
    return data + reg


def _smooth_gradient(
    W: np.ndarray,
    b: np.ndarray,
    X: np.ndarray,
    y: np.ndarray,
    sw: np.ndarray,
    penalty: str,
    C: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of the smooth part (data term, plus l2 if selected)."""
    n = X.shape[0]
    probs = softmax(X @ W.T + b)
    delta = (probs - one_hot(y, W.shape[0])) * sw[:, None] / n
    gW = delta.T @ X
    gb = delta.sum(axis=0)
    if penalty == "l2":
        gW = gW + W / (C * n)
    return gW, gb


def _soft_threshold(W: np.ndarray, amount: float) -> np.ndarray:
    return np.sign(W) * np.maximum(np.abs(W) - amount, 0.0)


def train_logistic(
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig | None = None,
    penalty: str = "l2",
    C: float = 1.0,
    n_classes: int | None = None,
    tol: float = 1e-7,
) -> LinearModel:
    """Fit by full-batch proximal gradient descent with backtracking.

    Stops when the relative objective improvement drops below tol or after
    config.max_epochs accepted iterations.
    """
    if penalty not in PENALTIES:
        raise ValueError(f"penalty must be one of {PENALTIES}")
    if C <= 0:
        raise ValueError("C must be positive")
    config = config or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    K = n_classes if n_classes is not None else int(y.max()) + 1
    if K < 2:
        raise ValueError("need at least 2 classes")
    validate_training_inputs(X, y, K)

    class_w = resolve_class_weights(config.class_weight, y, K)
    sw = class_w[y]
    n, d = X.shape
    W = np.zeros((K, d), dtype=np.float64)
    b = np.zeros(K, dtype=np.float64)

    # Initial step size scaled by a cheap bound on the data-term curvature.
    step = 1.0 / max(1.0, float((X * X).sum(axis=1).mean()) / 2.0)
    obj = _objective(W, b, X, y, sw, penalty, C)
    shrink_amount = 1.0 / (C * n)

    for _ in range(config.max_epochs):
        gW, gb = _smooth_gradient(W, b, X, y, sw, penalty, C)
        accepted = False
        while step > 1e-12:
            W_new = W - step * gW
            b_new = b - step * gb
            if penalty == "l1":
                W_new = _soft_threshold(W_new, step * shrink_amount)
            obj_new = _objective(W_new, b_new, X, y, sw, penalty, C)
            if obj_new <= obj:
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break
        improvement = obj - obj_new
        W, b, obj = W_new, b_new, obj_new
        step *= 1.25  # regrow after an accepted step
        if improvement < tol * max(1.0, abs(obj)):
            break

    return LinearModel(weights=W, bias=b, penalty=penalty, C=C, class_weights=class_w)


def linear_loss_and_grads(
    model: LinearModel, X: np.ndarray, y: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Smooth objective and analytic gradients, for the gradient checker.

    l1 models are checked on the data term only (the penalty is not
    differentiable at zero, where training parks many weights).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    sw = model.class_weights[y]
    penalty = model.penalty if model.penalty == "l2" else "none"
    logits = X @ model.weights.T + model.bias
    loss = log_loss(logits, y, sw)
    if penalty == "l2":
        loss += 0.5 * float(np.sum(model.weights**2)) / (model.C * X.shape[0])
    probs = softmax(logits)
    delta = (probs - one_hot(y, model.n_classes)) * sw[:, None] / X.shape[0]
    gW = delta.T @ X
    if penalty == "l2":
        gW = gW + model.weights / (model.C * X.shape[0])
    gb = delta.sum(axis=0)
    return loss, [gW, gb]
