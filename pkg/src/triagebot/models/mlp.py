"""Multilayer perceptron with rectifier hidden units and a softmax head.

Trained with mini-batch Adam, early stopping on validation top-1 accuracy
and seeded fan-in-scaled uniform initialization. With hidden_sizes=() the
model degenerates to softmax regression.
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
    train_validation_split,
    validate_training_inputs,
)


@dataclass
class MLPModel:
    """Dense layers as (weights: out x in, bias: out) pairs; ReLU between them."""

    layers: list[tuple[np.ndarray, np.ndarray]]
    class_weights: np.ndarray = field(default=None)  # type: ignore[assignment]
    l2: float = 0.0

    def __post_init__(self):
        for i in range(len(self.layers) - 1):
            if self.layers[i][0].shape[0] != self.layers[i + 1][0].shape[1]:
                raise ValueError("consecutive layer dimensions must chain")
        for W, b in self.layers:
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError("model parameters must be finite")
            if W.shape[0] != b.shape[0]:
                raise ValueError("bias length must match layer output width")
        if self.class_weights is None:
            self.class_weights = np.ones(self.layers[-1][0].shape[0], dtype=np.float64)

    @property
    def n_classes(self) -> int:
        return self.layers[-1][0].shape[0]

    @property
    def n_features(self) -> int:
        return self.layers[0][0].shape[1]

    def logits(self, X: np.ndarray) -> np.ndarray:
        h = X
        for W, b in self.layers[:-1]:
            h = np.maximum(h @ W.T + b, 0.0)
        W, b = self.layers[-1]
        return h @ W.T + b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        if not np.all(np.isfinite(X)):
            raise ValueError("input contains non-finite values")
        return softmax(self.logits(X))

    def predict(self, X: np.ndarray) -> np.ndarray:
        return self.predict_proba(X).argmax(axis=1)


def _init_layers(
    sizes: list[int], rng: np.random.Generator
) -> list[tuple[np.ndarray, np.ndarray]]:
    """Uniform(-sqrt(6/fan_in), +sqrt(6/fan_in)) weights, zero biases."""
    layers = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        limit = np.sqrt(6.0 / fan_in)
        W = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append((W, np.zeros(fan_out, dtype=np.float64)))
    return layers


def _forward(layers, X):
    """Returns activations per layer; activations[0] is the input."""
    acts = [X]
    h = X
    for W, b in layers[:-1]:
        h = np.maximum(h @ W.T + b, 0.0)
        acts.append(h)
    W, b = layers[-1]
    acts.append(h @ W.T + b)  # raw logits last
    return acts


def _backward(layers, acts, y, sw, l2, n_total):
    """Gradients of weighted mean CE (+ l2) w.r.t. every layer."""
    n = acts[0].shape[0]
    K = layers[-1][0].shape[0]
    delta = (softmax(acts[-1]) - one_hot(y, K)) * sw[:, None] / n
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(layers)  # type: ignore[list-item]
    for i in range(len(layers) - 1, -1, -1):
        W, _ = layers[i]
        gW = delta.T @ acts[i]
        if l2 > 0.0:
            gW = gW + l2 * W / n_total
        gb = delta.sum(axis=0)
        grads[i] = (gW, gb)
        if i > 0:
            delta = (delta @ W) * (acts[i] > 0.0)
    return grads


def mlp_loss(model: MLPModel, X: np.ndarray, y: np.ndarray) -> float:
    sw = model.class_weights[np.asarray(y)]
    loss = log_loss(model.logits(np.asarray(X, dtype=np.float64)), y, sw)
    if model.l2 > 0.0:
        loss += 0.5 * model.l2 * sum(float(np.sum(W * W)) for W, _ in model.layers) / X.shape[0]
    return loss


def mlp_loss_and_grads(
    model: MLPModel, X: np.ndarray, y: np.ndarray
) -> tuple[float, list[np.ndarray]]:
    """Loss plus flat gradient list [W0, b0, W1, b1, ...] for the checker."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    sw = model.class_weights[y]
    acts = _forward(model.layers, X)
    loss = log_loss(acts[-1], y, sw)
    if model.l2 > 0.0:
        loss += 0.5 * model.l2 * sum(float(np.sum(W * W)) for W, _ in model.layers) / X.shape[0]
    grads = _backward(model.layers, acts, y, sw, model.l2, X.shape[0])
    flat: list[np.ndarray] = []
    for gW, gb in grads:
        flat.extend([gW, gb])
    return loss, flat


def train_mlp(
    X: np.ndarray,
    y: np.ndarray,
    config: TrainConfig | None = None,
    hidden_sizes: tuple[int, ...] = (256,),
    l2: float = 0.0,
    n_classes: int | None = None,
    validation: tuple[np.ndarray, np.ndarray] | None = None,
) -> MLPModel:
    """Mini-batch Adam with early stopping on validation top-1 accuracy.

    If no explicit validation set is given, config.validation_fraction rows
    are carved off with the config seed. Deterministic given the seed (and a
    single BLAS thread). Raises on divergence (non-finite loss).
    """
    config = config or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    K = n_classes if n_classes is not None else int(y.max()) + 1
    if K < 2:
        raise ValueError("need at least 2 classes")
    validate_training_inputs(X, y, K)
    class_w = resolve_class_weights(config.class_weight, y, K)

    if validation is not None:
        X_tr, y_tr = X, y
        X_val, y_val = np.asarray(validation[0], dtype=np.float64), np.asarray(validation[1])
    elif X.shape[0] >= 20:
        X_tr, y_tr, X_val, y_val = train_validation_split(
            X, y, config.validation_fraction, config.seed
        )
        if np.unique(y_tr).size < K:
            # tiny datasets: splitting lost a class, fall back to train-as-val
            X_tr, y_tr, X_val, y_val = X, y, X, y
    else:
        X_tr, y_tr, X_val, y_val = X, y, X, y

    rng = np.random.default_rng(config.seed)
    sizes = [X.shape[1], *hidden_sizes, K]
    layers = _init_layers(sizes, rng)
    model = MLPModel(layers=layers, class_weights=class_w, l2=l2)

    # Adam state per parameter tensor
    params = [p for layer in layers for p in layer]
    m = [np.zeros_like(p) for p in params]
    v = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    t = 0

    best_acc = -1.0
    best_layers = [(W.copy(), b.copy()) for W, b in layers]
    stale = 0
    n = X_tr.shape[0]
    sw_tr = class_w[y_tr]

    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            acts = _forward(layers, X_tr[idx])
            if not np.all(np.isfinite(acts[-1])):
                raise ValueError(f"training diverged at epoch {epoch}: non-finite logits")
            grads = _backward(layers, acts, y_tr[idx], sw_tr[idx], l2, n)
            t += 1
            flat_grads = [g for pair in grads for g in pair]
            for i, (p, g) in enumerate(zip(params, flat_grads)):
                m[i] = beta1 * m[i] + (1 - beta1) * g
                v[i] = beta2 * v[i] + (1 - beta2) * (g * g)
                m_hat = m[i] / (1 - beta1**t)
                v_hat = v[i] / (1 - beta2**t)
                p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + eps)

        val_acc = float((model.predict(X_val) == y_val).mean())
        if val_acc > best_acc:
            best_acc = val_acc
            best_layers = [(W.copy(), b.copy()) for W, b in layers]
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break

    return MLPModel(layers=best_layers, class_weights=class_w, l2=l2)
