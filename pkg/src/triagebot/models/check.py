"""Numerical gradient verification against central finite differences."""

from __future__ import annotations

import numpy as np

from .linear import LinearModel, linear_loss_and_grads
from .mlp import MLPModel, mlp_loss_and_grads


def _params_and_grads(model, X, y):
    if isinstance(model, LinearModel):
        loss, grads = linear_loss_and_grads(model, X, y)
        return [model.weights, model.bias], grads, lambda: linear_loss_and_grads(model, X, y)[0]
    if isinstance(model, MLPModel):
        loss, grads = mlp_loss_and_grads(model, X, y)
        params = [p for layer in model.layers for p in layer]
        return params, grads, lambda: mlp_loss_and_grads(model, X, y)[0]
    raise TypeError(f"unsupported model type {type(model).__name__}")


def gradient_check(
    model: LinearModel | MLPModel,
    X: np.ndarray,
    y: np.ndarray,
    epsilon: float = 1e-5,
    n_samples: int = 50,
    seed: int = 0,
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Samples at least n_samples parameter coordinates (all of them when the
    model is smaller than that). The relative error denominator is floored
    at 1e-4 so near-zero coordinates are compared on an absolute scale.
    """
    if not 0.0 < epsilon <= 1e-2:
        raise ValueError("epsilon must be in (0, 1e-2]")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    params, grads, loss_fn = _params_and_grads(model, X, y)

    coords = [(i, j) for i, p in enumerate(params) for j in range(p.size)]
    rng = np.random.default_rng(seed)
    if len(coords) > n_samples:
        picked = [coords[k] for k in rng.choice(len(coords), size=n_samples, replace=False)]
    else:
        picked = coords

    worst = 0.0
    for i, j in picked:
        flat = params[i].reshape(-1)
        original = flat[j]
        flat[j] = original + epsilon
        loss_plus = loss_fn()
        flat[j] = original - epsilon
        loss_minus = loss_fn()
        flat[j] = original
        numeric = (loss_plus - loss_minus) / (2.0 * epsilon)
        analytic = grads[i].reshape(-1)[j]
        rel = abs(analytic - numeric) / max(1e-4, abs(analytic), abs(numeric))
        worst = max(worst, rel)
    return worst
