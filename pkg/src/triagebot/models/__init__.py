"""Trainable classifiers: multinomial logistic regression and an MLP.

Both are trained from scratch on dense feature matrices with class
weighting, l1/l2 regularization, a finite-difference gradient checker and a
checksummed serialization container.
"""

from .core import TrainConfig, balanced_class_weights, log_loss, softmax
from .linear import LinearModel, train_logistic
from .mlp import MLPModel, train_mlp
from .check import gradient_check
from .io import load_model, save_model, predict_proba

__all__ = [
    "TrainConfig",
    "LinearModel",
    "MLPModel",
    "train_logistic",
    "train_mlp",
    "gradient_check",
    "save_model",
    "load_model",
    "predict_proba",
    "softmax",
    "log_loss",
    "balanced_class_weights",
]
