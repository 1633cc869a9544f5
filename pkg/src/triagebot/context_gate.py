"""Binary gate deciding whether a first message carries enough context.

Annotations come in four flavors (has_context, no_context, returning_client,
low_value); training collapses them to a binary target, dropping returning
clients. The model is a 3-gram bag-of-words logistic regression with a
capped vocabulary and a configurable decision threshold.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataFormatError
from .evalsim import SearchSpace, search
from .models import LinearModel, TrainConfig, train_logistic
from .text import Vocabulary, build_vocabulary, preprocess, vectorize

logger = logging.getLogger(__name__)

LABELS = ("has_context", "no_context", "returning_client", "low_value")
POSITIVE = "has_context"
DROPPED = "returning_client"

VOCAB_SIZE = 5000
NGRAM_MAX = 3


@dataclass(frozen=True)
class ContextAnnotation:
    message: str
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValueError(f"unknown context label {self.label!r}")


@dataclass(frozen=True)
class BinaryDataset:
    messages: tuple[str, ...]
    labels: tuple[int, ...]  # 1 = has context
    n_positive: int
    n_negative: int
    n_dropped: int


def map_labels(annotations: Iterable[ContextAnnotation]) -> BinaryDataset:
    """has_context -> 1; no_context and low_value -> 0; returning dropped."""
    messages: list[str] = []
    labels: list[int] = []
    dropped = 0
    for ann in annotations:
        if ann.label == DROPPED:
            dropped += 1
            continue
        messages.append(ann.message)
        labels.append(1 if ann.label == POSITIVE else 0)
    n_pos = sum(labels)
    dataset = BinaryDataset(
        messages=tuple(messages),
        labels=tuple(labels),
        n_positive=n_pos,
        n_negative=len(labels) - n_pos,
        n_dropped=dropped,
    )
    if not labels:
        logger.warning("context dataset is empty after dropping returning-client rows")
    logger.info(
        "context labels: %d positive, %d negative, %d dropped",
        dataset.n_positive, dataset.n_negative, dataset.n_dropped,
    )
    return dataset


@dataclass
class ContextModel:
    """Vocabulary + binary classifier + decision threshold."""

    vocabulary: Vocabulary
    model: LinearModel
    threshold: float = 0.5
    stopwords: frozenset[str] = frozenset()

    def __post_init__(self):
        if self.vocabulary.ngram_max != NGRAM_MAX:
            raise ValueError(f"context vocabulary must use n-grams up to {NGRAM_MAX}")
        if self.model.n_classes != 2:
            raise ValueError("context model must be binary")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")


def _features(messages: Sequence[str], vocab: Vocabulary, stopwords: frozenset[str]) -> np.ndarray:
    rows = [vectorize(preprocess(m, stopwords), vocab).to_dense() for m in messages]
    return np.stack(rows) if rows else np.zeros((0, len(vocab)))


def train_context_model(
    annotations: Sequence[ContextAnnotation],
    search_budget: int = 16,
    stopwords: frozenset[str] = frozenset(),
    seed: int = 0,
    threshold: float = 0.5,
    max_iter: int = 200,
) -> ContextModel:
    """Fit the full pipeline and pick LR hyperparameters by random search.

    The candidate grid covers C (log range), penalty type and class-weight
    mode, scored by validation accuracy on a seeded 80/20 carve-out of the
    annotations; the final model retrains on everything with the winner.
    """
    dataset = map_labels(annotations)
    y_all = np.array(dataset.labels, dtype=np.int64)
    if dataset.n_positive == 0 or dataset.n_negative == 0:
        raise ValueError("need at least one sample of each binary class")

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(y_all))
    n_val = max(1, len(y_all) // 5)
    val_idx, train_idx = order[:n_val], order[n_val:]
    train_msgs = [dataset.messages[i] for i in train_idx]
    val_msgs = [dataset.messages[i] for i in val_idx]
    y_train, y_val = y_all[train_idx], y_all[val_idx]
    if len(np.unique(y_train)) < 2:  # degenerate carve-out, train on everything
        train_msgs, y_train = list(dataset.messages), y_all
        val_msgs, y_val = list(dataset.messages), y_all

    tokens = [preprocess(m, stopwords) for m in train_msgs]
    vocab = build_vocabulary(tokens, n_max=NGRAM_MAX, max_size=VOCAB_SIZE)
    X_train = _features(train_msgs, vocab, stopwords)
    X_val = _features(val_msgs, vocab, stopwords)

    def objective(config) -> float:
        model = train_logistic(
            X_train, y_train,
            TrainConfig(seed=seed, max_epochs=max_iter, class_weight=config["class_weight"]),
            penalty=config["penalty"],
            C=config["C"],
        )
        return float((model.predict(X_val) == y_val).mean())

    space = SearchSpace(
        choices={"penalty": ("l2", "l1"), "class_weight": ("none", "balanced")},
        log_ranges={"C": (1e-2, 1e2)},
        budget=search_budget,
    )
    result = search(space, objective, strategy="random", seed=seed)
    best = result.best_config
    logger.info("context search: best %s at validation accuracy %.4f", best, result.best_score)

    # refit vocabulary and model on the full annotated set with the winner
    all_tokens = [preprocess(m, stopwords) for m in dataset.messages]
    vocab_full = build_vocabulary(all_tokens, n_max=NGRAM_MAX, max_size=VOCAB_SIZE)
    X_full = _features(list(dataset.messages), vocab_full, stopwords)
    model = train_logistic(
        X_full, y_all,
        TrainConfig(seed=seed, max_epochs=max_iter, class_weight=best["class_weight"]),
        penalty=best["penalty"],
        C=best["C"],
    )
    return ContextModel(vocabulary=vocab_full, model=model, threshold=threshold, stopwords=stopwords)


def evaluate_context(model: ContextModel, text: str) -> tuple[bool, float]:
    """(has_context, p_positive); positive class index is 1."""
    x = vectorize(preprocess(text, model.stopwords), model.vocabulary).to_dense()
    p_positive = float(model.model.predict_proba(x)[0, 1])
    return p_positive >= model.threshold, p_positive


def write_annotations(annotations: Iterable[ContextAnnotation], path: str | Path) -> None:
    """Tab-delimited (message, label) with header."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(["message", "label"])
        for ann in annotations:
            writer.writerow([ann.message, ann.label])


def read_annotations(path: str | Path) -> list[ContextAnnotation]:
    annotations: list[ContextAnnotation] = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh, delimiter="\t", lineterminator="\n")
        header = next(reader, None)
        if header != ["message", "label"]:
            raise DataFormatError(f"unexpected header {header!r}", line=1)
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 2:
                raise DataFormatError("expected 2 fields", line=lineno)
            try:
                annotations.append(ContextAnnotation(message=row[0], label=row[1]))
            except ValueError as exc:
                raise DataFormatError(str(exc), line=lineno) from None
    return annotations
