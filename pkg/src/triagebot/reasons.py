"""Contact-reason prediction: text representation fused with tabular features.

The text side is pluggable (bag-of-words, file-backed dense vectors or a
remote vectorizer); the tabular side is the fitted one-hot/standardize
transform; both are concatenated and fed to a softmax head (MLP or logistic
regression) over the filtered label set.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .embeddings import BowProvider, EmbeddingProvider
from .models import LinearModel, MLPModel, TrainConfig, train_logistic, train_mlp
from .tabular import FeatureSchema, FittedTransform, fit as fit_tabular, transform
from .text import build_vocabulary, preprocess

logger = logging.getLogger(__name__)

MIN_CLASS_COUNT = 50


def filter_classes(labels: Iterable[str], min_count: int = MIN_CLASS_COUNT) -> set[str]:
    """Labels with at least min_count training occurrences."""
    if min_count < 1:
        raise ValueError("min_count must be >= 1")
    counts = Counter(labels)
    kept = {label for label, count in counts.items() if count >= min_count}
    if not kept:
        raise ValueError(f"no class reaches {min_count} training samples")
    dropped = set(counts) - kept
    logger.info(
        "class filter: kept %d of %d classes (dropped %s)",
        len(kept), len(counts), sorted(dropped) or "none",
    )
    return kept


@dataclass(frozen=True)
class LabelCatalog:
    """Ordered kept labels and their department mapping."""

    labels: tuple[str, ...]
    department_map: Mapping[str, str]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("label catalog is empty")
        unmapped = [l for l in self.labels if l not in self.department_map]
        if unmapped:
            raise ValueError(f"labels without a department: {unmapped}")

    def index_of(self, label: str) -> int:
        return self.labels.index(label)


@dataclass(frozen=True)
class Prediction:
    """Descending top-k plus the full probability dict used for routing."""

    top: tuple[tuple[str, float], ...]
    probabilities: dict[str, float]

    def __post_init__(self):
        probs = [p for _, p in self.top]
        if any(b > a + 1e-12 for a, b in zip(probs, probs[1:])):
            raise ValueError("top-k probabilities must be descending")


@dataclass
class ReasonModel:
    provider: EmbeddingProvider
    tabular: FittedTransform
    head: MLPModel | LinearModel
    catalog: LabelCatalog
    stopwords: frozenset[str] = frozenset()

    def __post_init__(self):
        expected = self.provider.dimension + self.tabular.dimension
        if self.head.n_features != expected:
            raise ValueError(
                f"head expects {self.head.n_features} inputs, fusion provides {expected}")
        if self.head.n_classes != len(self.catalog.labels):
            raise ValueError("head classes must match the kept label set")


def build_features(
    text: str,
    record: Mapping,
    provider: EmbeddingProvider,
    fitted: FittedTransform,
    stopwords: frozenset[str] = frozenset(),
    item_id: str | None = None,
) -> np.ndarray:
    """[text representation || tabular vector]; provider errors propagate."""
    tokens = preprocess(text, stopwords)
    text_vec = provider.embed(tokens, item_id=item_id)
    return np.concatenate([text_vec, transform(fitted, record)])


def make_bow_provider(
    messages: Iterable[str],
    stopwords: frozenset[str] = frozenset(),
    ngram_max: int = 1,
    max_size: int = 5000,
    token_limit: int = 64,
) -> BowProvider:
    """Unigram (by default) vocabulary built from the training messages only."""
    tokens = [preprocess(m, stopwords)[:token_limit] for m in messages]
    vocab = build_vocabulary(tokens, n_max=ngram_max, max_size=max_size)
    return BowProvider(vocabulary=vocab, token_limit=token_limit)


@dataclass(frozen=True)
class HeadConfig:
    """Classifier head settings for the fusion model."""

    kind: str = "mlp"  # "mlp" | "logistic"
    hidden_sizes: tuple[int, ...] = (128,)
    train: TrainConfig = field(default_factory=lambda: TrainConfig(max_epochs=60))
    l2: float = 0.0
    penalty: str = "l2"  # logistic head only
    C: float = 1.0

    def __post_init__(self):
        if self.kind not in ("mlp", "logistic"):
            raise ValueError(f"unknown head kind {self.kind!r}")


def train_reason_model(
    train_tickets: Sequence,
    validation_tickets: Sequence,
    provider: EmbeddingProvider,
    schema: FeatureSchema,
    department_map: Mapping[str, str],
    head: HeadConfig = HeadConfig(),
    min_class_count: int = MIN_CLASS_COUNT,
    stopwords: frozenset[str] = frozenset(),
) -> tuple[ReasonModel, dict]:
    """Fit the tabular transform on train, fuse, and train the head.

    Labels under min_class_count in the training split are dropped from both
    splits. Returns the model plus a small stats dict (kept labels, counts,
    validation top-1).
    """
    kept = filter_classes([t.reason for t in train_tickets], min_class_count)
    # deterministic label order: train frequency desc, then lexicographic
    counts = Counter(t.reason for t in train_tickets)
    labels = tuple(sorted(kept, key=lambda c: (-counts[c], c)))
    catalog = LabelCatalog(labels=labels, department_map=dict(department_map))
    index = {label: i for i, label in enumerate(labels)}

    train_kept = [t for t in train_tickets if t.reason in kept]
    val_kept = [t for t in validation_tickets if t.reason in kept]
    logger.info(
        "reason training: %d/%d train rows, %d/%d validation rows after filtering",
        len(train_kept), len(train_tickets), len(val_kept), len(validation_tickets),
    )
    fitted = fit_tabular(schema, [t.record for t in train_kept])

    def fuse(tickets) -> np.ndarray:
        return np.stack([
            build_features(t.message, t.record, provider, fitted, stopwords, item_id=t.id)
            for t in tickets
        ])

    X_train = fuse(train_kept)
    y_train = np.array([index[t.reason] for t in train_kept], dtype=np.int64)
    X_val = fuse(val_kept) if val_kept else None
    y_val = np.array([index[t.reason] for t in val_kept], dtype=np.int64) if val_kept else None

    if head.kind == "mlp":
        model = train_mlp(
            X_train, y_train, head.train,
            hidden_sizes=head.hidden_sizes,
            l2=head.l2,
            n_classes=len(labels),
            validation=(X_val, y_val) if X_val is not None else None,
        )
    else:
        model = train_logistic(
            X_train, y_train, head.train,
            penalty=head.penalty, C=head.C, n_classes=len(labels),
        )

    stats = {
        "labels": labels,
        "train_rows": len(train_kept),
        "validation_rows": len(val_kept),
        "dropped_classes": sorted(set(counts) - kept),
    }
    if X_val is not None:
        stats["validation_top1"] = float(
            (model.predict_proba(X_val).argmax(axis=1) == y_val).mean())
    reason_model = ReasonModel(
        provider=provider, tabular=fitted, head=model, catalog=catalog, stopwords=stopwords)
    return reason_model, stats


def predict_reasons(
    model: ReasonModel,
    text: str,
    record: Mapping,
    k: int = 3,
    item_id: str | None = None,
) -> Prediction:
    """Descending top-k with ties broken toward the lower class index."""
    if not 1 <= k <= len(model.catalog.labels):
        raise ValueError(f"k must be in 1..{len(model.catalog.labels)}")
    x = build_features(text, record, model.provider, model.tabular, model.stopwords, item_id)
    probs = model.head.predict_proba(x)[0]
    order = sorted(range(len(probs)), key=lambda i: (-probs[i], i))
    top = tuple((model.catalog.labels[i], float(probs[i])) for i in order[:k])
    full = {label: float(p) for label, p in zip(model.catalog.labels, probs)}
    return Prediction(top=top, probabilities=full)
