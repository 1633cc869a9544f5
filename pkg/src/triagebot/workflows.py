"""End-to-end pipelines: train, persist, load and evaluate the artifacts.

Bundles are directories so each piece (vocabulary, classifier container,
tabular transform, label catalog) stays in its own documented format.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import corpus as corpus_mod
from .context_gate import ContextModel, train_context_model
from .embeddings import BowProvider, EmbeddingProvider, FileProvider, RemoteProvider
from .errors import ConfigError
from .evalsim import (
    MetricReport,
    SplitSpec,
    TransferReport,
    out_of_time_split,
    topk_accuracy,
    transfer_rate,
)
from .models import load_model, save_model
from .reasons import (
    HeadConfig,
    LabelCatalog,
    Prediction,
    ReasonModel,
    make_bow_provider,
    predict_reasons,
    train_reason_model,
)
from .routing import (
    DepartmentMap,
    HeuristicLookup,
    RoutingDecision,
    RoutingPolicy,
    RuleSet,
    calibrate_threshold,
    department_scores,
    heuristic_route,
    route,
)
from .tabular import (
    CATEGORICAL,
    Column,
    FeatureSchema,
    FittedTransform,
    _CategoricalEncoding,
    _NumericEncoding,
)
from .text import Vocabulary, load_stopwords

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Tabular transform serialization
# ---------------------------------------------------------------------------

def transform_to_dict(fitted: FittedTransform) -> dict:
    columns = []
    for column, enc in zip(fitted.schema, fitted.encodings):
        item: dict = {"name": column.name, "kind": column.kind}
        if column.categories:
            item["categories"] = list(column.categories)
        if isinstance(enc, _CategoricalEncoding):
            item["encoding"] = {"offsets": dict(enc.offsets), "unknown_offset": enc.unknown_offset}
        else:
            item["encoding"] = {"mean": enc.mean, "std": enc.std}
        columns.append(item)
    return {"columns": columns}


def transform_from_dict(doc: dict) -> FittedTransform:
    columns = []
    encodings: list[_CategoricalEncoding | _NumericEncoding] = []
    for item in doc["columns"]:
        columns.append(
            Column(
                name=item["name"],
                kind=item["kind"],
                categories=tuple(item.get("categories", ())),
            )
        )
        enc = item["encoding"]
        if item["kind"] == CATEGORICAL:
            encodings.append(
                _CategoricalEncoding(
                    offsets={str(k): int(v) for k, v in enc["offsets"].items()},
                    unknown_offset=int(enc["unknown_offset"]),
                )
            )
        else:
            encodings.append(_NumericEncoding(mean=float(enc["mean"]), std=float(enc["std"])))
    return FittedTransform(schema=FeatureSchema(columns=tuple(columns)), encodings=tuple(encodings))


# ---------------------------------------------------------------------------
# Bundles
# ---------------------------------------------------------------------------

def save_context_bundle(model: ContextModel, directory: str | Path) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    model.vocabulary.save(directory / "vocabulary.tsv")
    save_model(model.model, directory / "classifier.tbm")
    (directory / "stopwords.txt").write_text(
        "\n".join(sorted(model.stopwords)) + "\n", encoding="utf-8"
    )
    (directory / "meta.json").write_text(
        json.dumps({"kind": "context", "threshold": model.threshold, "ngram_max": 3}) + "\n",
        encoding="utf-8",
    )


def load_context_bundle(directory: str | Path) -> ContextModel:
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    if meta.get("kind") != "context":
        raise ConfigError(f"{directory} is not a context-model bundle")
    vocabulary = Vocabulary.load(directory / "vocabulary.tsv", ngram_max=meta["ngram_max"])
    classifier = load_model(directory / "classifier.tbm")
    stopwords = load_stopwords(directory / "stopwords.txt")
    return ContextModel(
        vocabulary=vocabulary, model=classifier, threshold=meta["threshold"], stopwords=stopwords
    )


def _provider_meta(provider: EmbeddingProvider) -> dict:
    if isinstance(provider, BowProvider):
        return {"kind": "bow", "token_limit": provider.token_limit,
                "ngram_max": provider.vocabulary.ngram_max}
    if isinstance(provider, FileProvider):
        return {"kind": "file", "dimension": provider.dimension,
                "token_limit": provider.token_limit}
    if isinstance(provider, RemoteProvider):
        return {"kind": "remote", "dimension": provider.dimension, "endpoint": provider.endpoint,
                "timeout": provider.timeout, "token_limit": provider.token_limit}
    raise ConfigError(f"cannot persist provider {type(provider).__name__}")


def save_reason_bundle(model: ReasonModel, directory: str | Path,
                       embeddings_path: str | None = None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    save_model(model.head, directory / "classifier.tbm")
    (directory / "tabular.json").write_text(
        json.dumps(transform_to_dict(model.tabular)) + "\n", encoding="utf-8"
    )
    (directory / "labels.json").write_text(
        json.dumps(
            {"labels": list(model.catalog.labels),
             "department_map": dict(model.catalog.department_map)}
        ) + "\n",
        encoding="utf-8",
    )
    (directory / "stopwords.txt").write_text(
        "\n".join(sorted(model.stopwords)) + "\n", encoding="utf-8"
    )
    provider_meta = _provider_meta(model.provider)
    if provider_meta["kind"] == "bow":
        model.provider.vocabulary.save(directory / "vocabulary.tsv")  # type: ignore[attr-defined]
    if provider_meta["kind"] == "file":
        if embeddings_path is None:
            raise ConfigError("file-provider bundles need the embeddings path")
        provider_meta["embeddings"] = str(embeddings_path)
    (directory / "meta.json").write_text(
        json.dumps({"kind": "reason", "provider": provider_meta}) + "\n", encoding="utf-8"
    )


def load_reason_bundle(directory: str | Path) -> ReasonModel:
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text(encoding="utf-8"))
    if meta.get("kind") != "reason":
        raise ConfigError(f"{directory} is not a reason-model bundle")
    provider_meta = meta["provider"]
    if provider_meta["kind"] == "bow":
        vocabulary = Vocabulary.load(
            directory / "vocabulary.tsv", ngram_max=provider_meta["ngram_max"])
        provider: EmbeddingProvider = BowProvider(
            vocabulary=vocabulary, token_limit=provider_meta["token_limit"])
    elif provider_meta["kind"] == "file":
        provider = FileProvider.from_file(
            provider_meta["embeddings"], token_limit=provider_meta["token_limit"])
    elif provider_meta["kind"] == "remote":
        provider = RemoteProvider(
            endpoint=provider_meta["endpoint"],
            dimension=provider_meta["dimension"],
            timeout=provider_meta["timeout"],
            token_limit=provider_meta["token_limit"],
        )
    else:
        raise ConfigError(f"unknown provider kind {provider_meta['kind']!r}")
    head = load_model(directory / "classifier.tbm")
    fitted = transform_from_dict(
        json.loads((directory / "tabular.json").read_text(encoding="utf-8")))
    labels_doc = json.loads((directory / "labels.json").read_text(encoding="utf-8"))
    catalog = LabelCatalog(
        labels=tuple(labels_doc["labels"]), department_map=labels_doc["department_map"])
    stopwords = load_stopwords(directory / "stopwords.txt")
    return ReasonModel(
        provider=provider, tabular=fitted, head=head, catalog=catalog, stopwords=stopwords)


def save_policy(policy: RoutingPolicy, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(
            {"coverage": policy.coverage, "threshold": policy.threshold,
             "fallback_department": policy.fallback_department}
        ) + "\n",
        encoding="utf-8",
    )


def load_policy(path: str | Path) -> RoutingPolicy:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return RoutingPolicy(
        coverage=doc["coverage"],
        threshold=doc["threshold"],
        fallback_department=doc.get("fallback_department", "human_triage"),
    )


# ---------------------------------------------------------------------------
# Evaluation helpers
# ---------------------------------------------------------------------------

def predict_tickets(model: ReasonModel, tickets: Sequence) -> list[Prediction]:
    k = min(3, len(model.catalog.labels))
    return [
        predict_reasons(model, t.message, t.record, k=k, item_id=t.id) for t in tickets
    ]


def decide_tickets(
    predictions: Sequence[Prediction],
    dept_map: DepartmentMap,
    policy: RoutingPolicy,
    rules: RuleSet = RuleSet(),
) -> list[RoutingDecision]:
    decisions = []
    for prediction in predictions:
        scores = department_scores(prediction.probabilities, dept_map)
        decisions.append(
            route(scores, policy, rules, slots={}, top_reasons=list(prediction.top)))
    return decisions


def heuristic_decisions(
    tickets: Sequence, lookup: HeuristicLookup, threshold_note: float = 0.0
) -> list[RoutingDecision]:
    """Baseline decisions: every ticket auto-routed by the message-type lookup."""
    return [
        RoutingDecision(
            department=heuristic_route(t.record, lookup),
            auto_routed=True,
            max_score=1.0,
            top_reasons=(),
            threshold=threshold_note,
        )
        for t in tickets
    ]


def max_department_scores(predictions: Sequence[Prediction], dept_map: DepartmentMap) -> list[float]:
    return [
        max(department_scores(p.probabilities, dept_map).values()) for p in predictions
    ]


def evaluate_model(
    model: ReasonModel,
    tickets: Sequence,
    dept_map: DepartmentMap,
    policy: RoutingPolicy | None = None,
    rules: RuleSet = RuleSet(),
    fingerprint: str = "",
) -> tuple[MetricReport, list[Prediction]]:
    """Reason/department top-k accuracy and, with a policy, the transfer rate."""
    kept = set(model.catalog.labels)
    rows = [t for t in tickets if t.reason in kept]
    predictions = predict_tickets(model, rows)
    ranked_reasons = [[code for code, _ in p.top] for p in predictions]
    truths = [t.reason for t in rows]
    truth_departments = [t.department for t in rows]

    dept_ranked = []
    for p in predictions:
        scores = department_scores(p.probabilities, dept_map)
        dept_ranked.append(sorted(scores, key=lambda d: (-scores[d], d)))

    transfer: TransferReport | None = None
    if policy is not None:
        decisions = decide_tickets(predictions, dept_map, policy, rules)
        transfer = transfer_rate(decisions, truth_departments)

    support: dict[str, int] = {}
    for t in rows:
        support[t.reason] = support.get(t.reason, 0) + 1

    report = MetricReport(
        reason_top1=topk_accuracy(ranked_reasons, truths, 1),
        reason_top3=topk_accuracy(ranked_reasons, truths, min(3, len(model.catalog.labels))),
        dept_top1=topk_accuracy(dept_ranked, truth_departments, 1),
        dept_top3=topk_accuracy(dept_ranked, truth_departments, 3),
        transfer=transfer,
        config_fingerprint=fingerprint,
        per_class_support=support,
    )
    return report, predictions


# ---------------------------------------------------------------------------
# Orchestration used by the CLI (and by the acceptance fixtures)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ArtifactPaths:
    root: Path

    @property
    def tickets(self) -> Path:
        return self.root / "corpus" / "tickets.tsv"

    @property
    def annotations(self) -> Path:
        return self.root / "corpus" / "context_annotations.tsv"

    @property
    def embeddings(self) -> Path:
        return self.root / "corpus" / "embeddings.emb"

    @property
    def context_bundle(self) -> Path:
        return self.root / "models" / "context"

    @property
    def reason_bundle(self) -> Path:
        return self.root / "models" / "reason"

    @property
    def policy(self) -> Path:
        return self.root / "policy.json"

    @property
    def report_txt(self) -> Path:
        return self.root / "report.txt"

    @property
    def metrics_json(self) -> Path:
        return self.root / "metrics.json"


DEFAULT_SPLIT = SplitSpec(train=0.8, validation=0.1, test=0.1)


def default_stopwords() -> frozenset[str]:
    from .bot import asset_path

    return load_stopwords(asset_path("stopwords_pt.txt"))


def split_tickets(tickets: Sequence, spec: SplitSpec = DEFAULT_SPLIT):
    return out_of_time_split(tickets, spec)


def generate_corpus_files(spec: corpus_mod.CorpusSpec, paths: ArtifactPaths) -> dict:
    """Write tickets, context annotations and the fixture embedding file."""
    from .context_gate import write_annotations
    from .embeddings import write_embedding_file, write_embedding_text

    paths.tickets.parent.mkdir(parents=True, exist_ok=True)
    tickets, annotations = corpus_mod.generate(spec)
    corpus_mod.write_dataset(tickets, paths.tickets)
    write_annotations(annotations, paths.annotations)
    table = corpus_mod.fixture_embeddings(tickets, spec)
    write_embedding_file(table, spec.embedding_dim, paths.embeddings)
    write_embedding_text(table, spec.embedding_dim, Path(str(paths.embeddings) + ".txt"))
    return {
        "tickets": len(tickets),
        "annotations": len(annotations),
        "embedding_dim": spec.embedding_dim,
    }


def context_split(annotations: Sequence, seed: int = 7, test_fraction: float = 0.2):
    """Seeded shuffle split of the annotated messages into train/test."""
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(annotations))
    n_test = int(test_fraction * len(annotations))
    test_idx = set(order[:n_test].tolist())
    train = [annotations[i] for i in range(len(annotations)) if i not in test_idx]
    test = [annotations[i] for i in sorted(test_idx)]
    return train, test


def train_context_pipeline(
    paths: ArtifactPaths,
    seed: int = 0,
    search_budget: int = 12,
) -> dict:
    """Train the context gate from the annotation file and persist the bundle."""
    from .context_gate import evaluate_context, map_labels, read_annotations

    annotations = read_annotations(paths.annotations)
    train, test = context_split(annotations)
    stopwords = default_stopwords()
    model = train_context_model(train, search_budget=search_budget,
                                stopwords=stopwords, seed=seed)
    test_set = map_labels(test)
    correct = sum(
        1
        for message, label in zip(test_set.messages, test_set.labels)
        if int(evaluate_context(model, message)[0]) == label
    )
    accuracy = correct / len(test_set.labels) if test_set.labels else float("nan")
    save_context_bundle(model, paths.context_bundle)
    logger.info("context gate test accuracy: %.4f", accuracy)
    return {"test_accuracy": accuracy, "train_rows": len(train), "test_rows": len(test)}


def make_provider(
    kind: str,
    train_tickets: Sequence,
    paths: ArtifactPaths,
    stopwords: frozenset[str],
    endpoint: str | None = None,
    dimension: int | None = None,
) -> EmbeddingProvider:
    if kind == "bow":
        return make_bow_provider([t.message for t in train_tickets], stopwords)
    if kind == "file":
        return FileProvider.from_file(paths.embeddings)
    if kind == "remote":
        if endpoint is None or dimension is None:
            raise ConfigError("remote provider needs --endpoint and --dimension")
        return RemoteProvider(endpoint=endpoint, dimension=dimension)
    raise ConfigError(f"unknown provider kind {kind!r}")


def train_reason_pipeline(
    paths: ArtifactPaths,
    provider_kind: str = "bow",
    head: HeadConfig | None = None,
    min_class_count: int = 50,
    endpoint: str | None = None,
    dimension: int | None = None,
) -> dict:
    """Train the fusion model on the out-of-time train/validation splits."""
    tickets = list(corpus_mod.read_dataset(paths.tickets))
    train, validation, _ = split_tickets(tickets)
    stopwords = default_stopwords()
    provider = make_provider(provider_kind, train, paths, stopwords, endpoint, dimension)
    dept_map = _default_dept_map()
    model, stats = train_reason_model(
        train, validation, provider,
        schema=corpus_mod.default_schema(),
        department_map=dept_map.by_reason,
        head=head or HeadConfig(),
        min_class_count=min_class_count,
        stopwords=stopwords,
    )
    save_reason_bundle(
        model, paths.reason_bundle,
        embeddings_path=str(paths.embeddings) if provider_kind == "file" else None,
    )
    return {k: v for k, v in stats.items() if k != "labels"} | {
        "n_labels": len(stats["labels"]), "provider": provider_kind,
    }


def calibrate_pipeline(paths: ArtifactPaths, coverage: float = 0.8) -> dict:
    """Store the department-score threshold hit by the requested coverage."""
    tickets = list(corpus_mod.read_dataset(paths.tickets))
    _, validation, _ = split_tickets(tickets)
    model = load_reason_bundle(paths.reason_bundle)
    dept_map = _default_dept_map()
    kept = set(model.catalog.labels)
    rows = [t for t in validation if t.reason in kept]
    predictions = predict_tickets(model, rows)
    scores = max_department_scores(predictions, dept_map)
    threshold = calibrate_threshold(scores, coverage)
    policy = RoutingPolicy(coverage=coverage, threshold=threshold)
    save_policy(policy, paths.policy)
    achieved = sum(1 for s in scores if s >= threshold) / len(scores)
    logger.info("calibrated threshold %.6f (coverage %.4f on validation)", threshold, achieved)
    return {"threshold": threshold, "coverage": coverage, "achieved_coverage": achieved}


def evaluate_pipeline(paths: ArtifactPaths, rules: RuleSet = RuleSet(),
                      include_reference: bool = True) -> dict:
    """Evaluate the persisted model on the test split and render the report."""
    from .evalsim import render_report

    tickets = list(corpus_mod.read_dataset(paths.tickets))
    _, _, test = split_tickets(tickets)
    model = load_reason_bundle(paths.reason_bundle)
    dept_map = _default_dept_map()
    policy = load_policy(paths.policy) if paths.policy.exists() else None
    report, predictions = evaluate_model(
        model, test, dept_map, policy, rules, fingerprint=paths.reason_bundle.name)

    kept = set(model.catalog.labels)
    rows = [t for t in test if t.reason in kept]
    metrics = {"fusion": report}

    from .bot import asset_path

    lookup = HeuristicLookup.from_file(asset_path("heuristic_lookup.yaml"))
    heuristic = heuristic_decisions(rows, lookup)
    heuristic_transfer = transfer_rate(heuristic, [t.department for t in rows])

    text = render_report(metrics, include_reference=include_reference)
    text += "\n== Heuristic baseline on the same split ==\n"
    text += (
        f"transfer rate {100.0 * (heuristic_transfer.rate or 0.0):.1f}% "
        f"at coverage {100.0 * heuristic_transfer.coverage:.1f}%\n"
    )
    paths.report_txt.write_text(text, encoding="utf-8")
    doc = {
        "fusion": report.as_dict(),
        "heuristic": {
            "transfer_rate": heuristic_transfer.rate,
            "coverage": heuristic_transfer.coverage,
        },
    }
    paths.metrics_json.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return doc


def _default_dept_map() -> DepartmentMap:
    from .bot import load_default_department_map

    return load_default_department_map()


def load_engine_from_artifacts(paths: ArtifactPaths, deterministic_seed: int = 0,
                               rules: RuleSet = RuleSet()):
    """Build the dialog engine from persisted bundles (serve entrypoint)."""
    from .bot import build_engine

    context_model = load_context_bundle(paths.context_bundle)
    reason_model = load_reason_bundle(paths.reason_bundle)
    policy = load_policy(paths.policy)
    return build_engine(
        context_model, reason_model, policy, rules=rules, seed=deterministic_seed)
