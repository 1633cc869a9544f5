"""Shared fixtures: one synthetic corpus and one set of trained artifacts
per session, reused by module tests and the acceptance suite."""

from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from triagebot.bot import load_default_department_map
from triagebot.corpus import CorpusSpec, default_schema, generate
from triagebot.evalsim import SplitSpec, out_of_time_split
from triagebot.models import TrainConfig
from triagebot.reasons import HeadConfig, make_bow_provider, train_reason_model
from triagebot.routing import RoutingPolicy, calibrate_threshold
from triagebot.tabular import FeatureSchema
from triagebot.workflows import (
    context_split,
    default_stopwords,
    max_department_scores,
    predict_tickets,
)

CORPUS_SEED = 42
CORPUS_SIZE = 5000
AMBIGUITY = 0.3

MLP_HEAD = HeadConfig(
    kind="mlp", hidden_sizes=(128,), train=TrainConfig(seed=0, max_epochs=60, patience=5)
)
LR_HEAD = HeadConfig(kind="logistic", train=TrainConfig(seed=0, max_epochs=200), C=1.0)


@pytest.fixture(scope="session")
def corpus_spec() -> CorpusSpec:
    return CorpusSpec(seed=CORPUS_SEED, size=CORPUS_SIZE, ambiguity_rate=AMBIGUITY)


@pytest.fixture(scope="session")
def corpus(corpus_spec):
    return generate(corpus_spec)


@pytest.fixture(scope="session")
def tickets(corpus):
    return corpus[0]


@pytest.fixture(scope="session")
def annotations(corpus):
    return corpus[1]


@pytest.fixture(scope="session")
def splits(tickets):
    return out_of_time_split(tickets, SplitSpec())


@pytest.fixture(scope="session")
def stopwords():
    return default_stopwords()


@pytest.fixture(scope="session")
def dept_map():
    return load_default_department_map()


@pytest.fixture(scope="session")
def context_model(annotations, stopwords):
    from triagebot.context_gate import train_context_model

    train, _ = context_split(annotations)
    return train_context_model(train, search_budget=12, stopwords=stopwords, seed=0)


@pytest.fixture(scope="session")
def context_test_split(annotations):
    _, test = context_split(annotations)
    return test


@pytest.fixture(scope="session")
def bow_provider(splits, stopwords):
    train, _, _ = splits
    return make_bow_provider([t.message for t in train], stopwords)


@pytest.fixture(scope="session")
def fusion_model(splits, bow_provider, dept_map, stopwords):
    train, val, _ = splits
    model, stats = train_reason_model(
        train, val, bow_provider, default_schema(), dept_map.by_reason,
        head=MLP_HEAD, stopwords=stopwords,
    )
    return model


@pytest.fixture(scope="session")
def text_only_model(splits, bow_provider, dept_map, stopwords):
    train, val, _ = splits
    strip = lambda rows: [replace(t, record={}) for t in rows]
    model, _ = train_reason_model(
        strip(train), strip(val), bow_provider, FeatureSchema(columns=()),
        dept_map.by_reason, head=MLP_HEAD, stopwords=stopwords,
    )
    return model


@pytest.fixture(scope="session")
def fusion_lr_model(splits, bow_provider, dept_map, stopwords):
    train, val, _ = splits
    model, _ = train_reason_model(
        train, val, bow_provider, default_schema(), dept_map.by_reason,
        head=LR_HEAD, stopwords=stopwords,
    )
    return model


@pytest.fixture(scope="session")
def oracle_model(tickets, splits, dept_map, stopwords):
    """Fusion head fed planted one-hot-of-truth embeddings."""
    from triagebot.embeddings import FileProvider

    codes = sorted({t.reason for t in tickets})
    eye = np.eye(len(codes))
    table = {t.id: eye[codes.index(t.reason)] for t in tickets}
    provider = FileProvider(table=table, dimension=len(codes))
    train, val, _ = splits
    model, _ = train_reason_model(
        train, val, provider, default_schema(), dept_map.by_reason,
        head=MLP_HEAD, stopwords=stopwords,
    )
    return model


@pytest.fixture(scope="session")
def policy(splits, fusion_model, dept_map):
    _, val, _ = splits
    kept = set(fusion_model.catalog.labels)
    rows = [t for t in val if t.reason in kept]
    scores = max_department_scores(predict_tickets(fusion_model, rows), dept_map)
    return RoutingPolicy(coverage=0.8, threshold=calibrate_threshold(scores, 0.8))


@pytest.fixture(scope="session")
def engine(context_model, fusion_model, policy):
    from triagebot.bot import build_engine

    return build_engine(context_model, fusion_model, policy, seed=0)


# ---------------------------------------------------------------------------
# Acceptance reporting: one pass/fail line per criterion
# ---------------------------------------------------------------------------

_ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def record_criterion(name: str, passed: bool, detail: str = "") -> None:
    _ACCEPTANCE_RESULTS.append((name, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE_RESULTS:
        status = "PASS" if passed else "FAIL"
        line = f"[{status}] {name}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
