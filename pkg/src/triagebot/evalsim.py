"""Dataset splitting, accuracy metrics, hyperparameter search and reports."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from . import reportdata


@dataclass(frozen=True)
class SplitSpec:
    """Chronological split fractions; tickets are ordered by timestamp."""

    train: float = 0.8
    validation: float = 0.1
    test: float = 0.1

    def __post_init__(self):
        for f in (self.train, self.validation, self.test):
            if f <= 0:
                raise ValueError("split fractions must be positive")
        if abs(self.train + self.validation + self.test - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")


def out_of_time_split(tickets: Sequence, spec: SplitSpec = SplitSpec()):
    """Sort by timestamp ascending and cut at cumulative-fraction boundaries.

    Boundaries are floor(f_train*N) and floor((f_train+f_val)*N), so no
    ticket is lost to rounding drift and input order never matters (ties on
    timestamp break by ticket id).
    """
    def key(t):
        ts = getattr(t, "timestamp", None)
        if ts is None:
            raise ValueError("every ticket must carry a timestamp")
        return (ts, getattr(t, "id", ""))

    ordered = sorted(tickets, key=key)
    n = len(ordered)
    cut1 = math.floor(spec.train * n)
    cut2 = math.floor((spec.train + spec.validation) * n)
    return ordered[:cut1], ordered[cut1:cut2], ordered[cut2:]


def topk_accuracy(predictions: Sequence[Sequence], truths: Sequence, k: int) -> float:
    """Fraction of rows whose truth appears among the first k predictions."""
    if len(predictions) != len(truths):
        raise ValueError("predictions and truths must have the same length")
    if not truths:
        raise ValueError("cannot compute accuracy on an empty set")
    hits = sum(1 for ranked, truth in zip(predictions, truths) if truth in ranked[:k])
    return hits / len(truths)


def department_accuracy(
    reason_probabilities: Sequence[Mapping[str, float]],
    department_map: Mapping[str, str],
    truth_departments: Sequence[str],
    k: int,
) -> float:
    """Top-k accuracy over departments ranked by summed reason probability."""
    from .routing import department_scores

    if len(reason_probabilities) != len(truth_departments):
        raise ValueError("predictions and truths must have the same length")
    ranked_rows = []
    for probs in reason_probabilities:
        scores = department_scores(probs, department_map)
        ranked = sorted(scores, key=lambda d: (-scores[d], d))
        ranked_rows.append(ranked)
    return topk_accuracy(ranked_rows, truth_departments, k)


@dataclass(frozen=True)
class TransferReport:
    """Transfer rate over auto-routed tickets; None when nothing was auto-routed."""

    rate: float | None
    coverage: float
    n_auto: int
    n_total: int


def transfer_rate(decisions: Sequence, truth_departments: Sequence[str]) -> TransferReport:
    """Fraction of auto-routed tickets sent to the wrong department.

    Human-triaged tickets are excluded from both numerator and denominator;
    coverage reports how many tickets were auto-routed at all.
    """
    if len(decisions) != len(truth_departments):
        raise ValueError("decisions and truths must have the same length")
    n_auto = 0
    n_wrong = 0
    for decision, truth in zip(decisions, truth_departments):
        if decision.auto_routed:
            n_auto += 1
            if decision.department != truth:
                n_wrong += 1
    n = len(decisions)
    if n_auto == 0:
        return TransferReport(rate=None, coverage=0.0, n_auto=0, n_total=n)
    return TransferReport(rate=n_wrong / n_auto, coverage=n_auto / n, n_auto=n_auto, n_total=n)


@dataclass(frozen=True)
class SearchSpace:
    """Named hyperparameters; values are explicit choices or (low, high) log-ranges."""

    choices: Mapping[str, Sequence[Any]] = field(default_factory=dict)
    log_ranges: Mapping[str, tuple[float, float]] = field(default_factory=dict)
    budget: int = 100

    def __post_init__(self):
        if self.budget < 1:
            raise ValueError("budget must be >= 1")
        for name, values in self.choices.items():
            if len(values) == 0:
                raise ValueError(f"choice {name!r} has no values")
        for name, (lo, hi) in self.log_ranges.items():
            if lo <= 0 or hi < lo:
                raise ValueError(f"log range {name!r} must satisfy 0 < low <= high")


@dataclass(frozen=True)
class SearchTraceEntry:
    index: int
    config: dict[str, Any]
    score: float | None
    error: str | None = None


@dataclass(frozen=True)
class SearchResult:
    best_config: dict[str, Any]
    best_score: float
    trace: tuple[SearchTraceEntry, ...]


def _grid_configs(space: SearchSpace, grid_points: int = 5) -> list[dict[str, Any]]:
    names: list[str] = []
    value_lists: list[list[Any]] = []
    for name, values in space.choices.items():
        names.append(name)
        value_lists.append(list(values))
    for name, (lo, hi) in space.log_ranges.items():
        names.append(name)
        value_lists.append(list(np.geomspace(lo, hi, num=grid_points)))
    return [dict(zip(names, combo)) for combo in itertools.product(*value_lists)]


def _random_configs(space: SearchSpace, n: int, seed: int) -> list[dict[str, Any]]:
    rng = np.random.default_rng(seed)
    configs = []
    for _ in range(n):
        config: dict[str, Any] = {}
        for name, values in space.choices.items():
            config[name] = values[int(rng.integers(0, len(values)))]
        for name, (lo, hi) in space.log_ranges.items():
            config[name] = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        configs.append(config)
    return configs


def search(
    space: SearchSpace,
    objective: Callable[[dict[str, Any]], float],
    strategy: str = "random",
    seed: int = 0,
    grid_points: int = 5,
) -> SearchResult:
    """Evaluate up to space.budget configurations and return the argmax.

    strategy "grid" walks the cartesian product in a stable order (log
    ranges discretized to grid_points); "random" samples with the given
    seed. A failing objective is recorded in the trace and skipped.
    """
    if strategy == "grid":
        configs = _grid_configs(space, grid_points)[: space.budget]
    elif strategy == "random":
        configs = _random_configs(space, space.budget, seed)
    else:
        raise ValueError(f"unknown search strategy {strategy!r}")

    trace: list[SearchTraceEntry] = []
    best: tuple[float, dict[str, Any]] | None = None
    for index, config in enumerate(configs):
        try:
            score = float(objective(config))
        except Exception as exc:  # objective failures are data, not crashes
            trace.append(SearchTraceEntry(index=index, config=config, score=None, error=str(exc)))
            continue
        trace.append(SearchTraceEntry(index=index, config=config, score=score))
        if best is None or score > best[0]:
            best = (score, config)
    if best is None:
        raise RuntimeError("every configuration failed; nothing to return")
    return SearchResult(best_config=best[1], best_score=best[0], trace=tuple(trace))


@dataclass(frozen=True)
class MetricReport:
    """Evaluation summary for one trained configuration."""

    reason_top1: float
    reason_top3: float
    dept_top1: float
    dept_top3: float
    transfer: TransferReport | None = None
    config_fingerprint: str = ""
    per_class_support: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for rate in (self.reason_top1, self.reason_top3, self.dept_top1, self.dept_top3):
            if not 0.0 <= rate <= 1.0:
                raise ValueError("accuracy rates must lie in [0, 1]")

    def as_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "reason_top1": self.reason_top1,
            "reason_top3": self.reason_top3,
            "dept_top1": self.dept_top1,
            "dept_top3": self.dept_top3,
            "config_fingerprint": self.config_fingerprint,
        }
        if self.transfer is not None:
            out["transfer_rate"] = self.transfer.rate
            out["coverage"] = self.transfer.coverage
        return out


def _pct(x: float | None) -> str:
    return "--" if x is None else f"{100.0 * x:.1f}%"


def render_report(
    metrics: Mapping[str, MetricReport],
    include_reference: bool = True,
) -> str:
    """Aligned text tables; optionally appends the reference results blocks."""
    lines: list[str] = []
    header = f"{'Model':<28} {'Top-1':>7} {'Top-3':>7} {'Dept-1':>7} {'Dept-3':>7} {'Transf.':>8} {'Cover':>7}"
    lines.append("== Accuracy on the held-out test split ==")
    lines.append(header)
    lines.append("-" * len(header))
    for name, report in metrics.items():
        transfer = report.transfer.rate if report.transfer else None
        coverage = report.transfer.coverage if report.transfer else None
        lines.append(
            f"{name:<28} {_pct(report.reason_top1):>7} {_pct(report.reason_top3):>7} "
            f"{_pct(report.dept_top1):>7} {_pct(report.dept_top3):>7} "
            f"{_pct(transfer):>8} {_pct(coverage):>7}"
        )
    if include_reference:
        lines.append("")
        lines.append("== Reference: production classifier results ==")
        lines.append(f"{'Model':<28} {'Top-1':>7} {'Top-3':>7} {'Dept-1':>7} {'Dept-3':>7}")
        for name, row in reportdata.REFERENCE_CLASSIFIERS.items():
            lines.append(
                f"{name:<28} {_pct(row['top1']):>7} {_pct(row['top3']):>7} "
                f"{_pct(row['dept_top1']):>7} {_pct(row['dept_top3']):>7}"
            )
        lines.append("")
        lines.append("== Reference: production routing results ==")
        lines.append(f"{'Strategy':<28} {'Transf.':>8} {'Msg/ticket':>11}")
        for name, row in reportdata.REFERENCE_PRODUCTION.items():
            lines.append(f"{name:<28} {_pct(row['transfer_rate']):>8} {row['avg_msgs']:>11}")
    return "\n".join(lines) + "\n"
