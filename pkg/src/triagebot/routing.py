"""Department selection: probability aggregation, confidence thresholding,
business-rule overrides and the last-automatic-message heuristic baseline."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import yaml

from .errors import ConfigError


@dataclass(frozen=True)
class DepartmentMap:
    """Total mapping reason code -> department id."""

    by_reason: Mapping[str, str]
    departments: tuple[str, ...]
    display_names: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        known = set(self.departments)
        for reason, dept in self.by_reason.items():
            if dept not in known:
                raise ConfigError(f"reason {reason!r} maps to undeclared department {dept!r}")

    def department_of(self, reason: str) -> str:
        try:
            return self.by_reason[reason]
        except KeyError:
            raise ConfigError(f"reason {reason!r} is not mapped to any department") from None

    def display(self, department: str) -> str:
        return self.display_names.get(department, department)

    @classmethod
    def from_file(cls, path: str | Path) -> "DepartmentMap":
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict) or "departments" not in doc or "reasons" not in doc:
            raise ConfigError("department map needs 'departments' and 'reasons' sections")
        departments = tuple(doc["departments"].keys())
        display = {d: str(v) for d, v in doc["departments"].items()}
        return cls(by_reason=dict(doc["reasons"]), departments=departments, display_names=display)


def department_scores(
    reason_probabilities: Mapping[str, float], department_map: DepartmentMap | Mapping[str, str]
) -> dict[str, float]:
    """score(d) = sum of predicted probabilities of the reasons mapped to d."""
    mapping = department_map.by_reason if isinstance(department_map, DepartmentMap) else department_map
    scores: dict[str, float] = {}
    for reason, p in reason_probabilities.items():
        dept = mapping.get(reason)
        if dept is None:
            raise ConfigError(f"reason {reason!r} is not mapped to any department")
        scores[dept] = scores.get(dept, 0.0) + p
    return scores


def calibrate_threshold(max_scores: Sequence[float], coverage: float) -> float:
    """The ceil(coverage*N)-th largest score: the largest tau whose coverage
    on the calibration set is still >= the requested fraction."""
    if not max_scores:
        raise ValueError("cannot calibrate on an empty score list")
    if not 0.0 < coverage <= 1.0:
        raise ValueError("coverage must be in (0, 1]")
    ordered = sorted(max_scores, reverse=True)
    rank = math.ceil(coverage * len(ordered))
    return ordered[rank - 1]


@dataclass(frozen=True)
class RoutingPolicy:
    """Coverage target, its calibrated score threshold and the human fallback queue."""

    coverage: float
    threshold: float
    fallback_department: str = "human_triage"

    def __post_init__(self):
        if not 0.0 < self.coverage <= 1.0:
            raise ValueError("coverage must be in (0, 1]")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite (calibrate first)")


@dataclass(frozen=True)
class Rule:
    """One business rule; conditions test dialog-memory slots."""

    rule_id: str
    action: str  # "override" | "force_human"
    department: str | None = None
    slot: str | None = None
    equals: Any = None
    in_set: tuple | None = None
    score_at_least: float | None = None

    def __post_init__(self):
        if self.action not in ("override", "force_human"):
            raise ConfigError(f"rule {self.rule_id!r}: unknown action {self.action!r}")
        if self.action == "override" and not self.department:
            raise ConfigError(f"rule {self.rule_id!r}: override needs a department")

    def matches(self, slots: Mapping[str, Any], max_score: float) -> bool:
        if self.slot is not None:
            value = _resolve_slot(slots, self.slot)
            if self.equals is not None and value != self.equals:
                return False
            if self.in_set is not None and value not in self.in_set:
                return False
        if self.score_at_least is not None and max_score < self.score_at_least:
            return False
        return True


def _resolve_slot(slots: Mapping[str, Any], path: str) -> Any:
    """Dotted paths reach into nested dicts, e.g. "profile.agent_role"."""
    value: Any = slots
    for part in path.split("."):
        if not isinstance(value, Mapping):
            return None
        value = value.get(part)
    return value


@dataclass(frozen=True)
class RuleSet:
    """Ordered rules; the first matching rule wins."""

    rules: tuple[Rule, ...] = ()

    @classmethod
    def from_file(cls, path: str | Path) -> "RuleSet":
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
        rules = []
        for item in doc.get("rules", []):
            rules.append(
                Rule(
                    rule_id=item["id"],
                    action=item["action"],
                    department=item.get("department"),
                    slot=item.get("slot"),
                    equals=item.get("equals"),
                    in_set=tuple(item["in_set"]) if "in_set" in item else None,
                    score_at_least=item.get("score_at_least"),
                )
            )
        return cls(rules=tuple(rules))


@dataclass(frozen=True)
class RoutingDecision:
    department: str
    auto_routed: bool
    max_score: float
    top_reasons: tuple[tuple[str, float], ...]  # top-3 (reason, probability)
    threshold: float
    rule_id: str | None = None

    def as_dict(self) -> dict[str, Any]:
        return {
            "department": self.department,
            "auto_routed": self.auto_routed,
            "max_score": self.max_score,
            "top_reasons": [[r, p] for r, p in self.top_reasons],
            "threshold": self.threshold,
            "rule_id": self.rule_id,
        }


def route(
    dept_scores: Mapping[str, float],
    policy: RoutingPolicy,
    rules: RuleSet = RuleSet(),
    slots: Mapping[str, Any] | None = None,
    top_reasons: Sequence[tuple[str, float]] = (),
) -> RoutingDecision:
    """Pick a department: rules first (ordered, first match wins), otherwise
    the argmax department; confidence below the threshold goes to human
    triage with the full prediction attached either way."""
    slots = slots or {}
    if not dept_scores:
        raise ValueError("no department scores to route on")
    # argmax with deterministic tie-break on ascending department id
    best_dept = min(dept_scores, key=lambda d: (-dept_scores[d], d))
    max_score = dept_scores[best_dept]
    confident = max_score >= policy.threshold
    top3 = tuple(top_reasons[:3])

    for rule in rules.rules:
        if rule.matches(slots, max_score):
            if rule.action == "force_human":
                return RoutingDecision(
                    department=policy.fallback_department,
                    auto_routed=False,
                    max_score=max_score,
                    top_reasons=top3,
                    threshold=policy.threshold,
                    rule_id=rule.rule_id,
                )
            return RoutingDecision(
                department=rule.department,  # type: ignore[arg-type]
                auto_routed=confident,
                max_score=max_score,
                top_reasons=top3,
                threshold=policy.threshold,
                rule_id=rule.rule_id,
            )

    if not confident:
        return RoutingDecision(
            department=policy.fallback_department,
            auto_routed=False,
            max_score=max_score,
            top_reasons=top3,
            threshold=policy.threshold,
        )
    return RoutingDecision(
        department=best_dept,
        auto_routed=True,
        max_score=max_score,
        top_reasons=top3,
        threshold=policy.threshold,
    )


@dataclass(frozen=True)
class HeuristicLookup:
    """Baseline: route on the type of the last automatic message sent."""

    by_message_type: Mapping[str, str]
    default_department: str
    feature: str = "last_auto_message_type"

    @classmethod
    def from_file(cls, path: str | Path) -> "HeuristicLookup":
        with open(path, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
        if not isinstance(doc, dict) or "default_department" not in doc:
            raise ConfigError("heuristic lookup needs a 'default_department'")
        return cls(
            by_message_type=dict(doc.get("message_types", {})),
            default_department=doc["default_department"],
            feature=doc.get("feature", "last_auto_message_type"),
        )


def heuristic_route(record: Mapping[str, Any], lookup: HeuristicLookup) -> str:
    """Mapped department for the record's last automatic message type, or the
    default department when the feature is missing or unmapped."""
    value = record.get(lookup.feature)
    if value is None:
        return lookup.default_department
    return lookup.by_message_type.get(str(value), lookup.default_department)
