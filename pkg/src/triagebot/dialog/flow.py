"""Flow definitions: states, handler bindings, transition tables."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import yaml

from ..errors import ConfigError, FlowError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class StateSpec:
    handler: str | None
    transitions: Mapping[str, str] = field(default_factory=dict)
    on_enter_template: str | None = None
    auto: bool = False  # handler runs without waiting for user input
    terminal: bool = False
    params: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class FlowDefinition:
    flow_id: str
    states: Mapping[str, StateSpec]
    initial_state: str

    @property
    def terminal_states(self) -> set[str]:
        return {name for name, spec in self.states.items() if spec.terminal}

    def validate(self, handler_names: Iterable[str]) -> None:
        """Eager invariant checks; unreachable states only warn."""
        known = set(handler_names)
        if self.initial_state not in self.states:
            raise FlowError(f"initial state {self.initial_state!r} is not declared")
        for name, spec in self.states.items():
            if spec.terminal:
                if spec.transitions:
                    raise FlowError(f"terminal state {name!r} must have no transitions")
                continue
            if spec.handler is None:
                raise FlowError(f"state {name!r} has no handler bound")
            if spec.handler not in known:
                raise FlowError(f"state {name!r} binds unknown handler {spec.handler!r}")
            if not spec.transitions:
                raise FlowError(f"non-terminal state {name!r} has no transitions")
            for decision, target in spec.transitions.items():
                if target not in self.states:
                    raise FlowError(
                        f"state {name!r}: transition {decision!r} targets "
                        f"undeclared state {target!r}")
        reachable = {self.initial_state}
        frontier = [self.initial_state]
        while frontier:
            current = frontier.pop()
            for target in self.states[current].transitions.values():
                if target not in reachable:
                    reachable.add(target)
                    frontier.append(target)
        unreachable = set(self.states) - reachable
        if unreachable:
            logger.warning("flow %s: unreachable states %s", self.flow_id, sorted(unreachable))


def load_flow(document: str | Path | dict, handler_names: Iterable[str]) -> FlowDefinition:
    """Parse a flow config (YAML text, path or parsed dict) and validate it."""
    if isinstance(document, Path):
        with open(document, encoding="utf-8") as fh:
            doc = yaml.safe_load(fh)
    elif isinstance(document, str):
        try:
            doc = yaml.safe_load(document)
        except yaml.YAMLError as exc:
            raise ConfigError(f"flow document does not parse: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict) or "flow" not in doc:
        raise ConfigError("flow document needs a top-level 'flow' map")
    body = doc["flow"]
    try:
        states = {}
        for name, raw in body["states"].items():
            raw = raw or {}
            states[name] = StateSpec(
                handler=raw.get("handler"),
                transitions=dict(raw.get("transitions", {})),
                on_enter_template=raw.get("on_enter_template"),
                auto=bool(raw.get("auto", False)),
                terminal=bool(raw.get("terminal", False)),
                params=dict(raw.get("params", {})),
            )
        flow = FlowDefinition(
            flow_id=str(body.get("id", "flow")),
            states=states,
            initial_state=body["initial_state"],
        )
    except KeyError as exc:
        raise ConfigError(f"flow document is missing {exc}") from None
    flow.validate(handler_names)
    return flow
