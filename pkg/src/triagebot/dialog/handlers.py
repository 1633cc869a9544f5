"""Handler contract and registry, plus the ML-free builtin handlers."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Any, Callable, Mapping

from ..errors import ConfigError
from .memory import DialogMemory, Event

_SLOT_KEY_RE = re.compile(r"^[a-z_][a-z0-9_]*$")

# (memory snapshot, triggering event, state params) -> HandlerResult
Handler = Callable[[DialogMemory, Event, Mapping[str, Any]], "HandlerResult"]


@dataclass(frozen=True)
class HandlerResult:
    """What a handler decided: transition key, slot writes, outbound messages."""

    decision_key: str
    slot_writes: dict[str, Any] = field(default_factory=dict)
    outbound: tuple[tuple[str, dict[str, str]], ...] = ()  # (template_id, substitutions)

    def __post_init__(self):
        if not self.decision_key:
            raise ValueError("decision_key must be non-empty")
        for key in self.slot_writes:
            if not _SLOT_KEY_RE.match(key):
                raise ValueError(f"slot key {key!r} is not a valid identifier")


class HandlerRegistry:
    """Name -> handler lookup shared by every flow."""

    def __init__(self):
        self._handlers: dict[str, Handler] = {}

    def register(self, name: str, handler: Handler) -> None:
        if name in self._handlers:
            raise ConfigError(f"handler {name!r} is already registered")
        self._handlers[name] = handler

    def resolve(self, name: str) -> Handler:
        try:
            return self._handlers[name]
        except KeyError:
            raise ConfigError(f"no handler registered under {name!r}") from None

    def names(self) -> set[str]:
        return set(self._handlers)


# ---------------------------------------------------------------------------
# Builtin handlers that need no trained models
# ---------------------------------------------------------------------------

def greeter(memory: DialogMemory, event: Event, params: Mapping[str, Any]) -> HandlerResult:
    """Stores the session profile and greets."""
    profile = event.payload.get("profile") or {}
    return HandlerResult(
        decision_key="greeted",
        slot_writes={"profile": dict(profile)},
        outbound=((params.get("template", "greeting"), {}),),
    )


def form_filler(memory: DialogMemory, event: Event, params: Mapping[str, Any]) -> HandlerResult:
    """Asks for the next missing required slot; done when all are present.

    params["fields"] is an ordered list of {"slot": ..., "template": ...}.
    """
    fields = params.get("fields", ())
    for spec in fields:
        slot = spec["slot"]
        if memory.slots.get(slot) in (None, ""):
            return HandlerResult(
                decision_key="ask",
                slot_writes={"pending_field": slot},
                outbound=((spec["template"], {}),),
            )
    return HandlerResult(decision_key="complete", slot_writes={"pending_field": None})


def field_capture(memory: DialogMemory, event: Event, params: Mapping[str, Any]) -> HandlerResult:
    """Stores the user's answer into the slot the form is waiting on."""
    pending = memory.slots.get("pending_field")
    if not pending:
        return HandlerResult(decision_key="captured")
    return HandlerResult(
        decision_key="captured",
        slot_writes={pending: event.payload.get("text", "")},
    )
