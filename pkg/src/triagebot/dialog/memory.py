"""Per-session dialog memory: automaton state, slots and an event log."""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from typing import Any

# Event kinds that originate outside the engine and are re-fed on replay.
INBOUND_KINDS = ("session_start", "user_message")


@dataclass(frozen=True)
class Event:
    """One history entry; payload is JSON-serializable."""

    kind: str
    payload: dict[str, Any]
    ts: int

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "payload": self.payload, "ts": self.ts}

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Event":
        return cls(kind=doc["kind"], payload=doc["payload"], ts=doc["ts"])


@dataclass
class DialogMemory:
    """Mutable per-session store; history is append-only with a monotone clock."""

    session_id: str
    state: str
    slots: dict[str, Any] = field(default_factory=dict)
    history: list[Event] = field(default_factory=list)
    clock: int = 0

    def record(self, kind: str, payload: dict[str, Any], ts: int | None = None) -> Event:
        """Append an event; timestamps never go backwards."""
        if ts is None:
            ts = self.clock
        self.clock = max(self.clock, ts)
        event = Event(kind=kind, payload=payload, ts=self.clock)
        self.history.append(event)
        return event

    def inbound_history(self) -> list[Event]:
        return [e for e in self.history if e.kind in INBOUND_KINDS]

    def snapshot(self) -> "DialogMemory":
        """Deep copy handed to handlers, so a failing one cannot leak writes."""
        return DialogMemory(
            session_id=self.session_id,
            state=self.state,
            slots=copy.deepcopy(self.slots),
            history=list(self.history),
            clock=self.clock,
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "state": self.state,
            "slots": self.slots,
            "history": [e.to_dict() for e in self.history],
            "clock": self.clock,
        }

    def canonical_json(self) -> str:
        """Stable serialization for byte-level determinism checks."""
        return json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
