"""Wire protocol: one JSON envelope per line, UTF-8.

Envelope types: session_start, user_message, bot_message, routing_decision,
error, session_end. Unknown fields are ignored on read and never emitted;
payload text must not contain raw newlines (JSON escapes them anyway).
"""

from __future__ import annotations

import json
from typing import Any, Literal, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError


class ProtocolError(Exception):
    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)


class _Base(BaseModel):
    model_config = ConfigDict(extra="ignore")


class SessionStart(_Base):
    type: Literal["session_start"] = "session_start"
    session_id: str
    ts: int | None = None
    profile: dict[str, Any] = Field(default_factory=dict)


class UserMessage(_Base):
    type: Literal["user_message"] = "user_message"
    session_id: str
    ts: int | None = None
    text: str


class BotMessage(_Base):
    type: Literal["bot_message"] = "bot_message"
    session_id: str
    ts: int | None = None
    text: str
    template_id: str | None = None


class TopReason(_Base):
    reason: str
    probability: float


class RoutingDecisionEnvelope(_Base):
    type: Literal["routing_decision"] = "routing_decision"
    session_id: str
    ts: int | None = None
    department: str
    auto_routed: bool
    threshold: float
    max_score: float
    top_reasons: list[TopReason]
    rule_id: str | None = None


class ErrorEnvelope(_Base):
    type: Literal["error"] = "error"
    session_id: str | None = None
    ts: int | None = None
    code: str
    message: str


class SessionEnd(_Base):
    type: Literal["session_end"] = "session_end"
    session_id: str
    ts: int | None = None


Envelope = Union[
    SessionStart, UserMessage, BotMessage, RoutingDecisionEnvelope, ErrorEnvelope, SessionEnd
]

_TYPES: dict[str, type[BaseModel]] = {
    "session_start": SessionStart,
    "user_message": UserMessage,
    "bot_message": BotMessage,
    "routing_decision": RoutingDecisionEnvelope,
    "error": ErrorEnvelope,
    "session_end": SessionEnd,
}


def parse_envelope(line: str) -> Envelope:
    """Decode one line; malformed input raises ProtocolError(bad_envelope)."""
    try:
        doc = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError("bad_envelope", f"line is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProtocolError("bad_envelope", "envelope must be a JSON object")
    envelope_type = doc.get("type")
    model = _TYPES.get(envelope_type)
    if model is None:
        raise ProtocolError("unknown_type", f"unknown envelope type {envelope_type!r}")
    try:
        return model.model_validate(doc)  # type: ignore[return-value]
    except ValidationError as exc:
        first = exc.errors()[0]
        raise ProtocolError(
            "bad_envelope",
            f"invalid {envelope_type} envelope: {first['loc']}: {first['msg']}",
        ) from exc


def encode_envelope(envelope: Envelope) -> str:
    """One line of JSON in declaration field order, no trailing newline."""
    doc = envelope.model_dump(exclude_none=True)
    return json.dumps(doc, ensure_ascii=False, separators=(", ", ": "))
