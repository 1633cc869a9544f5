"""Session bookkeeping shared by every transport (stdio, TCP, HTTP, WS)."""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field

from ..dialog import DialogEngine, Event
from ..dialog.memory import DialogMemory
from ..errors import TriagebotError
from .protocol import (
    BotMessage,
    Envelope,
    ErrorEnvelope,
    ProtocolError,
    RoutingDecisionEnvelope,
    SessionEnd,
    SessionStart,
    TopReason,
    UserMessage,
    encode_envelope,
    parse_envelope,
)

DETERMINISTIC_EPOCH = 1577836800  # 2020-01-01T00:00:00Z


@dataclass
class _Session:
    memory: DialogMemory
    lock: threading.Lock = field(default_factory=threading.Lock)
    counter: int = 0
    closed: bool = False


class SessionRuntime:
    """Holds live sessions over one immutable engine.

    Sessions are independent and may be processed concurrently; envelopes
    of a single session are serialized by its lock. With deterministic=True
    timestamps come from a per-session logical clock instead of wall time.
    """

    def __init__(self, engine: DialogEngine, deterministic: bool = False):
        self.engine = engine
        self.deterministic = deterministic
        self._sessions: dict[str, _Session] = {}
        self._registry_lock = threading.Lock()

    # -- time ---------------------------------------------------------------

    def _stamp(self, session: _Session, supplied: int | None) -> int:
        if supplied is not None:
            return supplied
        if self.deterministic:
            session.counter += 1
            return DETERMINISTIC_EPOCH + session.counter
        return int(time.time())

    # -- session table ------------------------------------------------------

    def _create(self, session_id: str) -> _Session:
        with self._registry_lock:
            if session_id in self._sessions:
                raise ProtocolError("duplicate_session", f"session {session_id!r} already exists")
            session = _Session(memory=self.engine.new_memory(session_id))
            self._sessions[session_id] = session
            return session

    def _get(self, session_id: str) -> _Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ProtocolError("unknown_session", f"no session {session_id!r}")
        return session

    def session_view(self, session_id: str) -> dict:
        return self._get(session_id).memory.to_dict()

    def session_ids(self) -> list[str]:
        with self._registry_lock:
            return sorted(self._sessions)

    # -- envelope processing --------------------------------------------------

    def process_line(self, line: str) -> list[str]:
        """Decode, process, encode; protocol errors become error envelopes."""
        line = line.strip()
        if not line:
            return []
        try:
            envelope = parse_envelope(line)
        except ProtocolError as exc:
            return [encode_envelope(ErrorEnvelope(code=exc.code, message=str(exc)))]
        return [encode_envelope(e) for e in self.process(envelope)]

    def process(self, envelope: Envelope) -> list[Envelope]:
        try:
            if isinstance(envelope, SessionStart):
                return self._on_start(envelope)
            if isinstance(envelope, UserMessage):
                return self._on_message(envelope)
            if isinstance(envelope, SessionEnd):
                return self._on_end(envelope)
        except ProtocolError as exc:
            session_id = getattr(envelope, "session_id", None)
            return [ErrorEnvelope(session_id=session_id, code=exc.code, message=str(exc))]
        return [
            ErrorEnvelope(
                session_id=getattr(envelope, "session_id", None),
                code="unexpected_type",
                message=f"clients may not send {envelope.type!r} envelopes",
            )
        ]

    def _on_start(self, envelope: SessionStart) -> list[Envelope]:
        session = self._create(envelope.session_id)
        with session.lock:
            ts = self._stamp(session, envelope.ts)
            event = Event(kind="session_start", payload={"profile": envelope.profile}, ts=ts)
            return self._drive(session, event)

    def _on_message(self, envelope: UserMessage) -> list[Envelope]:
        session = self._get(envelope.session_id)
        with session.lock:
            if session.closed or self.engine.is_complete(session.memory):
                return [
                    ErrorEnvelope(
                        session_id=envelope.session_id,
                        code="session_terminal",
                        message="session already completed",
                    )
                ]
            ts = self._stamp(session, envelope.ts)
            event = Event(kind="user_message", payload={"text": envelope.text}, ts=ts)
            return self._drive(session, event)

    def _on_end(self, envelope: SessionEnd) -> list[Envelope]:
        with self._registry_lock:
            self._sessions.pop(envelope.session_id, None)
        return []

    def _drive(self, session: _Session, event: Event) -> list[Envelope]:
        memory = session.memory
        sid = memory.session_id
        try:
            outbound = self.engine.drive(memory, event)
        except TriagebotError as exc:
            return [
                ErrorEnvelope(session_id=sid, code=_error_code(exc), message=str(exc))
            ]
        responses: list[Envelope] = [
            BotMessage(session_id=sid, ts=event.ts, text=m.text, template_id=m.template_id)
            for m in outbound
        ]
        if self.engine.is_complete(memory):
            responses.append(self._routing_envelope(memory, event.ts))
            responses.append(SessionEnd(session_id=sid, ts=event.ts))
            session.closed = True
        return responses

    def _routing_envelope(self, memory: DialogMemory, ts: int) -> RoutingDecisionEnvelope:
        routing = memory.slots.get("routing") or {}
        return RoutingDecisionEnvelope(
            session_id=memory.session_id,
            ts=ts,
            department=routing.get("department", ""),
            auto_routed=bool(routing.get("auto_routed", False)),
            threshold=round(float(routing.get("threshold", 0.0)), 6),
            max_score=round(float(routing.get("max_score", 0.0)), 6),
            top_reasons=[
                TopReason(reason=code, probability=round(float(p), 6))
                for code, p in routing.get("top_reasons", [])
            ],
            rule_id=routing.get("rule_id"),
        )


def _error_code(exc: TriagebotError) -> str:
    from ..errors import DeadTransitionError, FlowError, HandlerError

    if isinstance(exc, DeadTransitionError):
        return "dead_transition"
    if isinstance(exc, HandlerError):
        return "handler_error"
    if isinstance(exc, FlowError):
        return "flow_error"
    return "engine_error"
