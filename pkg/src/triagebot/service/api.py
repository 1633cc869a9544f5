"""HTTP/WebSocket front for the session runtime.

The REST endpoints wrap the same envelope semantics as the line protocol;
the /ws endpoint bridges it directly (one envelope per text frame), which is
what the browser console speaks.
"""

from __future__ import annotations

from typing import Any

from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from pydantic import BaseModel, Field

from .. import __version__
from ..context_gate import evaluate_context
from ..reasons import predict_reasons
from .protocol import (
    BotMessage,
    RoutingDecisionEnvelope,
    SessionEnd,
    SessionStart,
    UserMessage,
)
from .runtime import SessionRuntime


class StartSessionRequest(BaseModel):
    session_id: str
    profile: dict[str, Any] = Field(default_factory=dict)


class MessageRequest(BaseModel):
    text: str


class BotMessageOut(BaseModel):
    text: str
    template_id: str | None = None


class RoutingOut(BaseModel):
    department: str
    auto_routed: bool
    threshold: float
    max_score: float
    top_reasons: list[dict[str, Any]]
    rule_id: str | None = None


class SessionReply(BaseModel):
    session_id: str
    messages: list[BotMessageOut]
    routing: RoutingOut | None = None
    completed: bool = False


class ContextRequest(BaseModel):
    text: str


class ContextReply(BaseModel):
    has_context: bool
    p_positive: float


class PredictRequest(BaseModel):
    text: str
    profile: dict[str, Any] = Field(default_factory=dict)
    k: int = 3


class PredictReply(BaseModel):
    top: list[dict[str, Any]]


def _collect(responses) -> tuple[list[BotMessageOut], RoutingOut | None, bool]:
    messages: list[BotMessageOut] = []
    routing: RoutingOut | None = None
    completed = False
    for envelope in responses:
        if isinstance(envelope, BotMessage):
            messages.append(BotMessageOut(text=envelope.text, template_id=envelope.template_id))
        elif isinstance(envelope, RoutingDecisionEnvelope):
            routing = RoutingOut(
                department=envelope.department,
                auto_routed=envelope.auto_routed,
                threshold=envelope.threshold,
                max_score=envelope.max_score,
                top_reasons=[t.model_dump() for t in envelope.top_reasons],
                rule_id=envelope.rule_id,
            )
        elif isinstance(envelope, SessionEnd):
            completed = True
        else:  # error envelope -> HTTP error
            raise HTTPException(status_code=400, detail=envelope.model_dump(exclude_none=True))
    return messages, routing, completed


def create_app(
    runtime: SessionRuntime,
    context_model=None,
    reason_model=None,
) -> FastAPI:
    app = FastAPI(title="triagebot", version=__version__)

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/info")
    def info() -> dict[str, Any]:
        return {
            "version": __version__,
            "flow": runtime.engine.flow.flow_id,
            "states": sorted(runtime.engine.flow.states),
            "deterministic": runtime.deterministic,
        }

    @app.post("/sessions", response_model=SessionReply)
    def start_session(request: StartSessionRequest) -> SessionReply:
        responses = runtime.process(
            SessionStart(session_id=request.session_id, profile=request.profile)
        )
        messages, routing, completed = _collect(responses)
        return SessionReply(
            session_id=request.session_id, messages=messages, routing=routing, completed=completed
        )

    @app.post("/sessions/{session_id}/messages", response_model=SessionReply)
    def send_message(session_id: str, request: MessageRequest) -> SessionReply:
        responses = runtime.process(UserMessage(session_id=session_id, text=request.text))
        messages, routing, completed = _collect(responses)
        return SessionReply(
            session_id=session_id, messages=messages, routing=routing, completed=completed
        )

    @app.get("/sessions/{session_id}")
    def session_state(session_id: str) -> dict:
        try:
            return runtime.session_view(session_id)
        except Exception:
            raise HTTPException(status_code=404, detail=f"no session {session_id!r}") from None

    if context_model is not None:

        @app.post("/context/evaluate", response_model=ContextReply)
        def context(request: ContextRequest) -> ContextReply:
            has_context, p = evaluate_context(context_model, request.text)
            return ContextReply(has_context=has_context, p_positive=round(p, 6))

    if reason_model is not None:

        @app.post("/reasons/predict", response_model=PredictReply)
        def predict(request: PredictRequest) -> PredictReply:
            prediction = predict_reasons(reason_model, request.text, request.profile, k=request.k)
            return PredictReply(
                top=[{"reason": c, "probability": round(p, 6)} for c, p in prediction.top]
            )

    @app.websocket("/ws")
    async def websocket_bridge(ws: WebSocket) -> None:
        """Envelope-per-frame bridge over the line protocol."""
        import asyncio

        await ws.accept()
        loop = asyncio.get_running_loop()
        try:
            while True:
                line = await ws.receive_text()
                responses = await loop.run_in_executor(None, runtime.process_line, line)
                for response in responses:
                    await ws.send_text(response)
        except WebSocketDisconnect:
            pass

    return app
