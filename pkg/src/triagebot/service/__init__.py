"""Session service: line-delimited wire protocol, stdio/TCP transports and
an HTTP/WebSocket API wrapping the same runtime."""

from .protocol import (
    BotMessage,
    Envelope,
    ErrorEnvelope,
    ProtocolError,
    RoutingDecisionEnvelope,
    SessionEnd,
    SessionStart,
    UserMessage,
    encode_envelope,
    parse_envelope,
)
from .runtime import SessionRuntime

__all__ = [
    "Envelope",
    "SessionStart",
    "UserMessage",
    "BotMessage",
    "RoutingDecisionEnvelope",
    "ErrorEnvelope",
    "SessionEnd",
    "ProtocolError",
    "parse_envelope",
    "encode_envelope",
    "SessionRuntime",
]
