"""Deterministic finite-state dialog engine.

A flow definition binds one handler per state and maps handler decision
keys to successor states; the engine applies handler output to the dialog
memory transactionally and renders outbound messages from templates.
"""

from .memory import DialogMemory, Event
from .templates import TemplateStore, VariantSelector, render_template
from .flow import FlowDefinition, StateSpec, load_flow
from .handlers import HandlerRegistry, HandlerResult
from .engine import DialogEngine, replay

__all__ = [
    "DialogMemory",
    "Event",
    "TemplateStore",
    "VariantSelector",
    "render_template",
    "FlowDefinition",
    "StateSpec",
    "load_flow",
    "HandlerRegistry",
    "HandlerResult",
    "DialogEngine",
    "replay",
]
