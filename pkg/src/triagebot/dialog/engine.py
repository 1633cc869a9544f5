"""Transactional step execution and auto-state chaining."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..errors import DeadTransitionError, FlowError, HandlerError
from .flow import FlowDefinition
from .handlers import HandlerRegistry, HandlerResult
from .memory import INBOUND_KINDS, DialogMemory, Event
from .templates import TemplateStore, VariantSelector, render_template

MAX_AUTO_CHAIN = 20


@dataclass(frozen=True)
class OutboundMessage:
    text: str
    template_id: str


@dataclass(frozen=True)
class DialogEngine:
    """Immutable bundle of flow, handlers and templates; safe to share."""

    flow: FlowDefinition
    registry: HandlerRegistry
    templates: TemplateStore
    selector: VariantSelector = VariantSelector()

    def new_memory(self, session_id: str) -> DialogMemory:
        return DialogMemory(session_id=session_id, state=self.flow.initial_state)

    def step(self, memory: DialogMemory, event: Event) -> list[OutboundMessage]:
        """Run the current state's handler once and commit its effects.

        The handler sees a snapshot; its writes, the transition and all
        outbound messages are applied only after the decision key resolves,
        so a failing handler or a dead transition leaves memory untouched.
        """
        state = self.flow.states.get(memory.state)
        if state is None:
            raise FlowError(f"memory references unknown state {memory.state!r}")
        if state.terminal:
            raise FlowError(f"state {memory.state!r} is terminal")

        handler = self.registry.resolve(state.handler)  # type: ignore[arg-type]
        try:
            result: HandlerResult = handler(memory.snapshot(), event, state.params)
        except Exception as exc:
            raise HandlerError(f"handler {state.handler!r} failed: {exc}") from exc

        target = state.transitions.get(result.decision_key)
        if target is None:
            raise DeadTransitionError(memory.state, result.decision_key)

        # commit
        if event.kind in INBOUND_KINDS:
            memory.record(event.kind, event.payload, event.ts)
        else:
            memory.clock = max(memory.clock, event.ts)
        memory.slots.update(result.slot_writes)
        memory.record(
            "handler",
            {"name": state.handler, "state": memory.state, "decision": result.decision_key},
        )
        outbound: list[OutboundMessage] = []
        for template_id, substitutions in result.outbound:
            text = render_template(self.templates, template_id, substitutions, self.selector)
            memory.record("bot_message", {"template_id": template_id, "text": text})
            outbound.append(OutboundMessage(text=text, template_id=template_id))
        memory.state = target
        entered = self.flow.states[target]
        if entered.on_enter_template is not None:
            text = render_template(self.templates, entered.on_enter_template, {}, self.selector)
            memory.record("bot_message", {"template_id": entered.on_enter_template, "text": text})
            outbound.append(OutboundMessage(text=text, template_id=entered.on_enter_template))
        return outbound

    def drive(self, memory: DialogMemory, event: Event) -> list[OutboundMessage]:
        """Step on the inbound event, then keep stepping through auto states."""
        outbound = self.step(memory, event)
        chained = 0
        while True:
            state = self.flow.states[memory.state]
            if state.terminal or not state.auto:
                break
            chained += 1
            if chained > MAX_AUTO_CHAIN:
                raise FlowError(f"auto-state chain exceeded {MAX_AUTO_CHAIN} steps")
            outbound.extend(self.step(memory, Event(kind="auto", payload={}, ts=memory.clock)))
        return outbound

    def is_complete(self, memory: DialogMemory) -> bool:
        return memory.state in self.flow.terminal_states


def replay(engine: DialogEngine, session_id: str, events: Iterable[Event]) -> DialogMemory:
    """Rebuild a session by re-driving its recorded inbound events."""
    memory = engine.new_memory(session_id)
    for event in events:
        if event.kind in INBOUND_KINDS:
            engine.drive(memory, event)
    return memory
