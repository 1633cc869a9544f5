"""Dialog engine: flows, templates, transactional steps, replay."""

import pytest

from triagebot.dialog import (
    DialogEngine,
    Event,
    HandlerRegistry,
    HandlerResult,
    TemplateStore,
    VariantSelector,
    load_flow,
    render_template,
    replay,
)
from triagebot.errors import DeadTransitionError, FlowError, HandlerError, TemplateError

TWO_STATE_FLOW = """
flow:
  id: tiny
  initial_state: start
  states:
    start:
      handler: go
      transitions:
        ok: end
    end:
      terminal: true
"""


def make_registry(**handlers) -> HandlerRegistry:
    registry = HandlerRegistry()
    for name, fn in handlers.items():
        registry.register(name, fn)
    return registry


def const_handler(decision, writes=None, outbound=()):
    def handler(memory, event, params):
        return HandlerResult(
            decision_key=decision, slot_writes=dict(writes or {}), outbound=tuple(outbound))

    return handler


@pytest.fixture
def store():
    return TemplateStore.from_dict({
        "templates": {
            "hello": ["hello {name}"],
            "multi": ["variant a", "variant b", "variant c"],
            "with_default": {"variants": ["hi {name}"], "defaults": {"name": "cliente"}},
        }
    })


class TestLoadFlow:
    def test_minimal_two_state_flow(self):
        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        assert len(flow.states) == 2
        assert flow.initial_state == "start"
        assert flow.terminal_states == {"end"}

    def test_dangling_target(self):
        bad = TWO_STATE_FLOW.replace("ok: end", "ok: X")
        with pytest.raises(FlowError, match="undeclared state 'X'"):
            load_flow(bad, handler_names={"go"})

    def test_unknown_handler(self):
        with pytest.raises(FlowError, match="unknown handler"):
            load_flow(TWO_STATE_FLOW, handler_names={"other"})

    def test_parse_error(self):
        from triagebot.errors import ConfigError

        with pytest.raises(ConfigError):
            load_flow("flow: [unbalanced", handler_names=set())

    def test_terminal_state_with_transitions_rejected(self):
        bad = TWO_STATE_FLOW.replace(
            "end:\n      terminal: true",
            "end:\n      terminal: true\n      transitions: {x: start}")
        with pytest.raises(FlowError, match="terminal"):
            load_flow(bad, handler_names={"go"})

    def test_unreachable_state_warns_not_errors(self, caplog):
        doc = TWO_STATE_FLOW + """
    orphan:
      handler: go
      transitions:
        ok: end
"""
        with caplog.at_level("WARNING"):
            flow = load_flow(doc, handler_names={"go"})
        assert "orphan" in str([r.message for r in caplog.records])
        assert "orphan" in flow.states

    def test_default_receptionist_flow_shape(self, engine):
        flow = engine.flow
        assert len(flow.states) >= 5
        assert flow.initial_state == "welcome"
        assert "awaiting_context" in flow.states
        assert flow.terminal_states == {"done"}


class TestTemplates:
    def test_simple_substitution(self, store):
        assert render_template(store, "hello", {"name": "Ana"}) == "hello Ana"

    def test_variant_deterministic_for_seed(self, store):
        selector = VariantSelector(seed=123)
        picks = {render_template(store, "multi", {}, selector) for _ in range(10)}
        assert len(picks) == 1

    def test_different_seeds_reach_other_variants(self, store):
        picks = {
            render_template(store, "multi", {}, VariantSelector(seed=s)) for s in range(40)
        }
        assert len(picks) > 1

    def test_missing_placeholder_without_default(self, store):
        with pytest.raises(TemplateError, match="unresolved"):
            render_template(store, "hello", {})

    def test_default_applies(self, store):
        assert render_template(store, "with_default", {}) == "hi cliente"

    def test_unknown_template(self, store):
        with pytest.raises(TemplateError, match="unknown"):
            render_template(store, "nope", {})


class TestStep:
    def test_single_transition(self, store):
        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        engine = DialogEngine(flow, make_registry(go=const_handler("ok")), store)
        memory = engine.new_memory("s1")
        engine.step(memory, Event("user_message", {"text": "x"}, ts=10))
        assert memory.state == "end"

    def test_dead_transition_keeps_memory(self, store):
        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        engine = DialogEngine(flow, make_registry(go=const_handler("maybe")), store)
        memory = engine.new_memory("s1")
        before = memory.canonical_json()
        with pytest.raises(DeadTransitionError):
            engine.step(memory, Event("user_message", {"text": "x"}, ts=10))
        assert memory.state == "start"
        assert memory.canonical_json() == before

    def test_failing_handler_keeps_memory(self, store):
        def exploding(memory, event, params):
            memory.slots["leak"] = True  # mutation of the snapshot must not leak
            raise RuntimeError("boom")

        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        engine = DialogEngine(flow, make_registry(go=exploding), store)
        memory = engine.new_memory("s1")
        before = memory.canonical_json()
        with pytest.raises(HandlerError):
            engine.step(memory, Event("user_message", {"text": "x"}, ts=10))
        assert memory.canonical_json() == before

    def test_terminal_state_rejects_step(self, store):
        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        engine = DialogEngine(flow, make_registry(go=const_handler("ok")), store)
        memory = engine.new_memory("s1")
        engine.step(memory, Event("user_message", {"text": "x"}, ts=1))
        with pytest.raises(FlowError, match="terminal"):
            engine.step(memory, Event("user_message", {"text": "y"}, ts=2))

    def test_slot_writes_committed(self, store):
        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        engine = DialogEngine(
            flow, make_registry(go=const_handler("ok", writes={"answer": 42})), store)
        memory = engine.new_memory("s1")
        engine.step(memory, Event("user_message", {"text": "x"}, ts=1))
        assert memory.slots["answer"] == 42

    def test_outbound_rendered_and_logged(self, store):
        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        engine = DialogEngine(
            flow,
            make_registry(go=const_handler("ok", outbound=(("hello", {"name": "Ana"}),))),
            store,
        )
        memory = engine.new_memory("s1")
        outbound = engine.step(memory, Event("user_message", {"text": "x"}, ts=1))
        assert [m.text for m in outbound] == ["hello Ana"]
        assert any(e.kind == "bot_message" for e in memory.history)

    def test_timestamps_non_decreasing(self, store):
        flow = load_flow(TWO_STATE_FLOW, handler_names={"go"})
        engine = DialogEngine(flow, make_registry(go=const_handler("ok")), store)
        memory = engine.new_memory("s1")
        engine.step(memory, Event("user_message", {"text": "x"}, ts=50))
        stamps = [e.ts for e in memory.history]
        assert stamps == sorted(stamps)


LOOP_FLOW = """
flow:
  id: loop
  initial_state: a
  states:
    a:
      handler: ha
      transitions:
        next: b
    b:
      handler: hb
      auto: true
      transitions:
        next: c
    c:
      handler: hc
      auto: true
      transitions:
        next: done
    done:
      terminal: true
"""


class TestDrive:
    def test_auto_chain(self, store):
        flow = load_flow(LOOP_FLOW, handler_names={"ha", "hb", "hc"})
        registry = make_registry(
            ha=const_handler("next"), hb=const_handler("next"), hc=const_handler("next"))
        engine = DialogEngine(flow, registry, store)
        memory = engine.new_memory("s1")
        engine.drive(memory, Event("user_message", {"text": "x"}, ts=1))
        assert memory.state == "done"
        assert engine.is_complete(memory)

    def test_infinite_auto_loop_guarded(self, store):
        doc = """
flow:
  id: spin
  initial_state: a
  states:
    a:
      handler: ha
      auto: true
      transitions:
        next: a
"""
        flow = load_flow(doc, handler_names={"ha"})
        engine = DialogEngine(flow, make_registry(ha=const_handler("next")), store)
        memory = engine.new_memory("s1")
        with pytest.raises(FlowError, match="auto-state chain"):
            engine.drive(memory, Event("user_message", {"text": "x"}, ts=1))


class TestDeterminismAndReplay:
    def test_identical_inputs_identical_serialized_memory(self, store):
        flow = load_flow(LOOP_FLOW, handler_names={"ha", "hb", "hc"})
        registry = make_registry(
            ha=const_handler("next", writes={"k": "v"}),
            hb=const_handler("next", outbound=(("multi", {}),)),
            hc=const_handler("next"))

        def run():
            engine = DialogEngine(flow, registry, store, VariantSelector(seed=9))
            memory = engine.new_memory("s1")
            actions = engine.drive(memory, Event("user_message", {"text": "x"}, ts=5))
            return memory.canonical_json(), [m.text for m in actions]

        assert run() == run()

    def test_replay_reproduces_final_memory(self, engine, tickets):
        from triagebot.corpus import persona_preset

        memory = engine.new_memory("replay-1")
        events = [
            Event("session_start", {"profile": persona_preset("tenant")}, ts=1),
            Event("user_message", {"text": "oi"}, ts=2),
            Event("user_message", {"text": "a torneira da cozinha está pingando sem parar"}, ts=3),
            Event("user_message", {"text": "Ana Souza"}, ts=4),
            Event("user_message", {"text": "ana@example.com"}, ts=5),
        ]
        for event in events:
            engine.drive(memory, event)
        assert engine.is_complete(memory)

        rebuilt = replay(engine, "replay-1", memory.inbound_history())
        assert rebuilt.canonical_json() == memory.canonical_json()

    def test_state_always_valid(self, store):
        flow = load_flow(LOOP_FLOW, handler_names={"ha", "hb", "hc"})
        registry = make_registry(
            ha=const_handler("next"), hb=const_handler("next"), hc=const_handler("next"))
        engine = DialogEngine(flow, registry, store)
        memory = engine.new_memory("s1")
        assert memory.state in flow.states
        engine.drive(memory, Event("user_message", {"text": "x"}, ts=1))
        assert memory.state in flow.states


class TestDefaultFlowBehavior:
    def test_greeting_then_gate(self, engine):
        from triagebot.corpus import persona_preset

        memory = engine.new_memory("s-flow")
        out = engine.drive(
            memory, Event("session_start", {"profile": persona_preset("tenant")}, ts=1))
        assert memory.state == "await_description"
        assert len(out) == 1  # greeting

    def test_thin_first_message_asks_for_details(self, engine):
        from triagebot.corpus import persona_preset

        memory = engine.new_memory("s-flow2")
        engine.drive(memory, Event("session_start", {"profile": persona_preset("tenant")}, ts=1))
        out = engine.drive(memory, Event("user_message", {"text": "oi"}, ts=2))
        assert memory.state == "awaiting_context"
        assert [m.template_id for m in out] == ["ask_for_details"]

    def test_rich_message_reaches_form(self, engine):
        from triagebot.corpus import persona_preset

        memory = engine.new_memory("s-flow3")
        engine.drive(memory, Event("session_start", {"profile": persona_preset("tenant")}, ts=1))
        out = engine.drive(memory, Event(
            "user_message", {"text": "o boleto do aluguel deste mês não chegou"}, ts=2))
        assert memory.state == "await_field"
        assert memory.slots["prediction_top"][0][0] == "iq_pg_boleto"
        assert out[-1].template_id == "ask_full_name"

    def test_give_up_after_max_attempts(self, engine):
        from triagebot.corpus import persona_preset

        memory = engine.new_memory("s-flow4")
        engine.drive(memory, Event("session_start", {"profile": persona_preset("tenant")}, ts=1))
        engine.drive(memory, Event("user_message", {"text": "oi"}, ts=2))
        engine.drive(memory, Event("user_message", {"text": "olá?"}, ts=3))
        assert memory.state == "awaiting_context"  # first retry, ask again
        engine.drive(memory, Event("user_message", {"text": "alô"}, ts=4))
        # second thin follow-up hits max_attempts=2 and proceeds to routing
        assert memory.state == "await_field"
        assert memory.slots["context_attempts"] == 2
