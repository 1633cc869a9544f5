"""Wire protocol, session runtime, stdio loop and the HTTP/WS API."""

import io
import json
import threading

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from triagebot.corpus import persona_preset
from triagebot.service.protocol import (
    BotMessage,
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
from triagebot.service.runtime import SessionRuntime


@pytest.fixture()
def runtime(engine):
    return SessionRuntime(engine, deterministic=True)


def start_line(sid="s-1", persona="tenant"):
    return json.dumps({
        "type": "session_start", "session_id": sid, "profile": persona_preset(persona),
    })


def msg_line(text, sid="s-1"):
    return json.dumps({"type": "user_message", "session_id": sid, "text": text})


def run_session(runtime, lines):
    out = []
    for line in lines:
        out.extend(runtime.process_line(line))
    return [json.loads(l) for l in out]


FULL_SESSION = [
    start_line(),
    msg_line("oi"),
    msg_line("a fechadura da porta de entrada travou"),
    msg_line("Ana Souza"),
    msg_line("ana@example.com"),
]


class TestProtocol:
    def test_roundtrip_every_type(self):
        envelopes = [
            SessionStart(session_id="a", profile={"x": 1.5}),
            UserMessage(session_id="a", text="olá\nquebra de linha"),
            BotMessage(session_id="a", ts=3, text="oi", template_id="greeting"),
            RoutingDecisionEnvelope(
                session_id="a", ts=4, department="dep_visitas", auto_routed=True,
                threshold=0.5, max_score=0.9,
                top_reasons=[TopReason(reason="r1", probability=0.8)]),
            ErrorEnvelope(code="bad_envelope", message="nope"),
            SessionEnd(session_id="a", ts=9),
        ]
        for envelope in envelopes:
            line = encode_envelope(envelope)
            assert "\n" not in line
            assert parse_envelope(line) == envelope

    def test_unknown_fields_ignored_and_not_emitted(self):
        line = json.dumps({
            "type": "user_message", "session_id": "s", "text": "oi",
            "debug_junk": {"a": 1}, "another": 2,
        })
        envelope = parse_envelope(line)
        assert isinstance(envelope, UserMessage)
        assert "debug_junk" not in encode_envelope(envelope)

    def test_malformed_json(self):
        with pytest.raises(ProtocolError) as err:
            parse_envelope("{")
        assert err.value.code == "bad_envelope"

    def test_unknown_type(self):
        with pytest.raises(ProtocolError) as err:
            parse_envelope(json.dumps({"type": "teleport", "session_id": "s"}))
        assert err.value.code == "unknown_type"

    def test_missing_required_field(self):
        with pytest.raises(ProtocolError) as err:
            parse_envelope(json.dumps({"type": "user_message", "session_id": "s"}))
        assert err.value.code == "bad_envelope"

    @given(st.binary(max_size=200))
    @settings(max_examples=200)
    def test_fuzz_never_crashes(self, runtime_fuzz, blob):
        line = blob.decode("utf-8", errors="replace")
        responses = runtime_fuzz.process_line(line)
        for response in responses:
            parsed = json.loads(response)
            assert parsed["type"] == "error"


@pytest.fixture(scope="module")
def runtime_fuzz(engine):
    return SessionRuntime(engine, deterministic=True)


class TestRuntime:
    def test_full_session_envelope_sequence(self, runtime):
        docs = run_session(runtime, FULL_SESSION)
        kinds = [d["type"] for d in docs]
        assert kinds[0] == "bot_message"  # greeting
        assert "routing_decision" in kinds
        assert kinds[-1] == "session_end"
        assert kinds.count("routing_decision") == 1
        routing = next(d for d in docs if d["type"] == "routing_decision")
        assert routing["department"] == "dep_manutencao"
        assert len(routing["top_reasons"]) == 3

    def test_every_user_message_answered(self, runtime):
        for line in FULL_SESSION:
            responses = runtime.process_line(line)
            assert len(responses) >= 1

    def test_greeting_path_no_routing_yet(self, runtime):
        docs = run_session(runtime, [start_line(), msg_line("oi")])
        kinds = [d["type"] for d in docs]
        assert "routing_decision" not in kinds
        assert kinds[-1] == "bot_message"  # ask for details

    def test_bad_line_recovers(self, runtime):
        docs = run_session(runtime, [start_line(), "{", msg_line("oi")])
        assert [d["type"] for d in docs].count("error") == 1
        assert docs[-1]["type"] == "bot_message"

    def test_unknown_session(self, runtime):
        docs = run_session(runtime, [msg_line("oi", sid="ghost")])
        assert docs[0]["type"] == "error"
        assert docs[0]["code"] == "unknown_session"

    def test_duplicate_session(self, runtime):
        docs = run_session(runtime, [start_line(sid="dup"), start_line(sid="dup")])
        assert docs[-1]["type"] == "error"
        assert docs[-1]["code"] == "duplicate_session"

    def test_terminal_session_rejects_messages(self, runtime):
        run_session(runtime, FULL_SESSION)
        docs = run_session(runtime, [msg_line("mais uma coisa")])
        assert docs[0]["code"] == "session_terminal"

    def test_session_end_drops_session(self, runtime):
        run_session(runtime, [start_line(sid="bye")])
        runtime.process_line(json.dumps({"type": "session_end", "session_id": "bye"}))
        docs = run_session(runtime, [msg_line("oi", sid="bye")])
        assert docs[0]["code"] == "unknown_session"

    def test_session_isolation(self, runtime):
        runtime.process_line(start_line(sid="iso-a"))
        before = json.dumps(runtime.session_view("iso-a"), sort_keys=True)
        run_session(runtime, [
            start_line(sid="iso-b", persona="photographer"),
            msg_line("preciso cancelar a visita de amanhã", sid="iso-b"),
        ])
        after = json.dumps(runtime.session_view("iso-a"), sort_keys=True)
        assert before == after

    def test_concurrent_sessions(self, engine):
        runtime = SessionRuntime(engine, deterministic=True)
        errors = []

        def worker(i):
            sid = f"conc-{i}"
            try:
                docs = run_session(runtime, [
                    start_line(sid=sid),
                    msg_line("o boleto do aluguel deste mês não chegou", sid=sid),
                    msg_line("Ana Souza", sid=sid),
                    msg_line("ana@example.com", sid=sid),
                ])
                kinds = [d["type"] for d in docs]
                if kinds.count("routing_decision") != 1:
                    errors.append(f"{sid}: {kinds}")
            except Exception as exc:  # noqa: BLE001
                errors.append(f"{sid}: {exc}")

        threads = [threading.Thread(target=worker, args=(i,)) for i in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert not errors

    def test_deterministic_timestamps(self, engine):
        r1 = SessionRuntime(engine, deterministic=True)
        r2 = SessionRuntime(engine, deterministic=True)
        out1 = run_session(r1, FULL_SESSION)
        out2 = run_session(r2, FULL_SESSION)
        assert out1 == out2


class TestStdio:
    def test_loop(self, engine):
        from triagebot.service.lineserver import serve_stdio

        runtime = SessionRuntime(engine, deterministic=True)
        stdin = io.StringIO("\n".join(FULL_SESSION) + "\n")
        stdout = io.StringIO()
        serve_stdio(runtime, stdin, stdout)
        lines = stdout.getvalue().strip().splitlines()
        docs = [json.loads(l) for l in lines]
        assert docs[-1]["type"] == "session_end"


class TestHttpApi:
    @pytest.fixture()
    def client(self, engine, context_model, fusion_model):
        from fastapi.testclient import TestClient

        from triagebot.service.api import create_app

        runtime = SessionRuntime(engine, deterministic=True)
        app = create_app(runtime, context_model=context_model, reason_model=fusion_model)
        return TestClient(app)

    def test_health_and_info(self, client):
        assert client.get("/health").json() == {"status": "ok"}
        info = client.get("/info").json()
        assert info["flow"] == "receptionist"

    def test_session_lifecycle(self, client):
        reply = client.post("/sessions", json={
            "session_id": "http-1", "profile": persona_preset("tenant")}).json()
        assert len(reply["messages"]) == 1
        reply = client.post("/sessions/http-1/messages", json={
            "text": "apareceu mofo na parede do quarto do imóvel QA-1000"}).json()
        assert reply["routing"] is None
        for text in ("Ana Souza", "ana@example.com"):
            reply = client.post("/sessions/http-1/messages", json={"text": text}).json()
        assert reply["completed"] is True
        assert reply["routing"]["department"] == "dep_manutencao"

    def test_session_state_view(self, client):
        client.post("/sessions", json={"session_id": "http-2", "profile": {}})
        view = client.get("/sessions/http-2").json()
        assert view["state"] == "await_description"
        assert client.get("/sessions/ghost").status_code == 404

    def test_error_maps_to_400(self, client):
        response = client.post("/sessions/ghost/messages", json={"text": "oi"})
        assert response.status_code == 400
        assert response.json()["detail"]["code"] == "unknown_session"

    def test_context_endpoint(self, client):
        doc = client.post("/context/evaluate", json={"text": "oi"}).json()
        assert doc["has_context"] is False

    def test_predict_endpoint(self, client):
        doc = client.post("/reasons/predict", json={
            "text": "preciso cancelar a visita de amanhã",
            "profile": persona_preset("photographer"),
            "k": 3,
        }).json()
        assert doc["top"][0]["reason"] == "ft_ag_cancelamento"

    def test_websocket_bridge(self, client):
        with client.websocket_connect("/ws") as ws:
            ws.send_text(start_line(sid="ws-1"))
            greeting = json.loads(ws.receive_text())
            assert greeting["type"] == "bot_message"
            ws.send_text(msg_line("o portão da garagem parou de abrir", sid="ws-1"))
            reply = json.loads(ws.receive_text())
            assert reply["type"] == "bot_message"
