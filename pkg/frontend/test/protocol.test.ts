import { describe, expect, it } from "vitest";

import {
  encodeEnvelope,
  Envelope,
  parseEnvelope,
  ProtocolError,
} from "../src/protocol.js";

describe("parseEnvelope", () => {
  it("round-trips every envelope type", () => {
    const samples: Envelope[] = [
      { type: "session_start", session_id: "s", profile: { agent_role: "none", n_visits_90d: 3 } },
      { type: "user_message", session_id: "s", text: "olá" },
      { type: "bot_message", session_id: "s", ts: 5, text: "oi", template_id: "greeting" },
      {
        type: "routing_decision",
        session_id: "s",
        department: "dep_visitas",
        auto_routed: true,
        threshold: 0.9,
        max_score: 0.95,
        top_reasons: [{ reason: "r1", probability: 0.8 }],
      },
      { type: "error", code: "bad_envelope", message: "nope" },
      { type: "session_end", session_id: "s" },
    ];
    for (const sample of samples) {
      expect(parseEnvelope(encodeEnvelope(sample))).toEqual(sample);
    }
  });

  it("rejects malformed JSON", () => {
    expect(() => parseEnvelope("{")).toThrow(ProtocolError);
  });

  it("rejects non-objects", () => {
    expect(() => parseEnvelope("[1,2]")).toThrow(ProtocolError);
    expect(() => parseEnvelope('"hi"')).toThrow(ProtocolError);
  });

  it("rejects unknown types", () => {
    expect(() => parseEnvelope(JSON.stringify({ type: "teleport" }))).toThrow(ProtocolError);
  });

  it("rejects routing decisions without reasons", () => {
    const bad = JSON.stringify({ type: "routing_decision", session_id: "s", department: "d" });
    expect(() => parseEnvelope(bad)).toThrow(ProtocolError);
  });

  it("keeps unknown fields available without crashing", () => {
    const line = JSON.stringify({ type: "user_message", session_id: "s", text: "oi", extra: 1 });
    const envelope = parseEnvelope(line);
    expect(envelope.type).toBe("user_message");
  });
});
