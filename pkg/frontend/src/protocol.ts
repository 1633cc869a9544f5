/**
 * Wire protocol envelopes, mirroring docs/protocol_schema.json.
 *
 * The console never invents protocol data: raw lines are kept verbatim for
 * transcript export, and parsing only reads the fields it displays.
 */

export interface TopReason {
  reason: string;
  probability: number;
}

export interface SessionStart {
  type: "session_start";
  session_id: string;
  ts?: number;
  profile: Record<string, string | number | null>;
}

export interface UserMessage {
  type: "user_message";
  session_id: string;
  ts?: number;
  text: string;
}

export interface BotMessage {
  type: "bot_message";
  session_id: string;
  ts?: number;
  text: string;
  template_id?: string | null;
}

export interface RoutingDecision {
  type: "routing_decision";
  session_id: string;
  ts?: number;
  department: string;
  auto_routed: boolean;
  threshold: number;
  max_score: number;
  top_reasons: TopReason[];
  rule_id?: string | null;
}

export interface ErrorEnvelope {
  type: "error";
  session_id?: string | null;
  ts?: number;
  code: string;
  message: string;
}

export interface SessionEnd {
  type: "session_end";
  session_id: string;
  ts?: number;
}

export type Envelope =
  | SessionStart
  | UserMessage
  | BotMessage
  | RoutingDecision
  | ErrorEnvelope
  | SessionEnd;

export const ENVELOPE_TYPES = [
  "session_start",
  "user_message",
  "bot_message",
  "routing_decision",
  "error",
  "session_end",
] as const;

export class ProtocolError extends Error {}

/** Decode one wire line; unknown types and junk raise ProtocolError. */
export function parseEnvelope(line: string): Envelope {
  let doc: unknown;
  try {
    doc = JSON.parse(line);
  } catch (err) {
    throw new ProtocolError(`line is not valid JSON: ${(err as Error).message}`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new ProtocolError("envelope must be a JSON object");
  }
  const type = (doc as { type?: unknown }).type;
  if (typeof type !== "string" || !(ENVELOPE_TYPES as readonly string[]).includes(type)) {
    throw new ProtocolError(`unknown envelope type ${JSON.stringify(type)}`);
  }
  const envelope = doc as Envelope;
  if (envelope.type === "routing_decision") {
    if (!Array.isArray(envelope.top_reasons) || typeof envelope.department !== "string") {
      throw new ProtocolError("malformed routing_decision envelope");
    }
  }
  if (envelope.type === "bot_message" && typeof envelope.text !== "string") {
    throw new ProtocolError("malformed bot_message envelope");
  }
  return envelope;
}

/** Encode an envelope as one wire line (no trailing newline). */
export function encodeEnvelope(envelope: Envelope): string {
  return JSON.stringify(envelope);
}
