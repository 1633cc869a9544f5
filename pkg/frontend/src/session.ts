/**
 * Console session state machine, transport-agnostic.
 *
 * A Transport delivers raw envelope lines both ways; the session keeps the
 * chat turns, the transcript (verbatim lines) and the latest decision view.
 * The browser uses the WebSocket transport; tests drive a fake or a spawned
 * stdio service through the same interface.
 */

import { panelViewFromLine, PanelView } from "./decision.js";
import { encodeEnvelope, parseEnvelope } from "./protocol.js";
import { Transcript } from "./transcript.js";

export interface Transport {
  send(line: string): void;
  close(): void;
}

export interface ChatTurn {
  who: "user" | "bot" | "system";
  text: string;
}

export interface ProfilePreset {
  id: string;
  label: string;
  profile: Record<string, string | number | null>;
}

export type SessionPhase = "connecting" | "open" | "completed" | "error";

export interface SessionEvents {
  onTurn?(turn: ChatTurn): void;
  onDecision?(view: PanelView): void;
  onPhase?(phase: SessionPhase, detail?: string): void;
}

let sessionCounter = 0;

export function newSessionId(): string {
  sessionCounter += 1;
  const noise = Math.random().toString(36).slice(2, 8);
  return `console-${Date.now().toString(36)}-${noise}-${sessionCounter}`;
}

export class ConsoleSession {
  readonly sessionId: string;
  readonly transcript = new Transcript();
  readonly turns: ChatTurn[] = [];
  decision: PanelView | null = null;
  phase: SessionPhase = "connecting";

  private transport: Transport | null = null;

  constructor(
    readonly preset: ProfilePreset,
    private readonly events: SessionEvents = {},
    sessionId?: string,
  ) {
    this.sessionId = sessionId ?? newSessionId();
  }

  /** Wire up a transport and announce the session with the chosen profile. */
  start(transport: Transport): void {
    this.transport = transport;
    this.setPhase("open");
    this.sendLine(
      encodeEnvelope({
        type: "session_start",
        session_id: this.sessionId,
        profile: this.preset.profile,
      }),
    );
  }

  sendUserMessage(text: string): void {
    if (this.phase !== "open" || !this.transport) {
      throw new Error(`cannot send in phase ${this.phase}`);
    }
    this.pushTurn({ who: "user", text });
    this.sendLine(
      encodeEnvelope({ type: "user_message", session_id: this.sessionId, text }),
    );
  }

  /** Feed one raw line received from the service. */
  receiveLine(line: string): void {
    this.transcript.recordReceived(line);
    let envelope;
    try {
      envelope = parseEnvelope(line);
    } catch {
      this.decision = panelViewFromLine(line);
      this.events.onDecision?.(this.decision);
      return;
    }
    switch (envelope.type) {
      case "bot_message":
        this.pushTurn({ who: "bot", text: envelope.text });
        break;
      case "routing_decision":
        this.decision = panelViewFromLine(line);
        this.events.onDecision?.(this.decision);
        break;
      case "session_end":
        this.setPhase("completed");
        break;
      case "error":
        this.pushTurn({ who: "system", text: `error [${envelope.code}]: ${envelope.message}` });
        break;
      default:
        // echoes of client envelope types are unexpected; surface them
        this.pushTurn({ who: "system", text: `unexpected envelope: ${envelope.type}` });
    }
  }

  transportFailed(detail: string): void {
    this.setPhase("error", detail);
  }

  private sendLine(line: string): void {
    this.transcript.recordSent(line);
    this.transport?.send(line);
  }

  private pushTurn(turn: ChatTurn): void {
    this.turns.push(turn);
    this.events.onTurn?.(turn);
  }

  private setPhase(phase: SessionPhase, detail?: string): void {
    this.phase = phase;
    this.events.onPhase?.(phase, detail);
  }
}
