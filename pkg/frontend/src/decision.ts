/**
 * Routing-decision view state for the operator debug panel.
 *
 * Every number displayed comes straight from the envelope; the console
 * computes layout (bar widths) but never probabilities.
 */

import { RoutingDecision, parseEnvelope } from "./protocol.js";

export interface ProbabilityBar {
  reason: string;
  probability: number;
  /** Bar width in percent of the panel, scaled to the largest bar. */
  widthPercent: number;
  label: string;
}

export interface DecisionView {
  kind: "decision";
  department: string;
  badge: "auto" | "human";
  badgeText: string;
  threshold: number;
  maxScore: number;
  ruleId: string | null;
  bars: ProbabilityBar[];
  /** Sum of the displayed top-k probabilities, for the panel footer. */
  topMass: number;
}

export interface FallbackView {
  kind: "fallback";
  rawJson: string;
  note: string;
}

export type PanelView = DecisionView | FallbackView;

export function renderDecision(envelope: RoutingDecision): DecisionView {
  const sorted = [...envelope.top_reasons].sort((a, b) => b.probability - a.probability);
  const scale = sorted.length > 0 ? sorted[0].probability : 1;
  const bars = sorted.map((entry) => ({
    reason: entry.reason,
    probability: entry.probability,
    widthPercent: scale > 0 ? (100 * entry.probability) / scale : 0,
    label: `${entry.reason} ${(100 * entry.probability).toFixed(1)}%`,
  }));
  const topMass = sorted.reduce((acc, entry) => acc + entry.probability, 0);
  return {
    kind: "decision",
    department: envelope.department,
    badge: envelope.auto_routed ? "auto" : "human",
    badgeText: envelope.auto_routed ? "auto-routed" : "human triage",
    threshold: envelope.threshold,
    maxScore: envelope.max_score,
    ruleId: envelope.rule_id ?? null,
    bars,
    topMass,
  };
}

/** Parse a raw line into the panel view; anything malformed gets the raw-JSON fallback. */
export function panelViewFromLine(line: string): PanelView {
  try {
    const envelope = parseEnvelope(line);
    if (envelope.type !== "routing_decision") {
      return { kind: "fallback", rawJson: line, note: `not a routing_decision (${envelope.type})` };
    }
    return renderDecision(envelope);
  } catch (err) {
    return { kind: "fallback", rawJson: line, note: (err as Error).message };
  }
}
