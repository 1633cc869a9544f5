/** DOM wiring: chat window on the left, operator debug panel on the right. */

import { PanelView } from "./decision.js";
import { loadPresets } from "./presets.js";
import { ChatTurn, ConsoleSession, ProfilePreset, SessionPhase } from "./session.js";
import { bridgeUrl, WsTransport } from "./ws.js";

interface Elements {
  presetSelect: HTMLSelectElement;
  serviceInput: HTMLInputElement;
  connectButton: HTMLButtonElement;
  exportButton: HTMLButtonElement;
  chatLog: HTMLElement;
  panel: HTMLElement;
  statusBanner: HTMLElement;
  messageInput: HTMLInputElement;
  sendButton: HTMLButtonElement;
}

function grab(): Elements {
  const byId = <T extends HTMLElement>(id: string) => document.getElementById(id) as T;
  return {
    presetSelect: byId<HTMLSelectElement>("preset"),
    serviceInput: byId<HTMLInputElement>("service-url"),
    connectButton: byId<HTMLButtonElement>("connect"),
    exportButton: byId<HTMLButtonElement>("export"),
    chatLog: byId<HTMLElement>("chat-log"),
    panel: byId<HTMLElement>("decision-panel"),
    statusBanner: byId<HTMLElement>("status"),
    messageInput: byId<HTMLInputElement>("message"),
    sendButton: byId<HTMLButtonElement>("send"),
  };
}

function turnElement(turn: ChatTurn): HTMLElement {
  const row = document.createElement("div");
  row.className = `turn turn-${turn.who}`;
  const bubble = document.createElement("div");
  bubble.className = "bubble";
  bubble.textContent = turn.text;
  row.appendChild(bubble);
  return row;
}

function renderPanel(panel: HTMLElement, view: PanelView): void {
  panel.innerHTML = "";
  if (view.kind === "fallback") {
    const note = document.createElement("p");
    note.className = "fallback-note";
    note.textContent = `unrenderable envelope: ${view.note}`;
    const raw = document.createElement("pre");
    raw.textContent = view.rawJson;
    panel.append(note, raw);
    return;
  }
  const heading = document.createElement("h3");
  heading.textContent = view.department;
  const badge = document.createElement("span");
  badge.className = `badge badge-${view.badge}`;
  badge.textContent = view.badgeText;
  heading.appendChild(badge);
  panel.appendChild(heading);

  for (const bar of view.bars) {
    const row = document.createElement("div");
    row.className = "bar-row";
    const fill = document.createElement("div");
    fill.className = "bar-fill";
    fill.style.width = `${bar.widthPercent.toFixed(1)}%`;
    const label = document.createElement("span");
    label.className = "bar-label";
    label.textContent = bar.label;
    row.append(fill, label);
    panel.appendChild(row);
  }
  const footer = document.createElement("p");
  footer.className = "panel-footer";
  footer.textContent =
    `top-3 mass ${(100 * view.topMass).toFixed(1)}% · ` +
    `max score ${view.maxScore.toFixed(3)} vs threshold ${view.threshold.toFixed(3)}` +
    (view.ruleId ? ` · rule ${view.ruleId}` : "");
  panel.appendChild(footer);
}

export async function boot(): Promise<void> {
  const el = grab();
  let presets: ProfilePreset[] = [];
  try {
    presets = await loadPresets();
    for (const preset of presets) {
      const option = document.createElement("option");
      option.value = preset.id;
      option.textContent = preset.label;
      el.presetSelect.appendChild(option);
    }
  } catch (err) {
    el.statusBanner.textContent = String(err);
    el.statusBanner.className = "status status-error";
  }

  let session: ConsoleSession | null = null;
  let transport: WsTransport | null = null;

  const setStatus = (phase: SessionPhase, detail?: string) => {
    el.statusBanner.className = `status status-${phase}`;
    el.statusBanner.textContent = detail ? `${phase}: ${detail}` : phase;
    const live = phase === "open";
    el.messageInput.disabled = !live;
    el.sendButton.disabled = !live;
  };

  const connect = () => {
    transport?.close();
    el.chatLog.innerHTML = "";
    el.panel.innerHTML = "";
    const preset = presets.find((p) => p.id === el.presetSelect.value) ?? presets[0];
    if (!preset) {
      setStatus("error", "no profile presets loaded");
      return;
    }
    session = new ConsoleSession(preset, {
      onTurn: (turn) => {
        el.chatLog.appendChild(turnElement(turn));
        el.chatLog.scrollTop = el.chatLog.scrollHeight;
      },
      onDecision: (view) => renderPanel(el.panel, view),
      onPhase: (phase, detail) => setStatus(phase, detail),
    });
    setStatus("connecting");
    const current = session;
    transport = new WsTransport(bridgeUrl(el.serviceInput.value), {
      onOpen: () => {},
      onLine: (line) => current.receiveLine(line),
      onError: (detail) => current.transportFailed(detail),
      onClose: () => {
        if (current.phase === "open") current.transportFailed("connection closed");
      },
    });
    session.start(transport);
  };

  const send = () => {
    const text = el.messageInput.value.trim();
    if (!text || !session || session.phase !== "open") return;
    session.sendUserMessage(text);
    el.messageInput.value = "";
  };

  el.connectButton.addEventListener("click", connect);
  el.sendButton.addEventListener("click", send);
  el.messageInput.addEventListener("keydown", (event) => {
    if (event.key === "Enter") send();
  });
  el.exportButton.addEventListener("click", () => {
    if (!session) return;
    const blob = new Blob([session.transcript.export()], { type: "text/plain" });
    const anchor = document.createElement("a");
    anchor.href = URL.createObjectURL(blob);
    anchor.download = `${session.sessionId}.transcript.txt`;
    anchor.click();
    URL.revokeObjectURL(anchor.href);
  });
  setStatus("connecting", "pick a profile and connect");
  el.messageInput.disabled = true;
  el.sendButton.disabled = true;
}
