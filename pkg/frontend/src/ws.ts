/**
 * Browser transport: the service's line protocol over its /ws bridge,
 * one envelope per text frame.
 */

import { Transport } from "./session.js";

export interface WsCallbacks {
  onLine(line: string): void;
  onOpen(): void;
  onError(detail: string): void;
  onClose(): void;
}

export class WsTransport implements Transport {
  private socket: WebSocket;
  private queue: string[] = [];
  private ready = false;

  constructor(url: string, callbacks: WsCallbacks) {
    this.socket = new WebSocket(url);
    this.socket.onopen = () => {
      this.ready = true;
      for (const line of this.queue.splice(0)) this.socket.send(line);
      callbacks.onOpen();
    };
    this.socket.onmessage = (event) => callbacks.onLine(String(event.data));
    this.socket.onerror = () => callbacks.onError(`cannot reach ${url}`);
    this.socket.onclose = () => callbacks.onClose();
  }

  send(line: string): void {
    if (this.ready) this.socket.send(line);
    else this.queue.push(line);
  }

  close(): void {
    this.socket.close();
  }
}

/** Default bridge URL for a service base like "http://localhost:8000". */
export function bridgeUrl(serviceBase: string): string {
  const base = new URL(serviceBase);
  const scheme = base.protocol === "https:" ? "wss:" : "ws:";
  return `${scheme}//${base.host}/ws`;
}
