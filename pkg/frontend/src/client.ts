// WebSocket client for the live service: parses inbound frames, exposes a
// typed send, and reconnects with a fixed backoff.

import {
  Inbound,
  LimbCommand,
  SessionControl,
  parseInbound,
} from "./protocol.js";

export interface ClientHooks {
  onUpdate(frame: Inbound): void;
  onStatus(status: "connecting" | "open" | "closed"): void;
}

export class LiveClient {
  private ws: WebSocket | null = null;
  private closed = false;
  private readonly url: string;
  private readonly hooks: ClientHooks;
  private readonly backoffMs: number;

  constructor(url: string, hooks: ClientHooks, backoffMs = 1000) {
    this.url = url;
    this.hooks = hooks;
    this.backoffMs = backoffMs;
  }

  connect(): void {
    this.closed = false;
    this.hooks.onStatus("connecting");
    this.ws = new WebSocket(this.url);
    this.ws.onopen = () => this.hooks.onStatus("open");
    this.ws.onmessage = (ev) => {
      try {
        this.hooks.onUpdate(parseInbound(String(ev.data)));
      } catch (e) {
        console.warn("dropping malformed frame:", e);
      }
    };
    this.ws.onclose = () => {
      this.hooks.onStatus("closed");
      this.ws = null;
      if (!this.closed) {
        setTimeout(() => this.connect(), this.backoffMs);
      }
    };
  }

  send(msg: LimbCommand | SessionControl): boolean {
    if (this.ws === null || this.ws.readyState !== WebSocket.OPEN) {
      return false;
    }
    this.ws.send(JSON.stringify(msg));
    return true;
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }
}
