import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { LiveClient } from "./client.js";
import { Inbound, limbCommand } from "./protocol.js";
import { validUpdate } from "./protocol.test.js";

class FakeWebSocket {
  static instances: FakeWebSocket[] = [];
  static OPEN = 1;
  readonly url: string;
  readyState = 0;
  sent: string[] = [];
  onopen: (() => void) | null = null;
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;

  constructor(url: string) {
    this.url = url;
    FakeWebSocket.instances.push(this);
  }

  open(): void {
    this.readyState = FakeWebSocket.OPEN;
    this.onopen?.();
  }

  receive(data: string): void {
    this.onmessage?.({ data });
  }

  send(data: string): void {
    this.sent.push(data);
  }

  close(): void {
    this.readyState = 3;
    this.onclose?.();
  }
}

function newClient() {
  const updates: Inbound[] = [];
  const statuses: string[] = [];
  const client = new LiveClient("ws://test/ws", {
    onUpdate: (f) => updates.push(f),
    onStatus: (s) => statuses.push(s),
  });
  return { client, updates, statuses };
}

describe("LiveClient", () => {
  beforeEach(() => {
    FakeWebSocket.instances = [];
    vi.stubGlobal("WebSocket", FakeWebSocket);
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.unstubAllGlobals();
    vi.useRealTimers();
  });

  it("reports status transitions and delivers parsed frames", () => {
    const { client, updates, statuses } = newClient();
    client.connect();
    const ws = FakeWebSocket.instances[0];
    ws.open();
    ws.receive(JSON.stringify(validUpdate()));
    expect(statuses).toEqual(["connecting", "open"]);
    expect(updates).toHaveLength(1);
    expect(updates[0].type).toBe("state_update");
  });

  it("drops malformed frames without dying", () => {
    const { client, updates } = newClient();
    client.connect();
    const ws = FakeWebSocket.instances[0];
    ws.open();
    ws.receive("{broken");
    ws.receive(JSON.stringify(validUpdate()));
    expect(updates).toHaveLength(1);
  });

  it("send returns false until the socket is open", () => {
    const { client } = newClient();
    expect(client.send(limbCommand(0, 0, 0))).toBe(false);
    client.connect();
    const ws = FakeWebSocket.instances[0];
    expect(client.send(limbCommand(0, 0, 0))).toBe(false);
    ws.open();
    expect(client.send(limbCommand(0.1, 0, 0))).toBe(true);
    expect(JSON.parse(ws.sent[0]).shoulder_tilt).toBe(0.1);
  });

  it("reconnects after an unexpected close, but not after close()", () => {
    const { client, statuses } = newClient();
    client.connect();
    FakeWebSocket.instances[0].close();
    vi.advanceTimersByTime(1000);
    expect(FakeWebSocket.instances).toHaveLength(2);

    client.close();
    vi.advanceTimersByTime(5000);
    expect(FakeWebSocket.instances).toHaveLength(2);
    expect(statuses.filter((s) => s === "closed")).toHaveLength(2);
  });
});
