/** WebSocket session client: handshake, sequence numbering, ack tracking,
 * and automatic reconnect (a fresh full snapshot follows every connect). */

import { PROTOCOL, type CommandPayload, type ServerMessage, type WireBody } from "./protocol.js";

export interface SessionCallbacks {
  onState: (msg: ServerMessage) => void;
  onEvent: (event: Record<string, unknown>) => void;
  onStatus: (status: string, role: string | null) => void;
}

export class SessionClient {
  private ws: WebSocket | null = null;
  private seq = 0;
  private pending = new Map<number, (result: unknown, err: string | null) => void>();
  role: string | null = null;
  private closed = false;

  constructor(
    readonly url: string,
    readonly callbacks: SessionCallbacks,
    readonly reconnectDelayMs = 1000,
  ) {}

  connect(): void {
    this.closed = false;
    this.callbacks.onStatus("connecting", null);
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => {
      this.seq = 0;
      ws.send(JSON.stringify({ v: PROTOCOL, type: "hello", role: "controller" }));
    };
    ws.onmessage = (raw) => this.handle(JSON.parse(String(raw.data)) as ServerMessage);
    ws.onclose = () => {
      this.role = null;
      this.callbacks.onStatus("disconnected", null);
      if (!this.closed) {
        setTimeout(() => this.connect(), this.reconnectDelayMs);
      }
    };
  }

  close(): void {
    this.closed = true;
    this.ws?.close();
  }

  private handle(msg: ServerMessage): void {
    if (msg.type === "welcome") {
      this.role = msg.role;
      this.callbacks.onStatus(
        msg.role === "controller" ? "connected (controller)" : "connected (observer)",
        msg.role,
      );
      return;
    }
    if (msg.type === "state") {
      this.callbacks.onState(msg);
      return;
    }
    if (msg.type === "event") {
      const ev = msg.event;
      if ((ev.kind === "ack" || ev.kind === "error") && typeof ev.seq === "number") {
        const waiter = this.pending.get(ev.seq);
        if (waiter) {
          this.pending.delete(ev.seq);
          waiter(ev.result, ev.kind === "error" ? String(ev.code) : null);
        }
      }
      this.callbacks.onEvent(ev);
    }
  }

  /** Send a command; resolves with the ack result or rejects on error. */
  command(payload: CommandPayload): Promise<unknown> {
    return new Promise((resolve, reject) => {
      if (!this.ws || this.ws.readyState !== WebSocket.OPEN) {
        reject(new Error("not connected"));
        return;
      }
      this.seq += 1;
      this.pending.set(this.seq, (result, err) =>
        err ? reject(new Error(err)) : resolve(result),
      );
      this.ws.send(
        JSON.stringify({ v: PROTOCOL, type: "command", seq: this.seq, payload }),
      );
    });
  }

  sendInput(body: WireBody): void {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN || this.role !== "controller") {
      return;
    }
    this.seq += 1;
    this.ws.send(JSON.stringify({ v: PROTOCOL, type: "input", seq: this.seq, body }));
  }
}
