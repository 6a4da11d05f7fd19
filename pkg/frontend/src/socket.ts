/**
 * Reconnecting WebSocket wrapper for the frontend channel.
 *
 * Exponential backoff between attempts; outbound sends while disconnected
 * are dropped (and counted) rather than queued, because stale teleop input
 * must never replay.  The WebSocket constructor is injectable so tests and
 * the node client can supply their own implementation.
 */

import { BridgeRecord, UiEventOut, parseRecord } from "./protocol.js";

export type ConnectionStatus = "connecting" | "open" | "closed";

interface WsLike {
  readyState: number;
  send(data: string): void;
  close(): void;
  onopen: ((ev?: unknown) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
}

export interface BridgeSocketOptions {
  url: string;
  onRecord: (record: BridgeRecord) => void;
  onStatus?: (status: ConnectionStatus) => void;
  /** injectable for tests / node; defaults to the global WebSocket */
  webSocket?: new (url: string) => WsLike;
  minBackoffMs?: number;
  maxBackoffMs?: number;
}

const WS_OPEN = 1;

export class BridgeSocket {
  dropped = 0;

  private ws: WsLike | null = null;
  private attempts = 0;
  private stopped = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(private readonly opts: BridgeSocketOptions) {}

  connect(): void {
    this.stopped = false;
    this.open();
  }

  close(): void {
    this.stopped = true;
    if (this.timer !== null) clearTimeout(this.timer);
    this.ws?.close();
    this.ws = null;
  }

  get isOpen(): boolean {
    return this.ws !== null && this.ws.readyState === WS_OPEN;
  }

  /** Send one UI event; returns false (and counts a drop) when offline. */
  send(event: UiEventOut): boolean {
    if (!this.isOpen) {
      this.dropped += 1;
      return false;
    }
    this.ws!.send(JSON.stringify(event));
    return true;
  }

  private open(): void {
    const Ctor = this.opts.webSocket
      ?? (globalThis as { WebSocket?: new (url: string) => WsLike }).WebSocket;
    if (!Ctor) throw new Error("no WebSocket implementation available");
    this.opts.onStatus?.("connecting");
    const ws = new Ctor(this.opts.url);
    this.ws = ws;
    ws.onopen = () => {
      this.attempts = 0;
      this.opts.onStatus?.("open");
    };
    ws.onmessage = (ev) => {
      const record = parseRecord(String(ev.data));
      if (record) this.opts.onRecord(record);
    };
    ws.onerror = () => { /* onclose follows */ };
    ws.onclose = () => {
      if (this.ws !== ws) return;
      this.ws = null;
      this.opts.onStatus?.("closed");
      if (!this.stopped) this.scheduleReconnect();
    };
  }

  private scheduleReconnect(): void {
    const min = this.opts.minBackoffMs ?? 500;
    const max = this.opts.maxBackoffMs ?? 10_000;
    const delay = Math.min(max, min * 2 ** this.attempts);
    this.attempts += 1;
    this.timer = setTimeout(() => this.open(), delay);
  }
}
