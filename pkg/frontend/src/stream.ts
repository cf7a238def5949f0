/**
 * NDJSON event stream consumer with resume.
 *
 * The server sends one JSON frame per line, blank lines as keepalives, and a
 * StreamClosed frame when it is shutting down on purpose. Anything else that
 * ends the stream counts as a connection failure: the reader waits and
 * reopens from the last delivered seq + 1, so a flaky connection can neither
 * duplicate nor drop events.
 */

import type { EventFrame } from "./types.js";

export type ConnectionState =
  | "idle"
  | "connecting"
  | "live"
  | "reconnecting"
  | "closed";

export interface EventStreamHandlers {
  onEvent: (frame: EventFrame) => void;
  onState?: (state: ConnectionState) => void;
}

export interface EventStreamOptions {
  fromSeq?: number;
  retryDelayMs?: number;
  fetchFn?: (input: string, init?: RequestInit) => Promise<Response>;
}

/** Splits incoming text into NDJSON lines; "" lines are keepalives. */
export class LineBuffer {
  private carry = "";

  push(chunk: string): string[] {
    const parts = (this.carry + chunk).split("\n");
    this.carry = parts.pop() ?? "";
    return parts;
  }

  /** Whatever is left when the stream ends. A clean stream leaves nothing. */
  flush(): string {
    const rest = this.carry;
    this.carry = "";
    return rest;
  }
}

export class EventStream {
  state: ConnectionState = "idle";

  private readonly baseUrl: string;
  private readonly retryDelayMs: number;
  private readonly fetchFn: (input: string, init?: RequestInit) => Promise<Response>;
  private nextSeq: number;
  private controller: AbortController | null = null;
  private stopped = false;
  private running = false;

  constructor(
    baseUrl: string,
    private readonly groupId: string,
    private readonly handlers: EventStreamHandlers,
    options: EventStreamOptions = {},
  ) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.nextSeq = options.fromSeq ?? 1;
    this.retryDelayMs = options.retryDelayMs ?? 1000;
    this.fetchFn =
      options.fetchFn ?? ((input, init) => fetch(input, init));
  }

  /** Seq the next (re)connect will ask for. */
  get resumeFrom(): number {
    return this.nextSeq;
  }

  start(): void {
    if (this.running) {
      return;
    }
    this.running = true;
    this.stopped = false;
    void this.runLoop();
  }

  /** Deliberate local close; no reconnect follows. */
  stop(): void {
    this.stopped = true;
    this.controller?.abort();
  }

  /** Drop the current connection and reopen from the last delivered seq + 1. */
  restart(): void {
    if (!this.running || this.stopped) {
      return;
    }
    this.controller?.abort();
  }

  private setState(state: ConnectionState): void {
    this.state = state;
    this.handlers.onState?.(state);
  }

  private async runLoop(): Promise<void> {
    let first = true;
    while (!this.stopped) {
      this.setState(first ? "connecting" : "reconnecting");
      first = false;
      this.controller = new AbortController();
      try {
        const goodbye = await this.consumeOnce(this.controller.signal);
        if (goodbye) {
          break;
        }
      } catch {
        // connection failed or was dropped; retried below unless stopped
      }
      if (this.stopped) {
        break;
      }
      this.setState("reconnecting");
      await sleep(this.retryDelayMs);
    }
    this.running = false;
    this.setState("closed");
  }

  /** One connection's lifetime. True when the server said goodbye. */
  private async consumeOnce(signal: AbortSignal): Promise<boolean> {
    const url =
      `${this.baseUrl}/groups/${encodeURIComponent(this.groupId)}` +
      `/events?from_seq=${this.nextSeq}`;
    const response = await this.fetchFn(url, { signal });
    if (!response.ok || !response.body) {
      throw new Error(`stream rejected: HTTP ${response.status}`);
    }
    this.setState("live");
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    const lines = new LineBuffer();
    try {
      while (true) {
        const { done, value } = await reader.read();
        if (done) {
          break;
        }
        for (const line of lines.push(decoder.decode(value, { stream: true }))) {
          if (this.handleLine(line)) {
            return true;
          }
        }
      }
      const rest = lines.flush();
      if (rest && this.handleLine(rest)) {
        return true;
      }
    } finally {
      try {
        await reader.cancel();
      } catch {
        // the connection may already be gone; nothing left to release
      }
    }
    throw new Error("stream ended without a goodbye frame");
  }

  /** True when the frame was the server's deliberate goodbye. */
  private handleLine(line: string): boolean {
    const trimmed = line.trim();
    if (!trimmed) {
      return false; // keepalive
    }
    let frame: EventFrame;
    try {
      frame = JSON.parse(trimmed) as EventFrame;
    } catch {
      // torn line from a dying connection; the reconnect will replay it
      return false;
    }
    if (frame.event_type === "StreamClosed") {
      this.handlers.onEvent(frame);
      return true;
    }
    if (typeof frame.seq === "number" && frame.seq >= this.nextSeq) {
      this.nextSeq = frame.seq + 1;
    }
    this.handlers.onEvent(frame);
    return false;
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
