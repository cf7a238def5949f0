import { describe, expect, it } from "vitest";

import { EventStream, LineBuffer, type ConnectionState } from "../src/stream.js";
import type { EventFrame } from "../src/types.js";

function frame(seq: number, type = "MessagePosted"): string {
  return (
    JSON.stringify({ event_type: type, group_id: "g1", seq, payload: {}, ts: seq }) + "\n"
  );
}

const GOODBYE = JSON.stringify({ event_type: "StreamClosed", group_id: "g1" }) + "\n";

interface Connection {
  chunks: string[];
  end: "close" | "fail" | "hang";
  status?: number;
}

/** Scripted fetch: one Connection per call, honoring the abort signal. */
function makeFetch(script: Connection[], urls: string[]) {
  let call = 0;
  return async (input: string, init?: RequestInit): Promise<Response> => {
    urls.push(input);
    const conn = script[Math.min(call, script.length - 1)]!;
    call += 1;
    if (conn.status && conn.status >= 400) {
      return new Response(null, { status: conn.status });
    }
    const encoder = new TextEncoder();
    // chunks are handed over one pull at a time: erroring a stream discards
    // anything still queued, so a start()-time error would eat the chunks
    let next = 0;
    const stream = new ReadableStream<Uint8Array>({
      start(controller) {
        init?.signal?.addEventListener("abort", () => {
          try {
            controller.error(new Error("aborted"));
          } catch {
            // stream already settled
          }
        });
      },
      pull(controller) {
        if (next < conn.chunks.length) {
          controller.enqueue(encoder.encode(conn.chunks[next]!));
          next += 1;
          return;
        }
        if (conn.end === "close") {
          controller.close();
        } else if (conn.end === "fail") {
          controller.error(new Error("connection reset"));
        } else {
          // hang: leave the read pending until the abort listener fires
          return new Promise<void>(() => {});
        }
      },
    });
    return new Response(stream, { status: 200 });
  };
}

async function until(cond: () => boolean, ms = 3000): Promise<void> {
  const start = Date.now();
  while (!cond()) {
    if (Date.now() - start > ms) {
      throw new Error("condition not met in time");
    }
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}

interface Harness {
  stream: EventStream;
  events: EventFrame[];
  states: ConnectionState[];
  urls: string[];
}

function harness(script: Connection[], fromSeq = 1): Harness {
  const events: EventFrame[] = [];
  const states: ConnectionState[] = [];
  const urls: string[] = [];
  const stream = new EventStream(
    "http://test.invalid",
    "g1",
    {
      onEvent: (f) => events.push(f),
      onState: (s) => states.push(s),
    },
    { fromSeq, retryDelayMs: 1, fetchFn: makeFetch(script, urls) },
  );
  return { stream, events, states, urls };
}

describe("LineBuffer", () => {
  it("splits lines and carries partials", () => {
    const buffer = new LineBuffer();
    expect(buffer.push("a\nbc")).toEqual(["a"]);
    expect(buffer.push("d\n\ne\n")).toEqual(["bcd", "", "e"]);
    expect(buffer.flush()).toBe("");
  });

  it("flushes an unterminated tail", () => {
    const buffer = new LineBuffer();
    expect(buffer.push("partial")).toEqual([]);
    expect(buffer.flush()).toBe("partial");
    expect(buffer.flush()).toBe("");
  });
});

describe("EventStream", () => {
  it("delivers frames, skips keepalives, and honors the goodbye", async () => {
    const h = harness([
      { chunks: [frame(1), "\n", "\n", frame(2), GOODBYE], end: "close" },
    ]);
    h.stream.start();
    await until(() => h.states.includes("closed"));
    expect(h.events.map((e) => e.seq)).toEqual([1, 2, undefined]);
    expect(h.events[2]!.event_type).toBe("StreamClosed");
    expect(h.urls).toHaveLength(1);
    expect(h.urls[0]).toContain("from_seq=1");
    expect(h.states[0]).toBe("connecting");
    expect(h.states).toContain("live");
  });

  it("reassembles frames torn across chunks", async () => {
    const one = frame(1);
    const h = harness([
      { chunks: [one.slice(0, 7), one.slice(7), GOODBYE], end: "close" },
    ]);
    h.stream.start();
    await until(() => h.states.includes("closed"));
    expect(h.events.map((e) => e.event_type)).toEqual(["MessagePosted", "StreamClosed"]);
  });

  it("reconnects after a failure, resuming past delivered seqs", async () => {
    const h = harness([
      { chunks: [frame(1), frame(2)], end: "fail" },
      { chunks: [frame(3), GOODBYE], end: "close" },
    ]);
    h.stream.start();
    await until(() => h.states.includes("closed"));
    expect(h.urls).toHaveLength(2);
    expect(h.urls[1]).toContain("from_seq=3");
    expect(h.events.filter((e) => typeof e.seq === "number").map((e) => e.seq)).toEqual([
      1, 2, 3,
    ]);
    expect(h.states).toContain("reconnecting");
  });

  it("treats an end without a goodbye as a failure", async () => {
    const h = harness([
      { chunks: [frame(1)], end: "close" },
      { chunks: [GOODBYE], end: "close" },
    ]);
    h.stream.start();
    await until(() => h.states.includes("closed"));
    expect(h.urls).toHaveLength(2);
    expect(h.urls[1]).toContain("from_seq=2");
  });

  it("retries rejected connections", async () => {
    const h = harness([
      { chunks: [], end: "close", status: 503 },
      { chunks: [GOODBYE], end: "close" },
    ]);
    h.stream.start();
    await until(() => h.states.includes("closed"));
    expect(h.urls).toHaveLength(2);
    expect(h.events.map((e) => e.event_type)).toEqual(["StreamClosed"]);
  });

  it("stop() closes without reconnecting", async () => {
    const h = harness([{ chunks: [frame(1)], end: "hang" }]);
    h.stream.start();
    await until(() => h.events.length === 1);
    h.stream.stop();
    await until(() => h.states.includes("closed"));
    expect(h.urls).toHaveLength(1);
    expect(h.events).toHaveLength(1);
  });

  it("restart() drops the connection and resumes without gaps or duplicates", async () => {
    const h = harness([
      { chunks: [frame(1), frame(2)], end: "hang" },
      { chunks: [frame(3), GOODBYE], end: "close" },
    ]);
    h.stream.start();
    await until(() => h.events.length === 2);
    h.stream.restart();
    await until(() => h.states.includes("closed"));
    expect(h.urls).toHaveLength(2);
    expect(h.urls[1]).toContain("from_seq=3");
    const seqs = h.events.filter((e) => typeof e.seq === "number").map((e) => e.seq);
    expect(seqs).toEqual([1, 2, 3]);
  });

  it("starts from the requested seq", async () => {
    const h = harness([{ chunks: [frame(4), GOODBYE], end: "close" }], 4);
    h.stream.start();
    await until(() => h.states.includes("closed"));
    expect(h.urls[0]).toContain("from_seq=4");
  });

  it("never regresses the resume mark on stale frames", async () => {
    const h = harness([
      { chunks: [frame(5), frame(3), GOODBYE], end: "close" },
    ]);
    h.stream.start();
    await until(() => h.states.includes("closed"));
    expect(h.stream.resumeFrom).toBe(6);
  });
});
