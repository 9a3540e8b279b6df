// Gateway client: REST calls plus the resumable event stream.
//
// The stream reader remembers the last applied sequence number; on loss it
// reports stale and reconnects with ?after=<lastSeq>, so no event is skipped
// or double-applied.

import { NdjsonParser } from "./ndjson.js";
import type { Command, GatewayEvent, MenuView, SessionInfo, WorldSnapshot } from "./types.js";

export interface Transport {
  getJson(path: string): Promise<unknown>;
  postJson(path: string, body: unknown): Promise<unknown>;
  // opens a stream; onChunk receives raw text pieces; resolves when the
  // connection ends, rejects on failure
  stream(path: string, onChunk: (text: string) => void, signal?: AbortSignal): Promise<void>;
}

export function fetchTransport(baseUrl: string): Transport {
  return {
    async getJson(path) {
      const resp = await fetch(baseUrl + path);
      if (!resp.ok) throw new Error(`GET ${path}: ${resp.status}`);
      return resp.json();
    },
    async postJson(path, body) {
      const resp = await fetch(baseUrl + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      });
      if (!resp.ok) throw new Error(`POST ${path}: ${resp.status}`);
      return resp.json();
    },
    async stream(path, onChunk, signal) {
      const resp = await fetch(baseUrl + path, { signal });
      if (!resp.ok || resp.body === null) throw new Error(`stream ${path}: ${resp.status}`);
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) return;
        onChunk(decoder.decode(value, { stream: true }));
      }
    },
  };
}

export class GatewayClient {
  constructor(private transport: Transport) {}

  world(): Promise<WorldSnapshot> {
    return this.transport.getJson("/world") as Promise<WorldSnapshot>;
  }

  menu(sid: string): Promise<MenuView> {
    return this.transport.getJson(`/menu/${sid}`) as Promise<MenuView>;
  }

  session(sid: string): Promise<SessionInfo> {
    return this.transport.getJson(`/session/${sid}`) as Promise<SessionInfo>;
  }

  createSession(options: { error_rate?: number; seed?: number; goal?: string }): Promise<{ session: string }> {
    return this.transport.postJson("/session", options) as Promise<{ session: string }>;
  }

  // The only message kind the UI ever sends on behalf of the user.
  postCommand(sid: string, command: Command): Promise<{ intended: Command; emitted: Command; phase: string }> {
    return this.transport.postJson(`/command/${sid}`, { command }) as Promise<{
      intended: Command;
      emitted: Command;
      phase: string;
    }>;
  }
}

export interface StreamHandle {
  stop(): void;
}

export function streamEvents(
  transport: Transport,
  opts: {
    fromSeq: () => number;
    onEvent: (event: GatewayEvent) => void;
    onStale: () => void;
    onLive: () => void;
    retryDelayMs?: number;
    idleTimeout?: number;
  },
): StreamHandle {
  let stopped = false;
  const retryDelay = opts.retryDelayMs ?? 1000;

  const loop = async () => {
    while (!stopped) {
      const parser = new NdjsonParser<GatewayEvent>();
      try {
        opts.onLive();
        const idle = opts.idleTimeout !== undefined ? `&idle_timeout=${opts.idleTimeout}` : "";
        await transport.stream(`/events?after=${opts.fromSeq()}${idle}`, (chunk) => {
          for (const event of parser.push(chunk)) {
            if (event.seq > opts.fromSeq()) {
              opts.onEvent(event);
            }
          }
        });
      } catch {
        // fall through to stale handling
      }
      if (stopped) return;
      opts.onStale();
      await new Promise((resolve) => setTimeout(resolve, retryDelay));
    }
  };
  void loop();
  return {
    stop() {
      stopped = true;
    },
  };
}
