// Session state mirror: a pure reducer over the gateway event stream.
//
// The rendered view is a function of the last applied event sequence alone;
// the reducer never talks to the network.  Sequence gaps flag the state as
// needing a resync (the stream client then reconnects from lastSeq).

import type { Command, GatewayEvent, MenuView, WorldObjectJson } from "./types.js";

export interface FeedEntry {
  seq: number;
  text: string;
}

export interface ChannelStats {
  total: number;
  matches: number; // emitted === intended
}

export interface UiSessionState {
  lastSeq: number;
  gapDetected: boolean;
  connection: "live" | "stale";
  worldRevision: number;
  objects: Map<string, WorldObjectJson>;
  menu: MenuView | null;
  sessionStatus: string | null;
  runningAction: string | null;
  feed: FeedEntry[];
  stats: ChannelStats;
}

export const FEED_LIMIT = 50;

export function initialState(): UiSessionState {
  return {
    lastSeq: 0,
    gapDetected: false,
    connection: "live",
    worldRevision: 0,
    objects: new Map(),
    menu: null,
    sessionStatus: null,
    runningAction: null,
    feed: [],
    stats: { total: 0, matches: 0 },
  };
}

export function seedWorld(state: UiSessionState, objects: WorldObjectJson[], revision: number): UiSessionState {
  const next = cloneState(state);
  next.objects = new Map(objects.map((o) => [o.id, o]));
  next.worldRevision = revision;
  return next;
}

function cloneState(state: UiSessionState): UiSessionState {
  return {
    ...state,
    objects: new Map(state.objects),
    feed: [...state.feed],
    stats: { ...state.stats },
  };
}

function pushFeed(state: UiSessionState, seq: number, text: string): void {
  state.feed.push({ seq, text });
  if (state.feed.length > FEED_LIMIT) {
    state.feed.splice(0, state.feed.length - FEED_LIMIT);
  }
}

export function applyEvent(state: UiSessionState, event: GatewayEvent): UiSessionState {
  const next = cloneState(state);
  if (state.lastSeq > 0 && event.seq !== state.lastSeq + 1) {
    next.gapDetected = true;
  }
  next.lastSeq = Math.max(state.lastSeq, event.seq);

  switch (event.kind) {
    case "change": {
      next.worldRevision = Math.max(next.worldRevision, event.revision);
      if (event.change_kind === "removed" || event.object === null) {
        next.objects.delete(event.object_id);
      } else {
        next.objects.set(event.object_id, event.object);
      }
      const tag = event.expected ? "" : " (unexpected)";
      pushFeed(next, event.seq, `${event.change_kind} ${event.object_id}${tag}`);
      break;
    }
    case "decoded": {
      next.stats.total += 1;
      if (event.intended === event.emitted) {
        next.stats.matches += 1;
      }
      if (event.menu) {
        next.menu = event.menu;
      }
      const flip = event.intended === event.emitted ? "" : ` (wanted ${event.intended})`;
      pushFeed(next, event.seq, `decoded ${event.emitted}${flip}`);
      break;
    }
    case "transition": {
      next.sessionStatus = event.status;
      if (event.menu) {
        next.menu = event.menu;
      }
      next.runningAction = event.status === "executing" ? event.action ?? next.runningAction : null;
      pushFeed(next, event.seq, `session ${event.status}${event.action ? `: ${event.action}` : ""}`);
      break;
    }
  }
  return next;
}

export function applyAll(state: UiSessionState, events: GatewayEvent[]): UiSessionState {
  return events.reduce(applyEvent, state);
}

export function channelAccuracy(stats: ChannelStats): number {
  return stats.total === 0 ? NaN : stats.matches / stats.total;
}

export function markStale(state: UiSessionState): UiSessionState {
  return { ...state, connection: "stale" };
}

export function markLive(state: UiSessionState): UiSessionState {
  return { ...state, connection: "live", gapDetected: false };
}

// Outbound messages the UI is allowed to produce: exactly the five commands.
export function isCommand(value: string): value is Command {
  return (
    value === "go_up" ||
    value === "go_down" ||
    value === "select" ||
    value === "go_back" ||
    value === "do_nothing"
  );
}
