// Wire types mirroring the gateway's JSON payloads.

export type Command = "go_up" | "go_down" | "select" | "go_back" | "do_nothing";

export const COMMANDS: readonly Command[] = [
  "go_up",
  "go_down",
  "select",
  "go_back",
  "do_nothing",
];

export interface PoseJson {
  x: number;
  y: number;
  theta: number;
}

export interface WorldObjectJson {
  id: string;
  type: string;
  attributes: Record<string, string | number>;
  placement: { location: string; pose: PoseJson | null } | null;
}

export interface WorldSnapshot {
  revision: number;
  objects: WorldObjectJson[];
}

export interface MenuView {
  items: string[];
  cursor: number;
  breadcrumb: string[];
  phase: string;
  level?: string;
  plan?: string[];
  plan_cursor?: number;
  status?: string;
  error?: string | null;
}

export interface ChangeEvent {
  seq: number;
  kind: "change";
  revision: number;
  change_kind: "added" | "removed" | "modified";
  object_id: string;
  expected: boolean;
  object: WorldObjectJson | null;
}

export interface DecodedEvent {
  seq: number;
  kind: "decoded";
  session: string;
  intended: Command;
  emitted: Command;
  timestamp: number;
  menu?: MenuView;
}

export interface TransitionEvent {
  seq: number;
  kind: "transition";
  session: string;
  status: string;
  action?: string;
  menu?: MenuView;
}

export type GatewayEvent = ChangeEvent | DecodedEvent | TransitionEvent;

export interface SessionInfo {
  session: string;
  phase: string;
  status?: string;
  plan?: string[];
  cursor?: number;
  executed?: Record<string, number>;
  scheduled?: Record<string, number>;
  retries?: number;
}
