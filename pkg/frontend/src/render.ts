// View rendering: 2D top-down map plus menu, feed, status banner.
//
// Layout computation is separated from canvas/DOM calls so it can be tested
// headless: worldLayout turns the mirrored state into plain draw primitives.

import type { UiSessionState } from "./state.js";
import { channelAccuracy } from "./state.js";
import type { WorldObjectJson } from "./types.js";

export interface DrawShape {
  kind: "rect" | "disc" | "robot" | "label";
  id: string;
  x: number;
  y: number;
  size: number;
  color: string;
  text?: string;
}

const LOCATION_COLORS: Record<string, string> = {
  shelf: "#8d6e63",
  table: "#90a4ae",
  seat: "#7986cb",
  dock: "#616161",
};

const ITEM_COLORS: Record<string, string> = {
  cup: "#29b6f6",
  bottle: "#66bb6a",
};

function isLocation(obj: WorldObjectJson): boolean {
  return obj.type in LOCATION_COLORS;
}

export function worldLayout(state: UiSessionState): DrawShape[] {
  const shapes: DrawShape[] = [];
  const locations = new Map<string, WorldObjectJson>();
  for (const obj of state.objects.values()) {
    if (isLocation(obj) && obj.placement?.pose) {
      locations.set(obj.id, obj);
      shapes.push({
        kind: "rect",
        id: obj.id,
        x: obj.placement.pose.x,
        y: obj.placement.pose.y,
        size: 0.9,
        color: LOCATION_COLORS[obj.type],
        text: obj.id,
      });
    }
  }

  // items stack beside their location marker, in id order for stability
  const stacked = new Map<string, number>();
  const items = [...state.objects.values()]
    .filter((o) => o.type in ITEM_COLORS)
    .sort((a, b) => a.id.localeCompare(b.id));
  for (const obj of items) {
    const locId = obj.placement?.location;
    if (locId === undefined) continue;
    if (locId === "gripper") continue; // drawn with the robot
    const loc = locations.get(locId);
    if (loc?.placement?.pose === null || loc === undefined) continue;
    const slot = stacked.get(locId) ?? 0;
    stacked.set(locId, slot + 1);
    shapes.push({
      kind: "disc",
      id: obj.id,
      x: loc.placement!.pose!.x + 0.35 * slot - 0.3,
      y: loc.placement!.pose!.y - 0.45,
      size: 0.22,
      color: ITEM_COLORS[obj.type],
      text: obj.id,
    });
  }

  for (const obj of state.objects.values()) {
    if (obj.type === "robot" && obj.placement?.pose) {
      shapes.push({
        kind: "robot",
        id: obj.id,
        x: obj.placement.pose.x,
        y: obj.placement.pose.y,
        size: 0.4,
        color: "#ef5350",
        text: carriedItem(state, obj),
      });
    }
    if (obj.type === "person" && obj.placement) {
      const loc = locations.get(obj.placement.location);
      if (loc?.placement?.pose) {
        shapes.push({
          kind: "disc",
          id: obj.id,
          x: loc.placement.pose.x,
          y: loc.placement.pose.y + 0.5,
          size: 0.3,
          color: "#ffb74d",
          text: obj.id,
        });
      }
    }
  }
  return shapes;
}

function carriedItem(state: UiSessionState, robot: WorldObjectJson): string | undefined {
  const gripper = robot.attributes["gripper"];
  return typeof gripper === "string" && gripper !== "empty" ? gripper : undefined;
}

export function statusLine(state: UiSessionState): string {
  const parts: string[] = [];
  parts.push(state.connection === "stale" ? "STALE (reconnecting)" : "live");
  if (state.sessionStatus) {
    parts.push(`session: ${state.sessionStatus}`);
  }
  if (state.runningAction) {
    parts.push(`running: ${state.runningAction}`);
  }
  const acc = channelAccuracy(state.stats);
  if (!Number.isNaN(acc)) {
    parts.push(`channel accuracy: ${(acc * 100).toFixed(1)}% (${state.stats.total})`);
  }
  return parts.join(" | ");
}

// -- DOM/canvas glue (browser only) ------------------------------------------

export interface RenderTargets {
  canvas: HTMLCanvasElement;
  menuList: HTMLElement;
  breadcrumb: HTMLElement;
  feed: HTMLElement;
  banner: HTMLElement;
}

const WORLD_BOUNDS = { x0: 0, y0: 0, x1: 10, y1: 8 };

export function renderAll(state: UiSessionState, targets: RenderTargets): void {
  renderCanvas(state, targets.canvas);
  renderMenu(state, targets.menuList, targets.breadcrumb);
  renderFeed(state, targets.feed);
  targets.banner.textContent = statusLine(state);
  targets.banner.dataset.stale = state.connection === "stale" ? "1" : "0";
}

function renderCanvas(state: UiSessionState, canvas: HTMLCanvasElement): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const sx = canvas.width / (WORLD_BOUNDS.x1 - WORLD_BOUNDS.x0);
  const sy = canvas.height / (WORLD_BOUNDS.y1 - WORLD_BOUNDS.y0);
  const px = (x: number) => (x - WORLD_BOUNDS.x0) * sx;
  const py = (y: number) => canvas.height - (y - WORLD_BOUNDS.y0) * sy;

  ctx.fillStyle = "#fafafa";
  ctx.fillRect(0, 0, canvas.width, canvas.height);
  ctx.font = "11px sans-serif";

  for (const shape of worldLayout(state)) {
    ctx.fillStyle = shape.color;
    if (shape.kind === "rect") {
      const w = shape.size * sx;
      const h = shape.size * sy * 0.6;
      ctx.fillRect(px(shape.x) - w / 2, py(shape.y) - h / 2, w, h);
    } else if (shape.kind === "disc" || shape.kind === "robot") {
      ctx.beginPath();
      ctx.arc(px(shape.x), py(shape.y), shape.size * sx, 0, 2 * Math.PI);
      ctx.fill();
    }
    if (shape.text) {
      ctx.fillStyle = "#212121";
      ctx.fillText(shape.text, px(shape.x) + 6, py(shape.y) - 6);
    }
  }
}

function renderMenu(state: UiSessionState, list: HTMLElement, breadcrumb: HTMLElement): void {
  list.replaceChildren();
  const menu = state.menu;
  if (!menu) {
    return;
  }
  breadcrumb.textContent = menu.breadcrumb.join(" > ");
  menu.items.forEach((item, i) => {
    const li = document.createElement("li");
    li.textContent = item;
    if (i === menu.cursor) {
      li.className = "cursor";
    }
    list.appendChild(li);
  });
}

function renderFeed(state: UiSessionState, feed: HTMLElement): void {
  feed.replaceChildren();
  for (const entry of state.feed.slice(-12).reverse()) {
    const div = document.createElement("div");
    div.textContent = `#${entry.seq} ${entry.text}`;
    feed.appendChild(div);
  }
}
