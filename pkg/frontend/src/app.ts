// Browser entry point: wires the gateway client, state mirror, keyboard and
// renderer into the live control loop.

import { GatewayClient, fetchTransport, streamEvents } from "./client.js";
import { DEFAULT_KEYS, bindKeys } from "./keys.js";
import { applyEvent, initialState, markLive, markStale, seedWorld } from "./state.js";
import { renderAll } from "./render.js";
import type { RenderTargets } from "./render.js";

export async function startApp(root: Document, baseUrl = ""): Promise<void> {
  const targets: RenderTargets = {
    canvas: root.getElementById("map") as HTMLCanvasElement,
    menuList: root.getElementById("menu")!,
    breadcrumb: root.getElementById("breadcrumb")!,
    feed: root.getElementById("feed")!,
    banner: root.getElementById("banner")!,
  };

  const params = new URLSearchParams(root.location?.search ?? "");
  const errorRate = parseFloat(params.get("error_rate") ?? "0");

  const transport = fetchTransport(baseUrl);
  const client = new GatewayClient(transport);

  let state = initialState();
  const world = await client.world();
  state = seedWorld(state, world.objects, world.revision);

  const created = await client.createSession(
    errorRate > 0 ? { error_rate: errorRate } : {},
  );
  const sid = created.session;
  state.menu = await client.menu(sid);
  renderAll(state, targets);

  const repaint = () => renderAll(state, targets);

  streamEvents(transport, {
    fromSeq: () => state.lastSeq,
    onEvent: (event) => {
      state = applyEvent(state, event);
      repaint();
    },
    onStale: () => {
      state = markStale(state);
      repaint();
    },
    onLive: () => {
      state = markLive(state);
      repaint();
    },
  });

  const handler = bindKeys(DEFAULT_KEYS, (command) => {
    void client.postCommand(sid, command).catch(() => {
      /* finished sessions reject commands; the banner already shows the status */
    });
  });
  root.addEventListener("keydown", (ev) => {
    if (handler((ev as KeyboardEvent).key) !== null) {
      ev.preventDefault();
    }
  });

  // clickable fallback buttons for the five commands
  for (const button of Array.from(root.querySelectorAll("[data-command]"))) {
    button.addEventListener("click", () => {
      const command = (button as HTMLElement).dataset.command!;
      void client.postCommand(sid, command as never).catch(() => {});
    });
  }
}
