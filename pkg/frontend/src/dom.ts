import type { ExplorerApp, AppView } from "./app.js";
import { HINT_COLOR } from "./render.js";

function px(n: number): string {
  return `${n}px`;
}

/** Bind an ExplorerApp to the page: absolute-positioned components inside a
 * phone frame, the hint outline + floating label, and the STG side panel. */
export function mount(app: ExplorerApp, root: HTMLElement): void {
  const frame = document.createElement("div");
  frame.className = "screen-frame";
  const panel = document.createElement("div");
  panel.className = "stg-panel";
  const status = document.createElement("div");
  status.className = "status-bar";
  root.append(status, frame, panel);

  app.onRender((view: AppView) => {
    const { screen } = view;
    frame.style.width = px(screen.viewport.w);
    frame.style.height = px(screen.viewport.h);
    frame.replaceChildren();

    for (const c of screen.components) {
      const el = document.createElement("div");
      el.className = `component kind-${c.kind}` + (c.hinted ? " hinted" : "");
      el.textContent = c.content ?? c.localId;
      Object.assign(el.style, {
        position: "absolute",
        left: px(c.bounds.x),
        top: px(c.bounds.y),
        width: px(c.bounds.w),
        height: px(c.bounds.h),
        outline: c.hinted ? `3px solid ${HINT_COLOR}` : "",
      });
      el.addEventListener("click", () => void app.interact({ kind: "click", componentId: c.localId }));
      el.addEventListener("contextmenu", (ev) => {
        ev.preventDefault();
        void app.interact({ kind: "long_press", componentId: c.localId });
      });
      frame.appendChild(el);
    }

    const back = document.createElement("div");
    back.className = "back-key" + (screen.backKey.hinted ? " hinted" : "");
    back.textContent = "◀";
    Object.assign(back.style, {
      position: "absolute",
      left: px(screen.backKey.bounds.x),
      top: px(screen.backKey.bounds.y),
      width: px(screen.backKey.bounds.w),
      height: px(screen.backKey.bounds.h),
      outline: screen.backKey.hinted ? `3px solid ${HINT_COLOR}` : "",
    });
    back.addEventListener("click", () => void app.interact({ kind: "back" }));
    frame.appendChild(back);

    if (screen.overlay) {
      const label = document.createElement("div");
      label.className = "hint-label";
      label.textContent = screen.overlay.label;
      Object.assign(label.style, {
        position: "absolute",
        left: px(screen.overlay.bounds.x),
        top: px(Math.max(0, screen.overlay.bounds.y - 20)),
        color: HINT_COLOR,
      });
      frame.appendChild(label);
    }

    if (screen.completed) {
      const banner = document.createElement("div");
      banner.className = "completion-banner";
      banner.textContent = "exploration complete";
      frame.appendChild(banner);
    }

    status.textContent =
      `${screen.activity} / ${screen.stateId} - coverage ${(screen.coverage * 100).toFixed(0)}%` +
      (view.toast ? ` - ${view.toast}` : "");

    panel.replaceChildren();
    for (const node of view.graph.nodes) {
      const dot = document.createElement("span");
      dot.className =
        "stg-node" + (node.visited ? " visited" : "") + (node.current ? " current" : "") +
        (view.graph.route.includes(node.id) ? " on-route" : "");
      dot.title = node.id;
      panel.appendChild(dot);
    }
  });

  app.startIdleTicks();
}
