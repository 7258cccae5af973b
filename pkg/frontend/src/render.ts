import type { Bounds, HintPayload, SessionResponse } from "./types.js";

// theme constant for the hint outline (echoes the bounding-box annotation style)
export const HINT_COLOR = "#e6003c";

export interface OverlayView {
  bounds: Bounds;
  label: string;
  trigger: "click" | "back" | "long_press";
  color: string;
  onBackKey: boolean;
}

export interface ScreenView {
  stateId: string;
  activity: string;
  viewport: { w: number; h: number };
  components: {
    localId: string;
    kind: string;
    content: string | null;
    bounds: Bounds;
    hinted: boolean;
  }[];
  backKey: { bounds: Bounds; hinted: boolean };
  overlay: OverlayView | null;
  coverage: number;
  completed: boolean;
}

function within(inner: Bounds, outer: { w: number; h: number }): boolean {
  return (
    inner.x >= 0 &&
    inner.y >= 0 &&
    inner.x + inner.w <= outer.w &&
    inner.y + inner.h <= outer.h
  );
}

function overlayFor(hint: HintPayload, backKey: Bounds): OverlayView {
  const onBackKey =
    hint.trigger === "back" &&
    hint.overlay.bounds.x === backKey.x &&
    hint.overlay.bounds.y === backKey.y;
  return {
    bounds: hint.overlay.bounds,
    label: hint.overlay.label,
    trigger: hint.trigger,
    color: HINT_COLOR,
    onBackKey,
  };
}

/**
 * Pure view-model of a session response: components at server bounds, the
 * hinted component outlined, and a completion banner when the plan is done.
 */
export function renderScreen(response: SessionResponse): ScreenView {
  const { screen, hint } = response;
  const overlay = hint === null ? null : overlayFor(hint, screen.back_key.bounds);
  if (overlay !== null && !within(overlay.bounds, screen.viewport)) {
    throw new Error(
      `hint overlay ${JSON.stringify(overlay.bounds)} escapes the viewport`,
    );
  }
  const hintedComponent =
    hint !== null && !(hint.trigger === "back" && hint.component_ref === "touch_back")
      ? hint.component_ref
      : null;
  return {
    stateId: screen.state_id,
    activity: screen.activity,
    viewport: screen.viewport,
    components: screen.components.map((c) => ({
      localId: c.local_id,
      kind: c.kind,
      content: c.content,
      bounds: c.bounds,
      hinted: c.local_id === hintedComponent,
    })),
    backKey: {
      bounds: screen.back_key.bounds,
      hinted: overlay !== null && overlay.onBackKey,
    },
    overlay,
    coverage: response.coverage,
    completed: hint === null,
  };
}
