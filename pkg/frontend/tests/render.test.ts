import { describe, expect, it } from "vitest";
import { renderScreen } from "../src/render.js";
import { buildGraphPanel } from "../src/stgMap.js";
import type { DisplayDocument, SessionResponse } from "../src/types.js";

function sampleResponse(): SessionResponse {
  return {
    version: "1",
    session_id: "sess-1",
    screen: {
      state_id: "A",
      activity: "act00",
      viewport: { w: 360, h: 640 },
      components: [
        { local_id: "root", kind: "container", content: null, bounds: { x: 0, y: 0, w: 360, h: 48 } },
        { local_id: "btn", kind: "button", content: "Go", bounds: { x: 16, y: 48, w: 344, h: 48 } },
      ],
      back_key: { bounds: { x: 120, y: 592, w: 120, h: 48 } },
      outgoing: [
        { action_id: "a1", trigger: "click", component_ref: "btn", target: "B" },
        { action_id: "a2", trigger: "back", component_ref: "touch_back", target: "A" },
      ],
    },
    hint: {
      action_id: "a1",
      trigger: "click",
      component_ref: "btn",
      target: "B",
      overlay: { bounds: { x: 16, y: 48, w: 344, h: 48 }, label: "click" },
    },
    plan: { node_order: ["A", "B"], actions: ["a1"], total_cost: 1, uncovered: [] },
    visited: ["A"],
    coverage: 0.5,
    deviation: false,
  };
}

describe("renderScreen", () => {
  it("outlines the hinted component and keeps the overlay inside the viewport", () => {
    const view = renderScreen(sampleResponse());
    expect(view.components.find((c) => c.localId === "btn")?.hinted).toBe(true);
    expect(view.components.find((c) => c.localId === "root")?.hinted).toBe(false);
    expect(view.backKey.hinted).toBe(false);
    expect(view.overlay).not.toBeNull();
    expect(view.overlay?.label).toBe("click");
    expect(view.completed).toBe(false);
  });

  it("puts a back hint on the navigation key, not on a component", () => {
    const response = sampleResponse();
    response.hint = {
      action_id: "a2",
      trigger: "back",
      component_ref: "touch_back",
      target: "A",
      overlay: { bounds: { x: 120, y: 592, w: 120, h: 48 }, label: "back" },
    };
    const view = renderScreen(response);
    expect(view.backKey.hinted).toBe(true);
    expect(view.components.some((c) => c.hinted)).toBe(false);
    expect(view.overlay?.label).toBe("back");
  });

  it("marks the screen completed when no hint remains", () => {
    const response = sampleResponse();
    response.hint = null;
    response.coverage = 1.0;
    const view = renderScreen(response);
    expect(view.completed).toBe(true);
    expect(view.overlay).toBeNull();
  });

  it("rejects overlays that escape the viewport", () => {
    const response = sampleResponse();
    response.hint!.overlay.bounds = { x: 350, y: 48, w: 344, h: 48 };
    expect(() => renderScreen(response)).toThrow(/escapes the viewport/);
  });
});

function sampleDisplay(n: number): DisplayDocument {
  const nodes = Array.from({ length: n }, (_, i) => ({
    state_id: `s${i}`,
    activity: `act${i % 3}`,
  }));
  return {
    version: "1",
    start_state: "s0",
    activities: ["act0", "act1", "act2"],
    nodes,
    edges: nodes.slice(1).map((node, i) => ({
      action_id: `a${i}`,
      source: nodes[i]!.state_id,
      target: node.state_id,
      trigger: "click",
      provenance: "dynamic",
    })),
  };
}

describe("buildGraphPanel", () => {
  it("shows only the start state visited before any response arrives", () => {
    const panel = buildGraphPanel(sampleDisplay(6), null);
    expect(panel.collapsed).toBe(false);
    expect(panel.nodes.filter((n) => n.visited).map((n) => n.id)).toEqual(["s0"]);
    expect(panel.nodes.find((n) => n.current)?.id).toBe("s0");
  });

  it("takes visited set, current state and route from the latest response", () => {
    const response = sampleResponse();
    response.visited = ["s0", "s1", "s2"];
    response.screen.state_id = "s2";
    response.plan.node_order = ["s2", "s3", "s4"];
    const panel = buildGraphPanel(sampleDisplay(6), response);
    expect(panel.nodes.filter((n) => n.visited).length).toBe(3);
    expect(panel.nodes.find((n) => n.current)?.id).toBe("s2");
    expect(panel.route).toEqual(["s2", "s3", "s4"]);
  });

  it("collapses oversized graphs to one node per activity", () => {
    const panel = buildGraphPanel(sampleDisplay(600), null);
    expect(panel.collapsed).toBe(true);
    expect(panel.nodes.length).toBe(3);
    for (const edge of panel.edges) {
      expect(edge.source).not.toBe(edge.target);
    }
  });
});
