import type { DisplayDocument, SessionResponse } from "./types.js";

const COLLAPSE_THRESHOLD = 500;

export interface GraphNodeView {
  id: string;
  activity: string;
  visited: boolean;
  current: boolean;
}

export interface GraphPanelView {
  collapsed: boolean;
  nodes: GraphNodeView[];
  edges: { source: string; target: string }[];
  /** remaining planned route, drawn as a highlighted path */
  route: string[];
}

/**
 * View-model for the STG side panel. Oversized graphs collapse to one node
 * per activity; visited/current status and the route come verbatim from the
 * latest session response.
 */
export function buildGraphPanel(
  display: DisplayDocument,
  latest: SessionResponse | null,
): GraphPanelView {
  const visited = new Set(latest?.visited ?? [display.start_state]);
  const current = latest?.screen.state_id ?? display.start_state;
  const route = latest?.plan.node_order ?? [];

  if (display.nodes.length > COLLAPSE_THRESHOLD) {
    const byActivity = new Map<string, { visited: boolean; current: boolean }>();
    for (const node of display.nodes) {
      const entry = byActivity.get(node.activity) ?? { visited: false, current: false };
      entry.visited ||= visited.has(node.state_id);
      entry.current ||= node.state_id === current;
      byActivity.set(node.activity, entry);
    }
    const activityOf = new Map(display.nodes.map((n) => [n.state_id, n.activity]));
    const edgeKeys = new Set<string>();
    const edges: { source: string; target: string }[] = [];
    for (const edge of display.edges) {
      const s = activityOf.get(edge.source) ?? edge.source;
      const t = activityOf.get(edge.target) ?? edge.target;
      if (s !== t && !edgeKeys.has(`${s}>${t}`)) {
        edgeKeys.add(`${s}>${t}`);
        edges.push({ source: s, target: t });
      }
    }
    return {
      collapsed: true,
      nodes: [...byActivity.entries()].map(([id, st]) => ({
        id,
        activity: id,
        visited: st.visited,
        current: st.current,
      })),
      edges,
      route: [...new Set(route.map((id) => activityOf.get(id) ?? id))],
    };
  }

  return {
    collapsed: false,
    nodes: display.nodes.map((n) => ({
      id: n.state_id,
      activity: n.activity,
      visited: visited.has(n.state_id),
      current: n.state_id === current,
    })),
    edges: display.edges.map((e) => ({ source: e.source, target: e.target })),
    route,
  };
}
