// Payload shapes of the session service. The UI is a pure renderer of these
// documents: every bound, hint and coverage figure comes from the server.

export interface Bounds {
  x: number;
  y: number;
  w: number;
  h: number;
}

export interface ComponentView {
  local_id: string;
  kind: string;
  content: string | null;
  bounds: Bounds;
}

export interface OutgoingAction {
  action_id: string;
  trigger: "click" | "back" | "long_press";
  component_ref: string;
  target: string;
}

export interface ScreenPayload {
  state_id: string;
  activity: string;
  viewport: { w: number; h: number };
  components: ComponentView[];
  back_key: { bounds: Bounds };
  outgoing: OutgoingAction[];
}

export interface HintPayload {
  action_id: string;
  trigger: "click" | "back" | "long_press";
  component_ref: string;
  target: string;
  overlay: { bounds: Bounds; label: string };
}

export interface PlanPayload {
  node_order: string[];
  actions: string[];
  total_cost: number;
  uncovered: string[];
}

export interface SessionResponse {
  version: string;
  session_id: string;
  screen: ScreenPayload;
  hint: HintPayload | null;
  plan: PlanPayload;
  visited: string[];
  coverage: number;
  deviation: boolean;
}

export interface DisplayDocument {
  version: string;
  start_state: string;
  activities: string[];
  nodes: { state_id: string; activity: string }[];
  edges: {
    action_id: string;
    source: string;
    target: string;
    trigger: string;
    provenance: string;
  }[];
}

export interface MetricsPayload {
  steps: number;
  states_visited: number;
  states_total: number;
  activities_visited: number;
  activities_total: number;
  coverage: number;
  visit_counts: Record<string, number>;
  reached_full_coverage: boolean;
}

export interface ServiceError {
  code: string;
  message: string;
  path: string;
}

export type Gesture =
  | { kind: "click"; componentId: string }
  | { kind: "long_press"; componentId: string }
  | { kind: "back" };
