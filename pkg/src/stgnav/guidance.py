"""Live guidance sessions: hint serving, deviation handling, idle replans.

A session is an event-sourced state machine over one graph. Every mutation
appends to the event log; replaying the log against a fresh session
reproduces the final state exactly. Component trees are laid out
deterministically (vertical flow, fixed row height) so hint overlays have
bounds without a real device.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import ParameterError, UnknownStateError
from .planner import N_EXACT, Plan, replan
from .stg_core import TOUCH_BACK, ActionEdge, StateNode, StgGraph

DEFAULT_IDLE_THRESHOLD_MS = 5000

SCREEN_WIDTH = 360
MIN_SCREEN_HEIGHT = 640
ROW_HEIGHT = 48
INDENT = 16


@dataclass(frozen=True)
class Bounds:
    x: int
    y: int
    w: int
    h: int

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.w, "h": self.h}


@dataclass(frozen=True)
class ScreenLayout:
    state_id: str
    width: int
    height: int
    components: tuple[tuple[str, Bounds], ...]
    back_key: Bounds

    def bounds_of(self, local_id: str) -> Bounds | None:
        for lid, bounds in self.components:
            if lid == local_id:
                return bounds
        return None


def layout_state(state: StateNode) -> ScreenLayout:
    """Deterministic vertical-flow layout: one row per component in DFS
    order, indented by depth; the back key sits at the bottom center."""
    rows: list[tuple[str, Bounds]] = []

    def place(node, depth):
        x = depth * INDENT
        rows.append((node.local_id, Bounds(x, len(rows) * ROW_HEIGHT, SCREEN_WIDTH - x, ROW_HEIGHT)))
        for child in node.children:
            place(child, depth + 1)

    place(state.root, 0)
    height = max(MIN_SCREEN_HEIGHT, (len(rows) + 1) * ROW_HEIGHT)
    back_key = Bounds(SCREEN_WIDTH // 3, height - ROW_HEIGHT, SCREEN_WIDTH // 3, ROW_HEIGHT)
    return ScreenLayout(state.state_id, SCREEN_WIDTH, height, tuple(rows), back_key)


@dataclass(frozen=True)
class Hint:
    action_id: str
    trigger: str
    component_ref: str
    target: str
    overlay_bounds: Bounds
    overlay_label: str

    def to_dict(self) -> dict:
        return {
            "action_id": self.action_id,
            "trigger": self.trigger,
            "component_ref": self.component_ref,
            "target": self.target,
            "overlay": {"bounds": self.overlay_bounds.to_dict(), "label": self.overlay_label},
        }


@dataclass(frozen=True)
class TesterEvent:
    kind: str  # transition | idle_tick | hint_served | deviation | unknown_state
    payload: dict
    timestamp: int

    def to_dict(self) -> dict:
        return {"kind": self.kind, "payload": self.payload, "timestamp": self.timestamp}


_session_ids = itertools.count(1)


class Session:
    """Serialized event loop for one explorer; all timestamps are
    milliseconds since session start."""

    def __init__(self, graph: StgGraph, start: str,
                 idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS,
                 n_exact: int = N_EXACT, session_id: str | None = None):
        if start not in graph.state_map:
            raise ParameterError(f"unknown start state {start!r}")
        if idle_threshold_ms <= 0:
            raise ParameterError("idle threshold must be positive")
        self.session_id = session_id or f"session-{next(_session_ids)}"
        self.graph = graph
        self.start = start
        self.current = start
        self.visited: dict[str, int] = {start: 1}
        self.idle_threshold_ms = idle_threshold_ms
        self.n_exact = n_exact
        self.last_event_time = 0
        self.event_log: list[TesterEvent] = []
        self.plan: Plan = replan(graph, start, set(), n_exact)
        self.cursor = 0

    # --- hints ----------------------------------------------------------

    def current_hint(self) -> Hint | None:
        """Pure lookup of the next hinted move; None when the plan is done."""
        if self.cursor >= len(self.plan.actions):
            return None
        edge = self.graph.action_map[self.plan.actions[self.cursor]]
        return self._dress(edge)

    def _dress(self, edge: ActionEdge) -> Hint:
        layout = layout_state(self.graph.state_map[edge.source])
        if edge.trigger == "back" and edge.component_ref == TOUCH_BACK:
            bounds, label = layout.back_key, "back"
        else:
            bounds = layout.bounds_of(edge.component_ref)
            if bounds is None:
                bounds = layout.back_key
            label = {"click": "click", "back": "back", "long_press": "long press"}[edge.trigger]
        return Hint(edge.action_id, edge.trigger, edge.component_ref, edge.target, bounds, label)

    def serve_hint(self, at: int | None = None) -> Hint | None:
        """Hint lookup that also records a hint_served event (used by the
        HTTP layer; logged so replays reproduce the full log)."""
        hint = self.current_hint()
        at = self._at(at)
        self.event_log.append(TesterEvent(
            "hint_served", {"action_id": hint.action_id if hint else None}, at))
        return hint

    # --- events ---------------------------------------------------------

    def _at(self, at: int | None) -> int:
        if at is None:
            at = self.last_event_time + 1
        if self.event_log and at < self.event_log[-1].timestamp:
            raise ParameterError("timestamps must be non-decreasing")
        return at

    def report_transition(self, taken_action: str | None = None,
                          observed: str | None = None, at: int | None = None) -> None:
        """Record one explorer move. Following the hinted action advances the
        cursor; anything else is a deviation and replans from the observed
        state."""
        if taken_action is None and observed is None:
            raise ParameterError("either taken_action or observed is required")
        at = self._at(at)
        if taken_action is not None:
            edge = self.graph.action_map.get(taken_action)
            if edge is None:
                raise ParameterError(f"unknown action {taken_action!r}")
            if edge.source != self.current:
                raise ParameterError(
                    f"action {taken_action!r} is not available from {self.current!r}")
            if observed is not None and observed != edge.target:
                raise ParameterError(
                    f"observed state {observed!r} contradicts action target {edge.target!r}")
            observed = edge.target
        if observed not in self.graph.state_map:
            raise UnknownStateError(
                f"state {observed!r} is not in the graph; register it first")

        hint = self.current_hint()
        followed = hint is not None and (
            taken_action == hint.action_id
            or (taken_action is None and observed == hint.target)
        )

        self.current = observed
        self.visited[observed] = self.visited.get(observed, 0) + 1
        self.last_event_time = at
        self.event_log.append(TesterEvent(
            "transition", {"action_id": taken_action, "observed": observed}, at))
        if followed:
            self.cursor += 1
        else:
            self.event_log.append(TesterEvent(
                "deviation", {"expected": hint.action_id if hint else None,
                              "observed": observed}, at))
            self._replan()

    def on_idle(self, now: int) -> None:
        """Replan from the current state once the idle threshold elapses."""
        if now - self.last_event_time > self.idle_threshold_ms:
            self.event_log.append(TesterEvent("idle_tick", {"now": now}, now))
            self.last_event_time = now
            self._replan()

    def register_unknown_state(self, observed: StateNode, via_action: ActionEdge,
                               at: int | None = None) -> None:
        """Add a state the extracted graph missed, plus its inbound edge,
        then replan from it."""
        if observed.state_id in self.graph.state_map:
            raise ParameterError(f"state {observed.state_id!r} already exists")
        if via_action.target != observed.state_id or via_action.source != self.current:
            raise ParameterError("via_action must lead from the current state to the new state")
        at = self._at(at)
        edge = ActionEdge(via_action.action_id, via_action.source, via_action.target,
                          via_action.trigger, via_action.component_ref, provenance="manual")
        self.graph = StgGraph.build(
            list(self.graph.states) + [observed],
            list(self.graph.actions) + [edge],
            self.graph.start_state,
        )
        self.current = observed.state_id
        self.visited[observed.state_id] = self.visited.get(observed.state_id, 0) + 1
        self.last_event_time = at
        from .stg_core import _component_to_dict  # serialization for replay
        self.event_log.append(TesterEvent("unknown_state", {
            "state": {"state_id": observed.state_id, "activity": observed.activity,
                      "root": _component_to_dict(observed.root),
                      "visit_count": observed.visit_count},
            "edge": {"action_id": edge.action_id, "source": edge.source, "target": edge.target,
                     "trigger": edge.trigger, "component_ref": edge.component_ref,
                     "provenance": edge.provenance},
        }, at))
        self._replan()

    def _replan(self) -> None:
        self.plan = replan(self.graph, self.current, set(self.visited), self.n_exact)
        self.cursor = 0

    # --- introspection ----------------------------------------------------

    def metrics(self) -> dict:
        total = len(self.graph.states)
        activities = {s.activity for s in self.graph.states}
        visited_activities = {self.graph.state_map[sid].activity for sid in self.visited}
        steps = sum(1 for e in self.event_log if e.kind == "transition")
        return {
            "steps": steps,
            "states_visited": len(self.visited),
            "states_total": total,
            "activities_visited": len(visited_activities),
            "activities_total": len(activities),
            "coverage": len(self.visited) / total,
            "visit_counts": dict(sorted(self.visited.items())),
            "reached_full_coverage": len(self.visited) == total,
        }

    def snapshot(self) -> dict:
        """Full observable state, for replay equality checks."""
        return {
            "current": self.current,
            "cursor": self.cursor,
            "plan": {"node_order": list(self.plan.node_order),
                     "actions": list(self.plan.actions),
                     "total_cost": self.plan.total_cost,
                     "uncovered": list(self.plan.uncovered)},
            "metrics": self.metrics(),
            "event_log": [e.to_dict() for e in self.event_log],
        }


def start_session(g: StgGraph, start: str,
                  idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS,
                  n_exact: int = N_EXACT) -> Session:
    return Session(g, start, idle_threshold_ms, n_exact)


def replay_session(graph: StgGraph, start: str, event_log,
                   idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS,
                   n_exact: int = N_EXACT) -> Session:
    """Rebuild a session from its event log. Derived events (deviation) are
    regenerated by the replayed transitions; hint_served events replay as
    literal hint requests."""
    from .stg_core import _component_from_dict

    session = Session(graph, start, idle_threshold_ms, n_exact)
    for event in event_log:
        event = event if isinstance(event, TesterEvent) else TesterEvent(**event)
        if event.kind == "transition":
            session.report_transition(event.payload.get("action_id"),
                                      event.payload.get("observed"), at=event.timestamp)
        elif event.kind == "idle_tick":
            session.on_idle(event.payload["now"])
        elif event.kind == "hint_served":
            session.serve_hint(at=event.timestamp)
        elif event.kind == "unknown_state":
            raw = event.payload["state"]
            state = StateNode(raw["state_id"], raw["activity"],
                              _component_from_dict(raw["root"], "$.state.root"),
                              raw.get("visit_count", 0))
            session.register_unknown_state(state, ActionEdge(**event.payload["edge"]),
                                           at=event.timestamp)
        # deviation events are derived; skip them
    return session
