"""State transition graph data model, canonical signatures, validation and I/O.

The graph is a directed multigraph: nodes are unique UI states (component
hierarchy trees grouped under an activity) and edges are trigger actions.
All types are immutable values; transformations produce new graphs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property

from .errors import ParseError, VersionError

CAPTURE_VERSION = "1"

COMPONENT_KINDS = (
    "button",
    "nav_item",
    "fragment_tab",
    "back_control",
    "app_widget",
    "text_view",
    "image_view",
    "container",
)
TRIGGERS = ("click", "back", "long_press")
PROVENANCES = ("static", "dynamic", "manual")

#: component_ref used by back actions that have no on-screen button
TOUCH_BACK = "touch_back"


@dataclass(frozen=True)
class ComponentNode:
    local_id: str
    kind: str
    resource_id: str | None = None
    content: str | None = None
    children: tuple["ComponentNode", ...] = ()

    def walk(self):
        """Yield this node and all descendants in depth-first order."""
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class StateNode:
    state_id: str
    activity: str
    root: ComponentNode
    visit_count: int = 0

    def component(self, local_id: str) -> ComponentNode | None:
        for node in self.root.walk():
            if node.local_id == local_id:
                return node
        return None


@dataclass(frozen=True)
class ActionEdge:
    action_id: str
    source: str
    target: str
    trigger: str
    component_ref: str
    provenance: str = "manual"

    @property
    def identity(self) -> tuple[str, str, str, str]:
        """Edges sharing this 4-tuple are duplicates and collapse on insert."""
        return (self.source, self.component_ref, self.trigger, self.target)


@dataclass(frozen=True)
class StgGraph:
    states: tuple[StateNode, ...]
    actions: tuple[ActionEdge, ...]
    start_state: str

    @staticmethod
    def build(states, actions, start_state: str) -> "StgGraph":
        """Canonical constructor: sorts states/actions, collapses duplicate
        edges by identity keeping the smallest action_id."""
        by_identity: dict[tuple, ActionEdge] = {}
        for edge in actions:
            prev = by_identity.get(edge.identity)
            if prev is None or edge.action_id < prev.action_id:
                by_identity[edge.identity] = edge
        return StgGraph(
            states=tuple(sorted(states, key=lambda s: s.state_id)),
            actions=tuple(sorted(by_identity.values(), key=lambda e: (e.action_id, e.identity))),
            start_state=start_state,
        )

    @cached_property
    def state_map(self) -> dict[str, StateNode]:
        return {s.state_id: s for s in self.states}

    @cached_property
    def action_map(self) -> dict[str, ActionEdge]:
        return {a.action_id: a for a in self.actions}

    @cached_property
    def out_edges(self) -> dict[str, tuple[ActionEdge, ...]]:
        out: dict[str, list[ActionEdge]] = {s.state_id: [] for s in self.states}
        for edge in self.actions:
            out.setdefault(edge.source, []).append(edge)
        return {sid: tuple(sorted(edges, key=lambda e: e.action_id)) for sid, edges in out.items()}

    @cached_property
    def in_edges(self) -> dict[str, tuple[ActionEdge, ...]]:
        inc: dict[str, list[ActionEdge]] = {s.state_id: [] for s in self.states}
        for edge in self.actions:
            inc.setdefault(edge.target, []).append(edge)
        return {sid: tuple(sorted(edges, key=lambda e: e.action_id)) for sid, edges in inc.items()}

    def with_visit_counts(self, counts: dict[str, int]) -> "StgGraph":
        states = [replace(s, visit_count=counts.get(s.state_id, s.visit_count)) for s in self.states]
        return StgGraph.build(states, self.actions, self.start_state)


def hierarchy_signature(state: StateNode, strip_content: bool = True) -> str:
    """Canonical depth-first serialization of the component tree.

    Each node is emitted as [kind, resource_id, child_count, children...],
    plus the content field when strip_content is false. Equal trees yield
    byte-identical strings.
    """

    def encode(node: ComponentNode):
        item = [node.kind, node.resource_id, len(node.children)]
        if not strip_content:
            item.append(node.content)
        item.append([encode(c) for c in node.children])
        return item

    return json.dumps(encode(state.root), separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class Violation:
    invariant: str
    subject_id: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations


def validate(graph: StgGraph) -> ValidationReport:
    """Check every structural invariant; violations are data, not failures."""
    found: list[Violation] = []
    state_ids = [s.state_id for s in graph.states]
    seen: set[str] = set()
    for sid in state_ids:
        if sid in seen:
            found.append(Violation("duplicate_state_id", sid, f"state id {sid!r} occurs more than once"))
        seen.add(sid)

    if graph.start_state not in seen:
        found.append(Violation("missing_start_state", graph.start_state,
                               f"start state {graph.start_state!r} is not in the graph"))

    for state in graph.states:
        locals_seen: set[str] = set()
        for node in state.root.walk():
            if node.local_id in locals_seen:
                found.append(Violation("duplicate_local_id", state.state_id,
                                       f"component id {node.local_id!r} repeats in state {state.state_id!r}"))
            locals_seen.add(node.local_id)
            if node.kind != "container" and node.children:
                found.append(Violation("leaf_with_children", state.state_id,
                                       f"non-container {node.local_id!r} has children"))
        if state.visit_count < 0:
            found.append(Violation("negative_visit_count", state.state_id,
                                   f"visit_count {state.visit_count} is negative"))

    for edge in graph.actions:
        if edge.source not in seen:
            found.append(Violation("dangling_source", edge.source,
                                   f"action {edge.action_id!r} starts at missing state {edge.source!r}"))
        if edge.target not in seen:
            found.append(Violation("dangling_target", edge.target,
                                   f"action {edge.action_id!r} points at missing state {edge.target!r}"))
        if edge.trigger != "back" and edge.source in graph.state_map:
            if graph.state_map[edge.source].component(edge.component_ref) is None:
                found.append(Violation("unresolved_component_ref", edge.action_id,
                                       f"component {edge.component_ref!r} not in state {edge.source!r}"))
        if edge.trigger not in TRIGGERS:
            found.append(Violation("unknown_trigger", edge.action_id, f"trigger {edge.trigger!r}"))
        if edge.provenance not in PROVENANCES:
            found.append(Violation("unknown_provenance", edge.action_id, f"provenance {edge.provenance!r}"))

    found.sort(key=lambda v: (v.invariant, v.subject_id, v.message))
    return ValidationReport(tuple(found))


# --- capture format -------------------------------------------------------

def _expect_mapping(value, path: str, required: dict, optional: dict | None = None) -> dict:
    """Check a mapping against required/optional field sets; unknown fields
    are rejected with the offending path."""
    if not isinstance(value, dict):
        raise ParseError("expected an object", path)
    optional = optional or {}
    for key in value:
        if key not in required and key not in optional:
            raise ParseError(f"unknown field {key!r}", path)
    out = {}
    for key, check in required.items():
        if key not in value:
            raise ParseError(f"missing field {key!r}", path)
        out[key] = check(value[key], f"{path}.{key}")
    for key, check in optional.items():
        out[key] = check(value[key], f"{path}.{key}") if key in value and value[key] is not None else None
    return out


def _string(value, path):
    if not isinstance(value, str):
        raise ParseError("expected a string", path)
    return value


def _int(value, path):
    if not isinstance(value, int) or isinstance(value, bool):
        raise ParseError("expected an integer", path)
    return value


def _enum(allowed):
    def check(value, path):
        if value not in allowed:
            raise ParseError(f"expected one of {sorted(allowed)}, got {value!r}", path)
        return value
    return check


def _component_from_dict(value, path) -> ComponentNode:
    fields = _expect_mapping(
        value, path,
        required={"local_id": _string, "kind": _enum(COMPONENT_KINDS)},
        optional={"resource_id": _string, "content": _string,
                  "children": lambda v, p: v},
    )
    raw_children = fields["children"] or []
    if not isinstance(raw_children, list):
        raise ParseError("expected a list", f"{path}.children")
    children = tuple(
        _component_from_dict(c, f"{path}.children[{i}]") for i, c in enumerate(raw_children)
    )
    return ComponentNode(fields["local_id"], fields["kind"], fields["resource_id"],
                         fields["content"], children)


def _component_to_dict(node: ComponentNode) -> dict:
    return {
        "local_id": node.local_id,
        "kind": node.kind,
        "resource_id": node.resource_id,
        "content": node.content,
        "children": [_component_to_dict(c) for c in node.children],
    }


def graph_from_dict(doc, path: str = "$") -> StgGraph:
    fields = _expect_mapping(
        doc, path,
        required={
            "version": _string,
            "start_state": _string,
            "states": lambda v, p: v,
            "actions": lambda v, p: v,
        },
    )
    if fields["version"] != CAPTURE_VERSION:
        raise VersionError(f"unsupported capture version {fields['version']!r}")
    if not isinstance(fields["states"], list):
        raise ParseError("expected a list", f"{path}.states")
    if not isinstance(fields["actions"], list):
        raise ParseError("expected a list", f"{path}.actions")

    states = []
    for i, raw in enumerate(fields["states"]):
        spath = f"{path}.states[{i}]"
        sf = _expect_mapping(
            raw, spath,
            required={"state_id": _string, "activity": _string,
                      "root": _component_from_dict},
            optional={"visit_count": _int},
        )
        states.append(StateNode(sf["state_id"], sf["activity"], sf["root"], sf["visit_count"] or 0))

    actions = []
    for i, raw in enumerate(fields["actions"]):
        apath = f"{path}.actions[{i}]"
        af = _expect_mapping(
            raw, apath,
            required={"action_id": _string, "source": _string, "target": _string,
                      "trigger": _enum(TRIGGERS), "component_ref": _string,
                      "provenance": _enum(PROVENANCES)},
        )
        actions.append(ActionEdge(af["action_id"], af["source"], af["target"],
                                  af["trigger"], af["component_ref"], af["provenance"]))

    return StgGraph.build(states, actions, fields["start_state"])


def graph_to_dict(graph: StgGraph) -> dict:
    return {
        "version": CAPTURE_VERSION,
        "start_state": graph.start_state,
        "states": [
            {
                "state_id": s.state_id,
                "activity": s.activity,
                "root": _component_to_dict(s.root),
                "visit_count": s.visit_count,
            }
            for s in graph.states
        ],
        "actions": [
            {
                "action_id": a.action_id,
                "source": a.source,
                "target": a.target,
                "trigger": a.trigger,
                "component_ref": a.component_ref,
                "provenance": a.provenance,
            }
            for a in graph.actions
        ],
    }


def load_graph(data: bytes | str) -> StgGraph:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from exc
    return graph_from_dict(doc)


def save_graph(graph: StgGraph) -> bytes:
    return json.dumps(graph_to_dict(graph), indent=2, ensure_ascii=False).encode("utf-8")
