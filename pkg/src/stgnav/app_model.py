"""Declarative synthetic apps and the two extraction passes.

An AppModel carries a hidden ground-truth graph. `static_extract` sees only
the activity declarations (the manifest analogue); `dynamic_explore` random-
walks the true graph and records what it observes, sampling content variants
so near-duplicate states show up exactly as a crawler would see them.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace

from .errors import ConflictError, ParameterError, ParseError, VersionError
from .stg_core import (
    CAPTURE_VERSION,
    TOUCH_BACK,
    ActionEdge,
    ComponentNode,
    StateNode,
    StgGraph,
    graph_from_dict,
    graph_to_dict,
)

#: separator between a base state id and its content-variant suffix
VARIANT_SEP = "::v"


@dataclass(frozen=True)
class ActivityDecl:
    name: str
    declared_targets: tuple[str, ...]
    states: tuple[str, ...]

    @property
    def entry_state(self) -> str:
        return self.states[0]


@dataclass(frozen=True)
class AppModel:
    activities: tuple[ActivityDecl, ...]
    launch_activity: str
    true_graph: StgGraph
    content_variants: dict[str, tuple[dict[str, str], ...]]

    def activity(self, name: str) -> ActivityDecl:
        return next(a for a in self.activities if a.name == name)

    @property
    def launch_state(self) -> str:
        return self.activity(self.launch_activity).entry_state


@dataclass(frozen=True)
class ExplorationTrace:
    steps: tuple[tuple[str, str | None, str], ...]
    seed: int
    budget: int


def base_state_id(state_id: str) -> str:
    """Strip a content-variant suffix, if any."""
    return state_id.split(VARIANT_SEP, 1)[0]


def generate_random_app(n_activities: int, states_per_activity: int, branching: int,
                        duplicate_rate: float, seed: int) -> AppModel:
    """Build a strongly connected synthetic app, deterministic per seed.

    Topology per activity: an entry state followed by a click chain, extra
    click edges per `branching`, and a back edge from every non-entry state
    to the entry. Activities form a chain of declared targets (plus random
    extras) realized as nav buttons on entry states; non-launch entries carry
    a back edge to the previous activity's entry, which makes the whole graph
    strongly connected.
    """
    if n_activities < 1 or states_per_activity < 1 or branching < 1:
        raise ParameterError("n_activities, states_per_activity and branching must be >= 1")
    if not 0.0 <= duplicate_rate <= 1.0:
        raise ParameterError("duplicate_rate must be in [0, 1]")

    rng = random.Random(seed)
    act_names = [f"act{i:02d}" for i in range(n_activities)]
    owned = {
        name: [f"s{i:02d}_{j:02d}" for j in range(states_per_activity)]
        for i, name in enumerate(act_names)
    }

    declared: dict[str, list[str]] = {name: [] for name in act_names}
    for i, name in enumerate(act_names):
        if i + 1 < n_activities:
            declared[name].append(act_names[i + 1])
        extras = rng.sample([a for a in act_names if a != name], k=min(branching - 1, n_activities - 1))
        for extra in extras:
            if extra not in declared[name]:
                declared[name].append(extra)

    # edge topology as (source, component_ref, trigger, target)
    edges: set[tuple[str, str, str, str]] = set()
    for i, name in enumerate(act_names):
        sids = owned[name]
        entry = sids[0]
        for j in range(len(sids) - 1):
            edges.add((sids[j], f"go_{sids[j + 1]}", "click", sids[j + 1]))
        for sid in sids[1:]:
            edges.add((sid, TOUCH_BACK, "back", entry))
        for _ in range(branching):
            src, tgt = rng.choice(sids), rng.choice(sids)
            if src != tgt:
                edges.add((src, f"go_{tgt}", "click", tgt))
        for target_act in declared[name]:
            edges.add((entry, f"nav_{target_act}", "click", owned[target_act][0]))
        if i > 0:
            edges.add((entry, TOUCH_BACK, "back", owned[act_names[i - 1]][0]))

    out_refs: dict[str, list[tuple[str, str]]] = {}
    for src, ref, trigger, _tgt in edges:
        if trigger != "back":
            out_refs.setdefault(src, []).append((ref, trigger))

    states = []
    for name in act_names:
        for sid in owned[name]:
            children = [ComponentNode("title", "text_view", resource_id="title",
                                      content=f"Screen {sid}")]
            for ref, trigger in sorted(set(out_refs.get(sid, []))):
                kind = "nav_item" if ref.startswith("nav_") else "button"
                children.append(ComponentNode(ref, kind, resource_id=ref, content=ref))
            root = ComponentNode("root", "container", resource_id=f"layout_{sid}",
                                 children=tuple(children))
            states.append(StateNode(sid, name, root))

    actions = [
        ActionEdge(f"a_{src}__{ref}__{tgt}", src, tgt, trigger, ref, provenance="manual")
        for src, ref, trigger, tgt in sorted(edges)
    ]
    start = owned[act_names[0]][0]
    true_graph = StgGraph.build(states, actions, start)

    variants: dict[str, tuple[dict[str, str], ...]] = {}
    for state in true_graph.states:
        if rng.random() < duplicate_rate:
            n_variants = rng.randint(1, 2)
            variants[state.state_id] = tuple(
                {"title": f"Screen {state.state_id} (variant {v + 1})"}
                for v in range(n_variants)
            )

    return AppModel(
        activities=tuple(
            ActivityDecl(name, tuple(declared[name]), tuple(owned[name])) for name in act_names
        ),
        launch_activity=act_names[0],
        true_graph=true_graph,
        content_variants=variants,
    )


def static_extract(app: AppModel) -> StgGraph:
    """Activity-level skeleton from the declarations alone: one edge from
    A's entry to B's entry per declared target, no intra-activity states."""
    entry = {a.name: a.entry_state for a in app.activities}
    states = [
        app.true_graph.state_map[entry[a.name]]
        for a in app.activities
    ]
    states = [replace(s, visit_count=0) for s in states]
    actions = []
    for act in app.activities:
        for target in act.declared_targets:
            actions.append(ActionEdge(
                f"st_{act.name}__{target}", entry[act.name], entry[target],
                trigger="click", component_ref=f"nav_{target}", provenance="static",
            ))
    return StgGraph.build(states, actions, entry[app.launch_activity])


def _apply_variant(root: ComponentNode, overrides: dict[str, str]) -> ComponentNode:
    children = tuple(_apply_variant(c, overrides) for c in root.children)
    content = overrides.get(root.local_id, root.content)
    return replace(root, content=content, children=children)


def dynamic_explore(app: AppModel, budget: int, seed: int) -> tuple[StgGraph, ExplorationTrace]:
    """Seeded uniform random walk over the true graph from the launch state.

    Each visit samples a content variant for the state; a non-base variant is
    recorded as its own state (id suffixed with ::vK) so near-duplicates are
    present in the output. Dead ends restart from the launch state, counted
    as one step.
    """
    if budget < 1:
        raise ParameterError("budget must be >= 1")

    rng = random.Random(seed)
    true = app.true_graph
    recorded: dict[str, StateNode] = {}
    visits: dict[str, int] = {}
    rec_edges: dict[tuple, ActionEdge] = {}
    steps: list[tuple[str, str | None, str]] = []

    def observe(base_id: str) -> str:
        variants = app.content_variants.get(base_id, ())
        v = rng.randint(0, len(variants))
        rec_id = base_id if v == 0 else f"{base_id}{VARIANT_SEP}{v}"
        if rec_id not in recorded:
            base = true.state_map[base_id]
            root = base.root if v == 0 else _apply_variant(base.root, variants[v - 1])
            recorded[rec_id] = StateNode(rec_id, base.activity, root)
        visits[rec_id] = visits.get(rec_id, 0) + 1
        return rec_id

    launch = app.launch_state
    current_base = launch
    current_rec = observe(launch)
    start_rec = current_rec

    for _ in range(budget):
        out = true.out_edges.get(current_base, ())
        if not out:
            prev_rec = current_rec
            current_base = launch
            current_rec = observe(launch)
            steps.append((prev_rec, None, current_rec))
            continue
        edge = out[rng.randrange(len(out))]
        next_rec = observe(edge.target)
        if current_rec == edge.source and next_rec == edge.target:
            aid = edge.action_id
        else:
            aid = f"{edge.action_id}@{current_rec}>{next_rec}"
        rec = ActionEdge(aid, current_rec, next_rec, edge.trigger, edge.component_ref,
                         provenance="dynamic")
        rec_edges.setdefault(rec.identity, rec)
        steps.append((current_rec, rec_edges[rec.identity].action_id, next_rec))
        current_base, current_rec = edge.target, next_rec

    states = [replace(s, visit_count=visits[s.state_id]) for s in recorded.values()]
    graph = StgGraph.build(states, rec_edges.values(), start_rec)
    return graph, ExplorationTrace(tuple(steps), seed=seed, budget=budget)


def combine(static_g: StgGraph, dynamic_g: StgGraph) -> StgGraph:
    """Union of states and actions; duplicate edges collapse by identity;
    start state comes from the dynamic pass."""
    merged: dict[str, StateNode] = {s.state_id: s for s in static_g.states}
    conflicts = []
    for state in dynamic_g.states:
        prev = merged.get(state.state_id)
        if prev is None:
            merged[state.state_id] = state
        elif (prev.activity, prev.root) != (state.activity, state.root):
            conflicts.append(state.state_id)
        else:
            merged[state.state_id] = replace(prev, visit_count=max(prev.visit_count, state.visit_count))
    if conflicts:
        raise ConflictError(conflicts)
    return StgGraph.build(merged.values(), static_g.actions + dynamic_g.actions,
                          dynamic_g.start_state)


# --- fixture format -------------------------------------------------------

def app_to_dict(app: AppModel) -> dict:
    return {
        "version": CAPTURE_VERSION,
        "launch_activity": app.launch_activity,
        "activities": [
            {"name": a.name, "declared_targets": list(a.declared_targets), "states": list(a.states)}
            for a in app.activities
        ],
        "true_graph": graph_to_dict(app.true_graph),
        "content_variants": {
            sid: [dict(v) for v in variants] for sid, variants in sorted(app.content_variants.items())
        },
    }


def app_from_dict(doc) -> AppModel:
    if not isinstance(doc, dict):
        raise ParseError("expected an object")
    known = {"version", "launch_activity", "activities", "true_graph", "content_variants"}
    for key in doc:
        if key not in known:
            raise ParseError(f"unknown field {key!r}", "$")
    for key in known:
        if key not in doc:
            raise ParseError(f"missing field {key!r}", "$")
    if doc["version"] != CAPTURE_VERSION:
        raise VersionError(f"unsupported fixture version {doc['version']!r}")
    activities = tuple(
        ActivityDecl(a["name"], tuple(a["declared_targets"]), tuple(a["states"]))
        for a in doc["activities"]
    )
    return AppModel(
        activities=activities,
        launch_activity=doc["launch_activity"],
        true_graph=graph_from_dict(doc["true_graph"], "$.true_graph"),
        content_variants={
            sid: tuple(dict(v) for v in variants)
            for sid, variants in doc["content_variants"].items()
        },
    )


def load_app(data: bytes | str) -> AppModel:
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", f"line {exc.lineno}") from exc
    return app_from_dict(doc)


def save_app(app: AppModel) -> bytes:
    return json.dumps(app_to_dict(app), indent=2, ensure_ascii=False).encode("utf-8")
