from __future__ import annotations

import random

import pytest

from stgnav.stg_core import ActionEdge, ComponentNode, StateNode, StgGraph


def leaf(local_id: str, kind: str = "button", resource_id: str | None = None,
         content: str | None = None) -> ComponentNode:
    return ComponentNode(local_id, kind, resource_id or local_id, content)


def simple_state(state_id: str, activity: str = "act", children=(), visit_count: int = 0,
                 root_resource: str | None = None) -> StateNode:
    root = ComponentNode("root", "container", root_resource or f"layout_{state_id}",
                         children=tuple(children))
    return StateNode(state_id, activity, root, visit_count)


def back_edge(aid: str, source: str, target: str) -> ActionEdge:
    return ActionEdge(aid, source, target, "back", "touch_back")


@pytest.fixture
def line_graph() -> StgGraph:
    """A -> B -> C via clicks."""
    states = [
        simple_state("A", children=[leaf("go_B")]),
        simple_state("B", children=[leaf("go_C")]),
        simple_state("C"),
    ]
    actions = [
        ActionEdge("ab", "A", "B", "click", "go_B"),
        ActionEdge("bc", "B", "C", "click", "go_C"),
    ]
    return StgGraph.build(states, actions, "A")


@pytest.fixture
def star_graph() -> StgGraph:
    """Hub H with bidirectional unit edges to three leaves."""
    states = [simple_state("H", children=[leaf(f"go_L{i}") for i in (1, 2, 3)])]
    actions = []
    for i in (1, 2, 3):
        states.append(simple_state(f"L{i}"))
        actions.append(ActionEdge(f"h{i}", "H", f"L{i}", "click", f"go_L{i}"))
        actions.append(back_edge(f"b{i}", f"L{i}", "H"))
    return StgGraph.build(states, actions, "H")


def random_strongly_connected_graph(rng: random.Random, n: int, extra: int | None = None,
                                    activity: str = "act") -> StgGraph:
    """Cycle through all states plus random extra edges; unit costs."""
    states = [simple_state(f"s{i:02d}", activity=activity) for i in range(n)]
    edges = {(f"s{i:02d}", f"s{(i + 1) % n:02d}") for i in range(n)}
    for _ in range(extra if extra is not None else n):
        a, b = rng.randrange(n), rng.randrange(n)
        if a != b:
            edges.add((f"s{a:02d}", f"s{b:02d}"))
    actions = [back_edge(f"a{i:03d}", s, t) for i, (s, t) in enumerate(sorted(edges))]
    return StgGraph.build(states, actions, "s00")


def random_digraph(rng: random.Random, n: int, p: float = 0.3) -> StgGraph:
    """Arbitrary random digraph; may be disconnected."""
    states = [simple_state(f"s{i:02d}") for i in range(n)]
    actions = []
    k = 0
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < p:
                actions.append(back_edge(f"a{k:03d}", f"s{i:02d}", f"s{j:02d}"))
                k += 1
    return StgGraph.build(states, actions, "s00")


def bfs_distances(g: StgGraph, source: str) -> dict[str, int]:
    """Independent unit-weight shortest-path oracle."""
    from collections import deque

    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for edge in g.out_edges.get(u, ()):
            if edge.target not in dist:
                dist[edge.target] = dist[u] + 1
                queue.append(edge.target)
    return dist
