"""Near-duplicate state collapsing.

Two passes: exact-signature merging (same tree shape, content ignored) and
context-aware merging (similar trees whose predecessors and successors are
also similar). States in different activities never merge.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, replace

from .errors import ParameterError
from .stg_core import StateNode, StgGraph, hierarchy_signature

DEFAULT_TAU = 0.9


@dataclass(frozen=True)
class MergeReport:
    clusters: tuple[tuple[str, tuple[str, ...]], ...]
    merge_pass: str
    similarity_threshold: float


def _apply_mapping(g: StgGraph, mapping: dict[str, str]) -> StgGraph:
    """Re-point every state/edge through mapping (old id -> representative).
    Representatives keep their own component tree; visit counts sum."""
    counts: dict[str, int] = {}
    for state in g.states:
        rep = mapping.get(state.state_id, state.state_id)
        counts[rep] = counts.get(rep, 0) + state.visit_count
    states = [
        replace(s, visit_count=counts[s.state_id])
        for s in g.states
        if mapping.get(s.state_id, s.state_id) == s.state_id
    ]
    actions = [
        replace(a, source=mapping.get(a.source, a.source), target=mapping.get(a.target, a.target))
        for a in g.actions
    ]
    start = mapping.get(g.start_state, g.start_state)
    return StgGraph.build(states, actions, start)


def signature_merge(g: StgGraph) -> tuple[StgGraph, MergeReport]:
    """Merge states with equal content-stripped hierarchy signatures, within
    one activity; representative is the lexicographically smallest id."""
    groups: dict[tuple[str, str], list[str]] = {}
    for state in g.states:
        key = (state.activity, hierarchy_signature(state, strip_content=True))
        groups.setdefault(key, []).append(state.state_id)

    mapping: dict[str, str] = {}
    clusters = []
    for members in groups.values():
        if len(members) < 2:
            continue
        members = sorted(members)
        rep = members[0]
        for other in members[1:]:
            mapping[other] = rep
        clusters.append((rep, tuple(members[1:])))

    report = MergeReport(tuple(sorted(clusters)), "signature", 1.0)
    return _apply_mapping(g, mapping), report


def _profile(state: StateNode) -> Counter:
    return Counter((node.kind, node.resource_id) for node in state.root.walk())


def similarity(s1: StateNode, s2: StateNode) -> float:
    """Multiset Jaccard index over (kind, resource_id) pairs of all tree nodes."""
    p1, p2 = _profile(s1), _profile(s2)
    inter = sum((p1 & p2).values())
    union = sum((p1 | p2).values())
    return 1.0 if union == 0 else inter / union


def _eligible(g: StgGraph, s1: StateNode, s2: StateNode, tau: float) -> bool:
    if s1.activity != s2.activity:
        return False
    if similarity(s1, s2) < tau:
        return False

    def neighbor_match(ids1, ids2) -> bool:
        for a in ids1:
            for b in ids2:
                if similarity(g.state_map[a], g.state_map[b]) >= tau:
                    return True
        return False

    preds1 = {e.source for e in g.in_edges.get(s1.state_id, ())}
    preds2 = {e.source for e in g.in_edges.get(s2.state_id, ())}
    # the start state has no predecessor; it participates via successors only
    if not (s1.state_id == g.start_state or s2.state_id == g.start_state):
        if not neighbor_match(sorted(preds1), sorted(preds2)):
            return False

    succs1 = {e.target for e in g.out_edges.get(s1.state_id, ())}
    succs2 = {e.target for e in g.out_edges.get(s2.state_id, ())}
    return neighbor_match(sorted(succs1), sorted(succs2))


def context_merge(g: StgGraph, tau: float = DEFAULT_TAU) -> tuple[StgGraph, MergeReport]:
    """Merge similar states whose context (some predecessor pair and some
    successor pair) is also similar; iterates to a fixpoint in deterministic
    pair order."""
    if not 0.0 < tau <= 1.0:
        raise ParameterError("tau must be in (0, 1]")

    merged_into: dict[str, list[str]] = {}
    current = g
    while True:
        ids = [s.state_id for s in current.states]
        found = None
        for i, a in enumerate(ids):
            for b in ids[i + 1:]:
                if _eligible(current, current.state_map[a], current.state_map[b], tau):
                    found = (a, b)
                    break
            if found:
                break
        if found is None:
            break
        rep, other = found
        merged_into.setdefault(rep, []).append(other)
        merged_into[rep].extend(merged_into.pop(other, []))
        current = _apply_mapping(current, {other: rep})

    clusters = tuple(sorted((rep, tuple(sorted(members))) for rep, members in merged_into.items()))
    return current, MergeReport(clusters, "context", tau)
