"""Coverage path planning over the state transition graph.

All-pairs shortest paths (unit edge cost) feed a bitmask DP that finds the
cheapest open walk from a start state through every reachable target;
revisits are free because distances come from the metric closure. Above the
exact-size bound, a clustered greedy/2-opt fallback takes over.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CapacityError, InternalConsistencyError, ParameterError
from .stg_core import StgGraph

INF = math.inf

#: largest number of targets handled by the exact DP
N_EXACT = 16


@dataclass(frozen=True)
class DistanceMatrix:
    dist: tuple[tuple[float, ...], ...]
    ids: tuple[str, ...]

    @property
    def index(self) -> dict[str, int]:
        return {sid: i for i, sid in enumerate(self.ids)}


@dataclass(frozen=True)
class PredecessorMatrix:
    next_hop: tuple[tuple[int | None, ...], ...]
    ids: tuple[str, ...]


@dataclass(frozen=True)
class Plan:
    node_order: tuple[str, ...]
    actions: tuple[str, ...]
    total_cost: int
    uncovered: tuple[str, ...]


def metric_closure(g: StgGraph) -> tuple[DistanceMatrix, PredecessorMatrix]:
    """Floyd-Warshall over unit-cost edges with next-hop reconstruction.
    Intermediate nodes are tried in ascending index order and kept only on
    strict improvement, so tie-breaks are deterministic."""
    ids = tuple(s.state_id for s in g.states)
    index = {sid: i for i, sid in enumerate(ids)}
    n = len(ids)
    dist = [[INF] * n for _ in range(n)]
    nxt: list[list[int | None]] = [[None] * n for _ in range(n)]
    for i in range(n):
        dist[i][i] = 0.0
        nxt[i][i] = i
    for edge in g.actions:
        i, j = index[edge.source], index[edge.target]
        if 1.0 < dist[i][j]:
            dist[i][j] = 1.0
            nxt[i][j] = j
    for k in range(n):
        dk = dist[k]
        for i in range(n):
            dik = dist[i][k]
            if dik == INF:
                continue
            di = dist[i]
            for j in range(n):
                alt = dik + dk[j]
                if alt < di[j]:
                    di[j] = alt
                    nxt[i][j] = nxt[i][k]
    dmat = DistanceMatrix(tuple(tuple(row) for row in dist), ids)
    pmat = PredecessorMatrix(tuple(tuple(row) for row in nxt), ids)
    return dmat, pmat


def _dp_visit_order(dist, start_idx: int, targets: list[int]):
    """Held-Karp over closure distances: DP[mask][j] is the cheapest walk
    from start visiting exactly the targets in mask and ending at target j.
    Returns (cost, visit order, covered targets); when the full mask is
    infeasible, the finite mask covering the most targets wins."""
    m = len(targets)
    if m == 0:
        return 0.0, [], []
    size = 1 << m
    dp = [[INF] * m for _ in range(size)]
    parent = [[-1] * m for _ in range(size)]
    for j, t in enumerate(targets):
        dp[1 << j][j] = dist[start_idx][t]
    for mask in range(size):
        row = dp[mask]
        for j in range(m):
            cur = row[j]
            if cur == INF or not (mask >> j) & 1:
                continue
            dj = dist[targets[j]]
            for j2 in range(m):
                if (mask >> j2) & 1:
                    continue
                alt = cur + dj[targets[j2]]
                nm = mask | (1 << j2)
                if alt < dp[nm][j2]:
                    dp[nm][j2] = alt
                    parent[nm][j2] = j

    best = None
    for mask in range(size):
        row = dp[mask]
        for j in range(m):
            if row[j] < INF:
                key = (-mask.bit_count(), row[j], mask, j)
                if best is None or key < best:
                    best = key
    if best is None:
        return 0.0, [], []
    _, cost, mask, j = best
    covered = [targets[k] for k in range(m) if (mask >> k) & 1]
    order = []
    while j != -1:
        order.append(targets[j])
        j, mask = parent[mask][j], mask ^ (1 << j)
    order.reverse()
    return cost, order, covered


def expand_plan(plan_nodes, pred: PredecessorMatrix, g: StgGraph) -> tuple[str, ...]:
    """Expand a closure-level node order into concrete action ids; each hop
    picks the smallest action_id among parallel edges."""
    index = {sid: i for i, sid in enumerate(pred.ids)}
    best_edge: dict[tuple[str, str], str] = {}
    for edge in g.actions:
        key = (edge.source, edge.target)
        if key not in best_edge or edge.action_id < best_edge[key]:
            best_edge[key] = edge.action_id

    actions: list[str] = []
    for u, v in zip(plan_nodes, plan_nodes[1:]):
        i, j = index[u], index[v]
        while i != j:
            k = pred.next_hop[i][j]
            if k is None:
                raise InternalConsistencyError(f"no path from {pred.ids[i]!r} to {pred.ids[j]!r}")
            aid = best_edge.get((pred.ids[i], pred.ids[k]))
            if aid is None:
                raise InternalConsistencyError(
                    f"next-hop edge {pred.ids[i]!r}->{pred.ids[k]!r} missing from graph")
            actions.append(aid)
            i = k
    return tuple(actions)


def _split_targets(dmat: DistanceMatrix, start: str, targets) -> tuple[list[str], list[str]]:
    index = dmat.index
    start_i = index[start]
    reachable, unreachable = [], []
    for t in sorted(set(targets) - {start}, key=lambda s: index[s]):
        (reachable if dmat.dist[start_i][index[t]] < INF else unreachable).append(t)
    return reachable, unreachable


def _finish_plan(g, start, order_ids, covered_ids, targets, unreachable, pred) -> Plan:
    node_order = [start]
    for sid in order_ids:
        if sid != node_order[-1]:
            node_order.append(sid)
    actions = expand_plan(node_order, pred, g)
    uncovered = sorted(set(targets) - {start} - set(covered_ids))
    return Plan(tuple(node_order), actions, len(actions), tuple(uncovered))


def plan_coverage_path(g: StgGraph, start: str, targets, n_exact: int = N_EXACT,
                       closure: tuple[DistanceMatrix, PredecessorMatrix] | None = None) -> Plan:
    """Optimal coverage walk via exact DP; raises CapacityError above
    n_exact reachable targets (use plan_scalable instead)."""
    if start not in g.state_map:
        raise ParameterError(f"unknown start state {start!r}")
    dmat, pmat = closure or metric_closure(g)
    reachable, unreachable = _split_targets(dmat, start, targets)
    if len(reachable) > n_exact:
        raise CapacityError(
            f"{len(reachable)} reachable targets exceed the exact bound {n_exact}; "
            "use plan_scalable")
    index = dmat.index
    cost, order_idx, covered_idx = _dp_visit_order(dmat.dist, index[start],
                                                   [index[t] for t in reachable])
    order_ids = [dmat.ids[i] for i in order_idx]
    covered_ids = [dmat.ids[i] for i in covered_idx]
    plan = _finish_plan(g, start, order_ids, covered_ids, targets, unreachable, pmat)
    assert plan.total_cost == int(cost), "expanded actions disagree with DP cost"
    return plan


def _path_cost(dist, start_idx: int, order: list[int]) -> float:
    cost, pos = 0.0, start_idx
    for t in order:
        cost += dist[pos][t]
        pos = t
    return cost


def _nearest_neighbor(dist, start_idx: int, targets: list[int]) -> list[int]:
    remaining = list(targets)
    order, pos = [], start_idx
    while remaining:
        best = min(remaining, key=lambda t: (dist[pos][t], t))
        if dist[pos][best] == INF:
            break
        order.append(best)
        remaining.remove(best)
        pos = best
    return order


def _two_opt(dist, start_idx: int, order: list[int]) -> list[int]:
    order = list(order)
    improved = True
    while improved:
        improved = False
        base = _path_cost(dist, start_idx, order)
        for i in range(len(order) - 1):
            for k in range(i + 1, len(order)):
                candidate = order[:i] + order[i:k + 1][::-1] + order[k + 1:]
                if _path_cost(dist, start_idx, candidate) < base:
                    order = candidate
                    improved = True
                    break
            if improved:
                break
    return order


def plan_scalable(g: StgGraph, start: str, targets, n_exact: int = N_EXACT,
                  closure: tuple[DistanceMatrix, PredecessorMatrix] | None = None) -> Plan:
    """Heuristic planner for large target sets: targets are clustered by
    activity, clusters visited nearest-first, exact DP inside small clusters
    and NN+2-opt inside large ones. A plain global NN+2-opt order is also
    computed and the cheaper of the two is returned, so the result never
    costs more than nearest-neighbor over all targets."""
    if start not in g.state_map:
        raise ParameterError(f"unknown start state {start!r}")
    dmat, pmat = closure or metric_closure(g)
    reachable, unreachable = _split_targets(dmat, start, targets)
    if len(reachable) <= n_exact:
        return plan_coverage_path(g, start, targets, n_exact, (dmat, pmat))

    index = dmat.index
    dist = dmat.dist
    start_i = index[start]

    # candidate A: visit activity clusters nearest-first
    clusters: dict[str, list[int]] = {}
    for t in reachable:
        clusters.setdefault(g.state_map[t].activity, []).append(index[t])
    pending = {act: sorted(ts) for act, ts in clusters.items()}
    pos = start_i
    order_a: list[int] = []
    while pending:
        act = min(pending, key=lambda a: (min(dist[pos][t] for t in pending[a]), a))
        members = pending.pop(act)
        if min(dist[pos][t] for t in members) == INF:
            break
        if len(members) <= n_exact:
            _, sub_order, covered = _dp_visit_order(dist, pos, members)
            leftover = [t for t in members if t not in covered]
        else:
            sub_order = _two_opt(dist, pos, _nearest_neighbor(dist, pos, members))
            leftover = [t for t in members if t not in sub_order]
        order_a.extend(sub_order)
        if leftover:
            pending[act + "~rest"] = leftover
        if sub_order:
            pos = sub_order[-1]

    # candidate B: flat nearest-neighbor with 2-opt
    order_b = _two_opt(dist, start_i, _nearest_neighbor(dist, start_i, [index[t] for t in reachable]))

    key_a = (-len(order_a), _path_cost(dist, start_i, order_a))
    key_b = (-len(order_b), _path_cost(dist, start_i, order_b))
    order = order_a if key_a <= key_b else order_b

    order_ids = [dmat.ids[i] for i in order]
    return _finish_plan(g, start, order_ids, order_ids, targets, unreachable, pmat)


def replan(g: StgGraph, current: str, visited, n_exact: int = N_EXACT,
           closure: tuple[DistanceMatrix, PredecessorMatrix] | None = None) -> Plan:
    """Plan over all not-yet-visited states from the current position;
    routes to the scalable planner above the exact bound."""
    if current not in g.state_map:
        raise ParameterError(f"unknown current state {current!r}")
    targets = {s.state_id for s in g.states} - set(visited)
    dmat, pmat = closure or metric_closure(g)
    reachable, unreachable = _split_targets(dmat, current, targets)
    if not reachable:
        return Plan((current,), (), 0, tuple(sorted(unreachable)))
    if len(reachable) <= n_exact:
        return plan_coverage_path(g, current, targets, n_exact, (dmat, pmat))
    return plan_scalable(g, current, targets, n_exact, (dmat, pmat))
