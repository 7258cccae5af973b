"""Closed-loop evaluation: tester behavior models driving guidance sessions
on synthetic apps, coverage/step metrics, and the brute-force planning oracle.
"""

from __future__ import annotations

import random
import statistics
from dataclasses import dataclass
from itertools import permutations

from .app_model import AppModel
from .errors import CapacityError, ParameterError
from .guidance import Session
from .merging import signature_merge
from .planner import INF, metric_closure
from .stg_core import StgGraph

ORACLE_MAX_STATES = 9


@dataclass(frozen=True)
class TesterModel:
    kind: str  # guided | random | greedy_nearest | dfs
    compliance: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("guided", "random", "greedy_nearest", "dfs"):
            raise ParameterError(f"unknown tester kind {self.kind!r}")
        if not 0.0 <= self.compliance <= 1.0:
            raise ParameterError("compliance must be in [0, 1]")

    @property
    def label(self) -> str:
        return f"guided:{self.compliance}" if self.kind == "guided" else self.kind


@dataclass(frozen=True)
class SimMetrics:
    steps_taken: int
    states_visited: int
    states_total: int
    activities_visited: int
    activities_total: int
    repeated_visits: int
    coverage_curve: tuple[tuple[int, float], ...]
    reached_full_coverage: bool
    steps_to_full_coverage: int | None

    def to_dict(self) -> dict:
        return {
            "steps_taken": self.steps_taken,
            "states_visited": self.states_visited,
            "states_total": self.states_total,
            "activities_visited": self.activities_visited,
            "activities_total": self.activities_total,
            "repeated_visits": self.repeated_visits,
            "coverage_curve": [list(p) for p in self.coverage_curve],
            "reached_full_coverage": self.reached_full_coverage,
            "steps_to_full_coverage": self.steps_to_full_coverage,
        }


class _Tracker:
    def __init__(self, graph: StgGraph, start: str):
        self.graph = graph
        self.total = len(graph.states)
        self.visits = {start: 1}
        self.steps = 0
        self.curve = [(0, 1 / self.total)]
        self.steps_to_full = 0 if self.total == 1 else None

    def move(self, state_id: str) -> None:
        self.steps += 1
        self.visits[state_id] = self.visits.get(state_id, 0) + 1
        coverage = len(self.visits) / self.total
        if coverage > self.curve[-1][1]:
            self.curve.append((self.steps, coverage))
        if self.steps_to_full is None and len(self.visits) == self.total:
            self.steps_to_full = self.steps

    @property
    def full(self) -> bool:
        return len(self.visits) == self.total

    def metrics(self) -> SimMetrics:
        activities = {s.activity for s in self.graph.states}
        seen = {self.graph.state_map[sid].activity for sid in self.visits}
        return SimMetrics(
            steps_taken=self.steps,
            states_visited=len(self.visits),
            states_total=self.total,
            activities_visited=len(seen),
            activities_total=len(activities),
            repeated_visits=sum(self.visits.values()) - len(self.visits),
            coverage_curve=tuple(self.curve),
            reached_full_coverage=self.full,
            steps_to_full_coverage=self.steps_to_full,
        )


def _run_guided(graph: StgGraph, tester: TesterModel, budget: int, rng: random.Random) -> SimMetrics:
    session = Session(graph, graph.start_state)
    tracker = _Tracker(graph, graph.start_state)
    while not tracker.full and tracker.steps < budget:
        hint = session.current_hint()
        out = graph.out_edges.get(session.current, ())
        if hint is not None and (tester.compliance >= 1.0 or rng.random() < tester.compliance):
            edge_id = hint.action_id
        elif out:
            edge_id = out[rng.randrange(len(out))].action_id
        else:
            break
        session.report_transition(taken_action=edge_id)
        tracker.move(session.current)
    return tracker.metrics()


def _run_random(graph: StgGraph, budget: int, rng: random.Random) -> SimMetrics:
    tracker = _Tracker(graph, graph.start_state)
    current = graph.start_state
    while not tracker.full and tracker.steps < budget:
        out = graph.out_edges.get(current, ())
        if not out:
            current = graph.start_state
            tracker.move(current)
            continue
        current = out[rng.randrange(len(out))].target
        tracker.move(current)
    return tracker.metrics()


def _run_greedy(graph: StgGraph, budget: int) -> SimMetrics:
    dmat, pmat = metric_closure(graph)
    index = dmat.index
    tracker = _Tracker(graph, graph.start_state)
    current = graph.start_state
    while not tracker.full and tracker.steps < budget:
        i = index[current]
        unvisited = [index[s.state_id] for s in graph.states if s.state_id not in tracker.visits]
        target = min(unvisited, key=lambda t: (dmat.dist[i][t], t))
        if dmat.dist[i][target] == INF:
            break
        nxt = pmat.next_hop[i][target]
        current = dmat.ids[nxt]
        tracker.move(current)
    return tracker.metrics()


def _run_dfs(graph: StgGraph, budget: int) -> SimMetrics:
    dmat, pmat = metric_closure(graph)
    index = dmat.index
    tracker = _Tracker(graph, graph.start_state)
    current = graph.start_state
    stack: list[str] = []
    while not tracker.full and tracker.steps < budget:
        fresh = next((e for e in graph.out_edges.get(current, ())
                      if e.target not in tracker.visits), None)
        if fresh is not None:
            stack.append(current)
            current = fresh.target
            tracker.move(current)
            continue
        while stack and stack[-1] == current:
            stack.pop()
        if stack:
            target = stack[-1]
        else:
            unvisited = [s.state_id for s in graph.states if s.state_id not in tracker.visits]
            if not unvisited:
                break
            target = min(unvisited, key=lambda s: (dmat.dist[index[current]][index[s]], s))
        i, j = index[current], index[target]
        if dmat.dist[i][j] == INF:
            break
        back = next((e for e in graph.out_edges.get(current, ())
                     if e.trigger == "back" and e.target == target), None)
        current = back.target if back else dmat.ids[pmat.next_hop[i][j]]
        if stack and current == stack[-1]:
            stack.pop()
        tracker.move(current)
    return tracker.metrics()


def run_simulation(app: AppModel, tester: TesterModel, budget: int, seed: int) -> SimMetrics:
    """Drive one tester model over the app's merged true graph."""
    if budget < 1:
        raise ParameterError("budget must be >= 1")
    graph, _ = signature_merge(app.true_graph)
    rng = random.Random(f"{seed}:{tester.seed}:{tester.label}")
    if tester.kind == "guided":
        return _run_guided(graph, tester, budget, rng)
    if tester.kind == "random":
        return _run_random(graph, budget, rng)
    if tester.kind == "greedy_nearest":
        return _run_greedy(graph, budget)
    return _run_dfs(graph, budget)


@dataclass(frozen=True)
class TesterSummary:
    tester: str
    median_steps_to_coverage: float
    q1_steps: float
    q3_steps: float
    median_coverage_at_budget: float
    runs_reaching_full_coverage: int


@dataclass(frozen=True)
class ComparisonReport:
    budget: int
    n_seeds: int
    testers: tuple[TesterSummary, ...]
    savings_vs_guided: dict[str, float]

    def to_dict(self) -> dict:
        return {
            "budget": self.budget,
            "n_seeds": self.n_seeds,
            "testers": [t.__dict__ for t in self.testers],
            "savings_vs_guided": dict(self.savings_vs_guided),
        }


def compare_strategies(app: AppModel, testers, budget: int, n_seeds: int) -> ComparisonReport:
    """Run every tester across seeds 1..n_seeds; unreached coverage counts as
    the full budget. Savings are relative to the fully compliant guided run."""
    if n_seeds < 1:
        raise ParameterError("n_seeds must be >= 1")
    summaries = []
    medians: dict[str, float] = {}
    for tester in testers:
        steps, coverages, full = [], [], 0
        for seed in range(1, n_seeds + 1):
            m = run_simulation(app, tester, budget, seed)
            steps.append(m.steps_to_full_coverage if m.reached_full_coverage else budget)
            coverages.append(m.states_visited / m.states_total)
            full += m.reached_full_coverage
        quart = statistics.quantiles(steps, n=4) if len(steps) > 1 else [steps[0]] * 3
        summaries.append(TesterSummary(
            tester.label,
            median_steps_to_coverage=statistics.median(steps),
            q1_steps=quart[0],
            q3_steps=quart[2],
            median_coverage_at_budget=statistics.median(coverages),
            runs_reaching_full_coverage=full,
        ))
        medians[tester.label] = statistics.median(steps)

    savings: dict[str, float] = {}
    guided_label = "guided:1.0"
    if guided_label in medians:
        base = medians[guided_label]
        for label, median in medians.items():
            savings[label] = 0.0 if median == 0 else (median - base) / median
    return ComparisonReport(budget, n_seeds, tuple(summaries), savings)


def brute_force_optimal_path(g: StgGraph, start: str) -> float:
    """Exhaustive minimum walk cost over all visiting orders of non-start
    states, using closure distances; independent oracle for the planner."""
    if len(g.states) > ORACLE_MAX_STATES:
        raise CapacityError(f"oracle handles at most {ORACLE_MAX_STATES} states")
    if start not in g.state_map:
        raise ParameterError(f"unknown start state {start!r}")
    dmat, _ = metric_closure(g)
    index = dmat.index
    others = [index[s.state_id] for s in g.states if s.state_id != start]
    if not others:
        return 0.0
    best = INF
    start_i = index[start]
    for perm in permutations(others):
        cost, pos = 0.0, start_i
        for t in perm:
            cost += dmat.dist[pos][t]
            if cost >= best:
                break
            pos = t
        else:
            best = cost
    return best
