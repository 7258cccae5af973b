from __future__ import annotations

import json

import pytest

from stgnav.app_model import (app_from_dict, app_to_dict, base_state_id, combine,
                              dynamic_explore, generate_random_app, load_app,
                              save_app, static_extract)
from stgnav.errors import ConflictError, ParameterError
from stgnav.stg_core import StgGraph, validate


def test_generation_is_deterministic():
    a = generate_random_app(3, 4, 2, 0.3, seed=7)
    b = generate_random_app(3, 4, 2, 0.3, seed=7)
    assert a == b


def test_zero_duplicate_rate_means_no_variants():
    app = generate_random_app(2, 3, 1, 0.0, seed=3)
    assert app.content_variants == {}


def test_state_count_matches_parameters():
    app = generate_random_app(3, 4, 2, 0.0, seed=5)
    assert len(app.true_graph.states) == 12
    assert validate(app.true_graph).ok


def test_every_non_start_state_has_inbound_edge():
    app = generate_random_app(4, 5, 2, 0.0, seed=11)
    g = app.true_graph
    for state in g.states:
        if state.state_id != g.start_state:
            assert g.in_edges[state.state_id], state.state_id


def test_true_graph_strongly_reachable():
    from conftest import bfs_distances
    for seed in range(1, 6):
        app = generate_random_app(3, 4, 2, 0.0, seed=seed)
        dist = bfs_distances(app.true_graph, app.launch_state)
        assert set(dist) == {s.state_id for s in app.true_graph.states}


def test_bad_parameters_rejected():
    with pytest.raises(ParameterError):
        generate_random_app(0, 4, 2, 0.0, seed=1)
    with pytest.raises(ParameterError):
        generate_random_app(3, 4, 0, 0.0, seed=1)
    with pytest.raises(ParameterError):
        generate_random_app(3, 4, 2, 1.5, seed=1)


def test_static_extract_two_activities():
    app = generate_random_app(2, 3, 1, 0.0, seed=2)
    g = static_extract(app)
    assert len(g.states) == 2
    assert len(g.actions) == 1
    assert all(a.provenance == "static" for a in g.actions)


def test_static_extract_counts_declared_pairs():
    app = generate_random_app(3, 2, 3, 0.0, seed=4)
    expected = sum(len(a.declared_targets) for a in app.activities)
    g = static_extract(app)
    assert len(g.actions) == expected


def test_static_extract_is_subgraph_of_truth():
    app = generate_random_app(4, 3, 2, 0.0, seed=9)
    g = static_extract(app)
    true_ids = {e.identity for e in app.true_graph.actions}
    assert all(e.identity in true_ids for e in g.actions)
    entries = {a.entry_state for a in app.activities}
    assert {s.state_id for s in g.states} == entries


def test_dynamic_budget_validation():
    app = generate_random_app(2, 2, 1, 0.0, seed=1)
    with pytest.raises(ParameterError):
        dynamic_explore(app, budget=0, seed=1)
    g, trace = dynamic_explore(app, budget=1, seed=1)
    assert app.launch_state in {base_state_id(s.state_id) for s in g.states}
    assert len(g.actions) <= 1


def test_dynamic_determinism():
    app = generate_random_app(3, 3, 2, 0.4, seed=6)
    r1 = dynamic_explore(app, budget=200, seed=42)
    r2 = dynamic_explore(app, budget=200, seed=42)
    assert r1 == r2


def test_dynamic_trace_steps_chain():
    app = generate_random_app(3, 3, 2, 0.4, seed=6)
    _, trace = dynamic_explore(app, budget=150, seed=5)
    for (_, _, result), (state, _, _) in zip(trace.steps, trace.steps[1:]):
        assert result == state


def test_dynamic_soundness_against_truth():
    app = generate_random_app(3, 4, 2, 0.5, seed=8)
    g, _ = dynamic_explore(app, budget=300, seed=3)
    true = app.true_graph
    for state in g.states:
        base = true.state_map[base_state_id(state.state_id)]
        assert state.activity == base.activity
    true_ids = {(base_state_id(e.source), e.component_ref, e.trigger, base_state_id(e.target))
                for e in true.actions}
    for edge in g.actions:
        key = (base_state_id(edge.source), edge.component_ref, edge.trigger,
               base_state_id(edge.target))
        assert key in true_ids


def test_dynamic_discovers_all_states_with_generous_budget():
    # Monte Carlo over 100 seeds on a small strongly connected app
    app = generate_random_app(1, 5, 2, 0.0, seed=13)
    budget = 10 * len(app.true_graph.actions)
    hits = 0
    for seed in range(100):
        g, _ = dynamic_explore(app, budget=budget, seed=seed)
        bases = {base_state_id(s.state_id) for s in g.states}
        hits += bases == {s.state_id for s in app.true_graph.states}
    assert hits >= 99


def test_combine_identity_and_idempotence():
    app = generate_random_app(2, 3, 2, 0.0, seed=3)
    g, _ = dynamic_explore(app, budget=100, seed=1)
    empty = StgGraph.build([g.state_map[g.start_state]], [], g.start_state)
    assert combine(g, g) == g
    combined = combine(empty, g)
    assert combined.start_state == g.start_state
    assert set(combined.actions) == set(g.actions)


def test_combine_unions_edges():
    app = generate_random_app(2, 3, 1, 0.0, seed=2)
    sg = static_extract(app)
    dg, _ = dynamic_explore(app, budget=120, seed=2)
    combined = combine(sg, dg)
    identities = {e.identity for e in sg.actions} | {e.identity for e in dg.actions}
    assert {e.identity for e in combined.actions} == identities
    assert combined.start_state == dg.start_state


def test_combine_commutative_up_to_start():
    app = generate_random_app(2, 3, 1, 0.0, seed=2)
    sg = static_extract(app)
    dg, _ = dynamic_explore(app, budget=120, seed=2)
    ab, ba = combine(sg, dg), combine(dg, sg)
    assert set(ab.states) == set(ba.states)
    assert {e.identity for e in ab.actions} == {e.identity for e in ba.actions}


def test_combine_conflicting_payloads_rejected():
    app = generate_random_app(2, 3, 1, 0.0, seed=2)
    g = app.true_graph
    other = StgGraph.build(
        [g.states[0].__class__(g.states[0].state_id, "different_activity",
                               g.states[0].root)], [], g.states[0].state_id)
    with pytest.raises(ConflictError):
        combine(g, other)


def test_fixture_roundtrip():
    app = generate_random_app(3, 4, 2, 0.5, seed=7)
    assert load_app(save_app(app)) == app
    assert app_from_dict(json.loads(json.dumps(app_to_dict(app)))) == app
