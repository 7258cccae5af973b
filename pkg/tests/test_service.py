from __future__ import annotations

import json

import pytest
from fastapi.testclient import TestClient

from stgnav.app_model import app_to_dict, generate_random_app
from stgnav.guidance import Session, replay_session
from stgnav.service import ServiceConfig, create_app, display_document
from stgnav.stg_core import graph_to_dict


@pytest.fixture
def client(tmp_path):
    config = ServiceConfig(log_dir=tmp_path / "logs")
    return TestClient(create_app(config))


@pytest.fixture
def line_app_id(client, line_graph):
    resp = client.post("/apps", json=graph_to_dict(line_graph))
    assert resp.status_code == 200
    return resp.json()["app_id"]


def _start(client, app_id, **kwargs):
    resp = client.post("/sessions", json={"app_id": app_id, **kwargs})
    assert resp.status_code == 200
    return resp.json()


def test_upload_graph_and_display(client, line_graph, line_app_id):
    resp = client.get(f"/apps/{line_app_id}/stg")
    doc = resp.json()
    assert doc == display_document(line_graph)
    assert {n["state_id"] for n in doc["nodes"]} == {"A", "B", "C"}


def test_upload_app_fixture(client):
    app = generate_random_app(3, 4, 2, 0.5, seed=7)
    resp = client.post("/apps", json=app_to_dict(app))
    assert resp.status_code == 200
    app_id = resp.json()["app_id"]
    stg = client.get(f"/apps/{app_id}/stg").json()
    assert len(stg["nodes"]) == 12  # merged true graph


def test_upload_rejects_malformed_document(client):
    resp = client.post("/apps", json={"version": "1"})
    assert resp.status_code == 422
    body = resp.json()
    assert set(body) == {"code", "message", "path"}


def test_session_start_serves_first_hint(client, line_app_id):
    body = _start(client, line_app_id)
    assert body["screen"]["state_id"] == "A"
    assert body["hint"]["target"] == "B"
    assert body["plan"]["total_cost"] == 2


def test_unknown_ids_return_not_found(client):
    assert client.get("/apps/nope/stg").status_code == 404
    assert client.post("/sessions", json={"app_id": "nope"}).status_code == 404
    assert client.get("/sessions/nope/hint").status_code == 404


def test_action_not_available_is_validation_error(client, line_app_id):
    body = _start(client, line_app_id)
    resp = client.post(f"/sessions/{body['session_id']}/action", json={"action_id": "bc"})
    assert resp.status_code == 422
    assert resp.json()["code"] == "validation"


def test_scripted_client_reaches_full_coverage(client):
    app = generate_random_app(3, 4, 2, 0.0, seed=7)
    app_id = client.post("/apps", json=app_to_dict(app)).json()["app_id"]
    body = _start(client, app_id)
    plan_cost = body["plan"]["total_cost"]
    steps = 0
    while body["hint"] is not None:
        resp = client.post(f"/sessions/{body['session_id']}/action",
                           json={"action_id": body["hint"]["action_id"]})
        assert resp.status_code == 200
        body = resp.json()
        steps += 1
    metrics = client.get(f"/sessions/{body['session_id']}/metrics").json()
    assert metrics["coverage"] == 1.0
    assert metrics["steps"] == steps == plan_cost


def test_deviation_over_http_replans(client, line_graph):
    # add a C -> B edge so a deviation to C can still cover B
    from conftest import back_edge
    from stgnav.stg_core import StgGraph
    g = StgGraph.build(list(line_graph.states),
                       list(line_graph.actions) + [back_edge("cb", "C", "B")], "A")
    app_id = client.post("/apps", json=graph_to_dict(g)).json()["app_id"]
    body = _start(client, app_id)
    sid = body["session_id"]
    # walk A -> B (following), then B -> C while hint may point elsewhere
    body = client.post(f"/sessions/{sid}/action", json={"action_id": "ab"}).json()
    body = client.post(f"/sessions/{sid}/action", json={"action_id": "bc"}).json()
    body = client.post(f"/sessions/{sid}/action", json={"action_id": "cb"}).json()
    metrics = client.get(f"/sessions/{sid}/metrics").json()
    assert metrics["coverage"] == 1.0


def test_idle_tick_endpoint(client, line_app_id):
    body = _start(client, line_app_id)
    sid = body["session_id"]
    resp = client.post(f"/sessions/{sid}/idle-tick", json={"now_ms": 6000})
    assert resp.status_code == 200
    log = client.get(f"/sessions/{sid}/log").json()["events"]
    assert any(e["kind"] == "idle_tick" for e in log)
    resp = client.post(f"/sessions/{sid}/idle-tick", json={})
    assert resp.status_code == 422


def test_transport_transparency(client, line_graph, line_app_id):
    """Driving a session over HTTP equals applying the same events directly."""
    body = _start(client, line_app_id)
    sid = body["session_id"]
    client.post(f"/sessions/{sid}/action", json={"action_id": "ab", "t_ms": 10})
    client.post(f"/sessions/{sid}/idle-tick", json={"now_ms": 7000})
    client.post(f"/sessions/{sid}/action", json={"action_id": "bc", "t_ms": 7050})
    http_metrics = client.get(f"/sessions/{sid}/metrics").json()

    direct = Session(line_graph, "A")
    direct.report_transition("ab", at=10)
    direct.on_idle(7000)
    direct.report_transition("bc", at=7050)
    assert direct.metrics() == http_metrics
    http_log = client.get(f"/sessions/{sid}/log").json()["events"]
    assert [e for e in http_log if e["kind"] != "hint_served"] == \
        [e.to_dict() for e in direct.event_log if e.kind != "hint_served"]


def test_persisted_log_restores_session(tmp_path, line_graph):
    config = ServiceConfig(log_dir=tmp_path / "logs")
    client = TestClient(create_app(config))
    app_id = client.post("/apps", json=graph_to_dict(line_graph)).json()["app_id"]
    body = _start(client, app_id)
    sid = body["session_id"]
    client.get(f"/sessions/{sid}/hint")
    client.post(f"/sessions/{sid}/action", json={"action_id": "ab"})
    client.post(f"/sessions/{sid}/action", json={"action_id": "bc"})
    live = client.get(f"/sessions/{sid}/metrics").json()

    log_path = tmp_path / "logs" / f"{sid}.ndjson"
    events = [json.loads(line) for line in log_path.read_text().splitlines()]
    restored = replay_session(line_graph, "A", events)
    assert restored.metrics() == live
