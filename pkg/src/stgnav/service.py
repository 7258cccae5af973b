"""JSON-over-HTTP session service consumed by the explorer UI.

All session state lives in the guidance engine; the HTTP layer only stores
graphs, serializes per-session access, and (optionally) persists event logs
as newline-delimited JSON for replay-based recovery.
"""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .app_model import app_from_dict
from .errors import (CapacityError, ConflictError, ParameterError, ParseError,
                     StgNavError, UnknownStateError, VersionError)
from .guidance import (DEFAULT_IDLE_THRESHOLD_MS, Session, layout_state,
                       replay_session)
from .merging import DEFAULT_TAU, signature_merge
from .planner import N_EXACT
from .stg_core import StgGraph, graph_from_dict, graph_to_dict, validate


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8321
    idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS
    tau: float = DEFAULT_TAU
    n_exact: int = N_EXACT
    fixture_dir: Path | None = None
    log_dir: Path | None = None

    def __post_init__(self):
        if self.idle_threshold_ms <= 0 or self.port <= 0:
            raise ParameterError("thresholds must be positive")


def display_document(graph: StgGraph) -> dict:
    """Node/edge/activity summary for the UI's graph panel."""
    return {
        "version": "1",
        "start_state": graph.start_state,
        "activities": sorted({s.activity for s in graph.states}),
        "nodes": [{"state_id": s.state_id, "activity": s.activity} for s in graph.states],
        "edges": [
            {"action_id": a.action_id, "source": a.source, "target": a.target,
             "trigger": a.trigger, "provenance": a.provenance}
            for a in graph.actions
        ],
    }


def _screen_payload(session: Session) -> dict:
    state = session.graph.state_map[session.current]
    layout = layout_state(state)
    components = []
    for local_id, bounds in layout.components:
        node = state.component(local_id)
        components.append({
            "local_id": local_id,
            "kind": node.kind,
            "content": node.content,
            "bounds": bounds.to_dict(),
        })
    outgoing = [
        {"action_id": e.action_id, "trigger": e.trigger,
         "component_ref": e.component_ref, "target": e.target}
        for e in session.graph.out_edges.get(session.current, ())
    ]
    return {
        "state_id": state.state_id,
        "activity": state.activity,
        "viewport": {"w": layout.width, "h": layout.height},
        "components": components,
        "back_key": {"bounds": layout.back_key.to_dict()},
        "outgoing": outgoing,
    }


def _session_payload(session: Session, deviation: bool = False) -> dict:
    hint = session.current_hint()
    return {
        "version": "1",
        "session_id": session.session_id,
        "screen": _screen_payload(session),
        "hint": hint.to_dict() if hint else None,
        "plan": {"node_order": list(session.plan.node_order),
                 "actions": list(session.plan.actions),
                 "total_cost": session.plan.total_cost,
                 "uncovered": list(session.plan.uncovered)},
        "visited": sorted(session.visited),
        "coverage": session.metrics()["coverage"],
        "deviation": deviation,
    }


class _Store:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.graphs: dict[str, StgGraph] = {}
        self.sessions: dict[str, Session] = {}
        self.locks: dict[str, threading.Lock] = {}
        self.session_app: dict[str, str] = {}
        self._app_ids = itertools.count(1)
        self._session_ids = itertools.count(1)
        self._mutex = threading.Lock()

    def add_graph(self, graph: StgGraph) -> str:
        with self._mutex:
            app_id = f"app-{next(self._app_ids)}"
            self.graphs[app_id] = graph
            return app_id

    def add_session(self, app_id: str, start: str | None, idle_threshold_ms: int) -> Session:
        with self._mutex:
            graph = self.graphs[app_id]
            sid = f"sess-{next(self._session_ids)}"
            session = Session(graph, start or graph.start_state, idle_threshold_ms,
                              self.config.n_exact, session_id=sid)
            self.sessions[sid] = session
            self.locks[sid] = threading.Lock()
            self.session_app[sid] = app_id
            return session

    def persist(self, session: Session) -> None:
        if self.config.log_dir is None:
            return
        self.config.log_dir.mkdir(parents=True, exist_ok=True)
        path = self.config.log_dir / f"{session.session_id}.ndjson"
        with path.open("w", encoding="utf-8") as fh:
            for event in session.event_log:
                fh.write(json.dumps(event.to_dict(), ensure_ascii=False) + "\n")


def _error(status: int, code: str, message: str, path: str = "$") -> JSONResponse:
    return JSONResponse(status_code=status,
                        content={"code": code, "message": message, "path": path})


def create_app(config: ServiceConfig | None = None) -> FastAPI:
    config = config or ServiceConfig()
    store = _Store(config)
    api = FastAPI(title="stgnav session service")
    api.state.store = store

    @api.exception_handler(StgNavError)
    async def handle_domain_error(_request: Request, exc: StgNavError):
        if isinstance(exc, (ParseError, VersionError, ConflictError)):
            return _error(422, "parse", str(exc), getattr(exc, "path", "$"))
        if isinstance(exc, CapacityError):
            return _error(422, "capacity", str(exc))
        if isinstance(exc, UnknownStateError):
            return _error(422, "unknown_state", str(exc))
        return _error(422, "validation", str(exc))

    @api.post("/apps")
    async def upload_app(request: Request):
        doc = await request.json()
        if not isinstance(doc, dict):
            return _error(422, "validation", "expected an object")
        if "true_graph" in doc:
            # app fixture: sessions run over the signature-merged true graph
            graph, _ = signature_merge(app_from_dict(doc).true_graph)
        else:
            graph = graph_from_dict(doc)
        report = validate(graph)
        if not report.ok:
            first = report.violations[0]
            return _error(422, "validation",
                          f"{first.invariant}: {first.message}", first.subject_id)
        return {"app_id": store.add_graph(graph)}

    @api.get("/apps/{app_id}/stg")
    async def get_stg(app_id: str):
        graph = store.graphs.get(app_id)
        if graph is None:
            return _error(404, "not_found", f"no app {app_id!r}")
        return display_document(graph)

    @api.get("/apps/{app_id}/graph")
    async def get_graph(app_id: str):
        graph = store.graphs.get(app_id)
        if graph is None:
            return _error(404, "not_found", f"no app {app_id!r}")
        return graph_to_dict(graph)

    @api.post("/sessions")
    async def start(request: Request):
        body = await request.json()
        app_id = body.get("app_id")
        if app_id not in store.graphs:
            return _error(404, "not_found", f"no app {app_id!r}", "$.app_id")
        session = store.add_session(app_id, body.get("start"),
                                    body.get("idle_threshold_ms", config.idle_threshold_ms))
        store.persist(session)
        return _session_payload(session)

    def _with_session(session_id: str):
        session = store.sessions.get(session_id)
        if session is None:
            return None, _error(404, "not_found", f"no session {session_id!r}")
        return session, None

    @api.get("/sessions/{session_id}/hint")
    async def hint(session_id: str):
        session, err = _with_session(session_id)
        if err:
            return err
        with store.locks[session_id]:
            served = session.serve_hint()
            store.persist(session)
            return {"hint": served.to_dict() if served else None}

    @api.post("/sessions/{session_id}/action")
    async def action(session_id: str, request: Request):
        session, err = _with_session(session_id)
        if err:
            return err
        body = await request.json()
        action_id = body.get("action_id")
        observed = body.get("observed")
        if action_id is None and observed is None:
            return _error(422, "validation", "action_id or observed is required", "$.action_id")
        with store.locks[session_id]:
            session.report_transition(action_id, observed, at=body.get("t_ms"))
            deviated = session.event_log[-1].kind == "deviation"
            store.persist(session)
            return _session_payload(session, deviation=deviated)

    @api.post("/sessions/{session_id}/idle-tick")
    async def idle(session_id: str, request: Request):
        session, err = _with_session(session_id)
        if err:
            return err
        body = await request.json()
        if "now_ms" not in body:
            return _error(422, "validation", "now_ms is required", "$.now_ms")
        with store.locks[session_id]:
            session.on_idle(body["now_ms"])
            store.persist(session)
            return _session_payload(session)

    @api.get("/sessions/{session_id}/metrics")
    async def metrics(session_id: str):
        session, err = _with_session(session_id)
        if err:
            return err
        with store.locks[session_id]:
            return session.metrics()

    @api.get("/sessions/{session_id}/log")
    async def log(session_id: str):
        session, err = _with_session(session_id)
        if err:
            return err
        with store.locks[session_id]:
            return {"events": [e.to_dict() for e in session.event_log]}

    return api


def restore_sessions(store_app: FastAPI, graph: StgGraph, start: str, log_path: Path,
                     idle_threshold_ms: int = DEFAULT_IDLE_THRESHOLD_MS) -> Session:
    """Rebuild a session from a persisted NDJSON event log."""
    events = [json.loads(line) for line in log_path.read_text("utf-8").splitlines() if line]
    return replay_session(graph, start, events, idle_threshold_ms)
