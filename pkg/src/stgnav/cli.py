"""Command line entry point: generate / extract / merge / plan / simulate / serve.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import app_model, merging, planner, simulator
from .errors import StgNavError
from .stg_core import graph_to_dict, load_graph, save_graph, validate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


def _write(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.write(data.decode("utf-8"))
        sys.stdout.write("\n")
    else:
        Path(path).write_bytes(data)


def _read(path: str) -> bytes:
    return sys.stdin.buffer.read() if path == "-" else Path(path).read_bytes()


def _json_bytes(doc) -> bytes:
    return json.dumps(doc, indent=2, ensure_ascii=False).encode("utf-8")


def cmd_generate(args) -> int:
    app = app_model.generate_random_app(
        n_activities=args.activities,
        states_per_activity=args.states_per_activity,
        branching=args.branching,
        duplicate_rate=args.duplicate_rate,
        seed=args.seed,
    )
    _write(args.out, app_model.save_app(app))
    return EXIT_OK


def cmd_extract(args) -> int:
    app = app_model.load_app(_read(args.app))
    static_g = app_model.static_extract(app)
    dynamic_g, _trace = app_model.dynamic_explore(app, budget=args.budget, seed=args.seed)
    combined = app_model.combine(static_g, dynamic_g)
    _write(args.out, save_graph(combined))
    if args.display:
        from .service import display_document
        merged, _ = merging.signature_merge(combined)
        _write(args.display, _json_bytes(display_document(merged)))
    return EXIT_OK


def cmd_merge(args) -> int:
    graph = load_graph(_read(args.graph))
    merged, sig_report = merging.signature_merge(graph)
    merged, ctx_report = merging.context_merge(merged, tau=args.tau)
    _write(args.out, save_graph(merged))
    if args.report:
        _write(args.report, _json_bytes({
            "version": "1",
            "passes": [
                {"pass": r.merge_pass, "similarity_threshold": r.similarity_threshold,
                 "clusters": [{"representative": rep, "merged": list(members)}
                              for rep, members in r.clusters]}
                for r in (sig_report, ctx_report)
            ],
        }))
    return EXIT_OK


def cmd_plan(args) -> int:
    graph = load_graph(_read(args.graph))
    report = validate(graph)
    if not report.ok:
        for violation in report.violations:
            print(f"{violation.invariant}: {violation.message}", file=sys.stderr)
        return EXIT_DATA
    start = args.start or graph.start_state
    plan = planner.replan(graph, start, visited={start}, n_exact=args.n_exact)
    _write(args.out, _json_bytes({
        "version": "1",
        "node_order": list(plan.node_order),
        "actions": list(plan.actions),
        "total_cost": plan.total_cost,
        "uncovered": list(plan.uncovered),
    }))
    return EXIT_OK


def _parse_testers(spec: str) -> list[simulator.TesterModel]:
    testers = []
    for part in spec.split(","):
        part = part.strip()
        if part.startswith("guided"):
            compliance = float(part.split(":", 1)[1]) if ":" in part else 1.0
            testers.append(simulator.TesterModel("guided", compliance))
        elif part in ("random", "dfs"):
            testers.append(simulator.TesterModel(part))
        elif part in ("greedy", "greedy_nearest"):
            testers.append(simulator.TesterModel("greedy_nearest"))
        else:
            raise StgNavError(f"unknown tester {part!r}")
    return testers


def cmd_simulate(args) -> int:
    app = app_model.load_app(_read(args.app))
    testers = _parse_testers(args.testers)
    report = simulator.compare_strategies(app, testers, budget=args.budget, n_seeds=args.seeds)
    _write(args.out, _json_bytes(report.to_dict()))
    if args.emit_curves:
        curves = {}
        for tester in testers:
            metrics = simulator.run_simulation(app, tester, args.budget, seed=1)
            curves[tester.label] = [list(p) for p in metrics.coverage_curve]
        _write(args.emit_curves, _json_bytes(curves))
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceConfig, create_app

    host = os.environ.get("STGNAV_LISTEN", args.host)
    config = ServiceConfig(
        host=host,
        port=args.port,
        idle_threshold_ms=args.idle_threshold_ms,
        tau=args.tau,
        n_exact=args.n_exact,
        fixture_dir=Path(args.fixture_dir) if args.fixture_dir else None,
        log_dir=Path(args.log_dir) if args.log_dir else None,
    )
    api = create_app(config)
    if config.fixture_dir:
        # preload every fixture in the directory so the UI can start at once
        store = api.state.store
        from .app_model import load_app
        from .merging import signature_merge
        for path in sorted(config.fixture_dir.glob("*.json")):
            doc = json.loads(path.read_text("utf-8"))
            if "true_graph" in doc:
                graph, _ = signature_merge(load_app(path.read_bytes()).true_graph)
            else:
                graph = load_graph(path.read_bytes())
            store.add_graph(graph)
    uvicorn.run(api, host=config.host, port=config.port, log_level="warning")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stgnav",
                                     description="STG extraction, coverage planning and guidance")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic app fixture")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--activities", type=int, default=3)
    p.add_argument("--states-per-activity", type=int, default=4)
    p.add_argument("--branching", type=int, default=2)
    p.add_argument("--duplicate-rate", type=float, default=0.0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("extract", help="static+dynamic extraction into one STG")
    p.add_argument("--app", required=True)
    p.add_argument("--budget", type=int, default=400)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default="-")
    p.add_argument("--display", help="also write a display document for the UI")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("merge", help="collapse near-duplicate states")
    p.add_argument("--graph", required=True)
    p.add_argument("--tau", type=float, default=merging.DEFAULT_TAU)
    p.add_argument("--out", default="-")
    p.add_argument("--report")
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("plan", help="plan a coverage path over a graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--start")
    p.add_argument("--n-exact", type=int, default=planner.N_EXACT)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="compare tester strategies on an app fixture")
    p.add_argument("--app", required=True)
    p.add_argument("--testers", default="guided:1.0,random,greedy")
    p.add_argument("--budget", type=int, default=2000)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--out", default="-")
    p.add_argument("--emit-curves")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="run the JSON-over-HTTP session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8321)
    p.add_argument("--idle-threshold-ms", type=int, default=5000)
    p.add_argument("--tau", type=float, default=merging.DEFAULT_TAU)
    p.add_argument("--n-exact", type=int, default=planner.N_EXACT)
    p.add_argument("--fixture-dir")
    p.add_argument("--log-dir")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return args.func(args)
    except StgNavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
