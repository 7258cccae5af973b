"""Coverage-path guidance engine for GUI state transition graphs."""

from .stg_core import (ActionEdge, ComponentNode, StateNode, StgGraph,
                       hierarchy_signature, load_graph, save_graph, validate)
from .app_model import (AppModel, combine, dynamic_explore, generate_random_app,
                        static_extract)
from .merging import context_merge, signature_merge, similarity
from .planner import (Plan, expand_plan, metric_closure, plan_coverage_path,
                      plan_scalable, replan)
from .guidance import Session, replay_session, start_session
from .simulator import (TesterModel, brute_force_optimal_path, compare_strategies,
                        run_simulation)

__all__ = [
    "ActionEdge", "AppModel", "ComponentNode", "Plan", "Session", "StateNode",
    "StgGraph", "TesterModel", "brute_force_optimal_path", "combine",
    "compare_strategies", "context_merge", "dynamic_explore", "expand_plan",
    "generate_random_app", "hierarchy_signature", "load_graph", "metric_closure",
    "plan_coverage_path", "plan_scalable", "replan", "replay_session",
    "run_simulation", "save_graph", "signature_merge", "similarity",
    "start_session", "static_extract", "validate",
]
