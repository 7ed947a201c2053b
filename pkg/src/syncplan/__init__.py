"""Robust time-optimal planning for robot teams with LTL missions."""

__version__ = "0.1.0"

from .buchi import BuchiAutomaton, accepts_lasso, intersect, is_empty, ltl_to_buchi, prefix_feasible
from .ltl import Formula, parse_ltl, to_nnf
from .planner import (
    Plan, RobustPlan, build_product, conservative_bound, evaluate_cost, exact_bound,
    optimal_run, plan_robust, project_run,
)
from .region import build_region_automaton, serialize_region_automaton, state_count_bound
from .sim import FieldTrace, field_cost, simulate, verify_field_trace
from .trace import Distribution, check_trace_closed, project_word, trace_equivalent
from .ts import TransitionSystem, load_ts, load_ts_file

__all__ = [
    "BuchiAutomaton", "Distribution", "FieldTrace", "Formula", "Plan", "RobustPlan",
    "TransitionSystem", "accepts_lasso", "build_product", "build_region_automaton",
    "check_trace_closed", "conservative_bound", "evaluate_cost", "exact_bound",
    "field_cost", "intersect", "is_empty", "load_ts", "load_ts_file", "ltl_to_buchi",
    "optimal_run", "parse_ltl", "plan_robust", "prefix_feasible", "project_run",
    "project_word", "serialize_region_automaton", "simulate", "state_count_bound",
    "to_nnf", "trace_equivalent", "verify_field_trace",
]
