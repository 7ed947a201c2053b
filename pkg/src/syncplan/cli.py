"""Command-line front end: ``syncplan {check,plan,simulate,export-dot}``.

Exit codes:
  0  success
  1  I/O, configuration or parse error
  2  usage error
  3  formula is not trace-closed
  4  mission is unsatisfiable on the given team
  5  simulation exceeded the bound or a monitor check failed
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import yaml

from . import __version__
from .buchi import ltl_to_buchi, to_dot as buchi_dot
from .ltl import LTLSyntaxError, UnknownAtomError, parse_ltl
from .planner import (
    FormulaShapeError, NotTraceClosed, RobustPlan, Unsatisfiable, conservative_bound,
    exact_bound, lasso_dot, plan_from_dict, plan_robust, plan_to_dict,
)
from .region import SYNC, build_region_automaton, serialize_region_automaton, state_count_bound
from .sim import (
    MODES, field_cost, run_trials, simulate, skew, trace_to_jsonl, verify_field_trace,
)
from .trace import Distribution, check_trace_closed
from .ts import TSFormatError, TransitionSystem, export_dot, load_ts_file

EXIT_OK, EXIT_ERROR, EXIT_USAGE = 0, 1, 2
EXIT_NOT_CLOSED, EXIT_UNSAT, EXIT_SIM_FAIL = 3, 4, 5


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ProjectConfig:
    robots: tuple[TransitionSystem, ...]
    robot_paths: tuple[str, ...]
    props: tuple[str, ...]
    formula: str
    distribution: Distribution
    rho: tuple[float, ...]
    cycles: int
    seed: int
    mode: tuple[str, ...]
    sync: bool
    trials: int
    output: Path
    pi: str = "pi"


def load_config(path: str | Path) -> ProjectConfig:
    path = Path(path)
    raw = yaml.safe_load(path.read_text())
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: expected a mapping at the top level")
    base = path.parent
    try:
        robot_paths = [str(p) for p in raw["robots"]]
        formula = str(raw["formula"])
        parts = raw["distribution"]
    except KeyError as exc:
        raise ConfigError(f"{path}: missing key {exc.args[0]!r}") from None
    robots = []
    for p in robot_paths:
        full = base / p
        if not full.exists():
            raise ConfigError(f"{path}: robot file {p!r} does not exist")
        robots.append(load_ts_file(full))
    props = raw.get("props") or list(dict.fromkeys(
        [q for ts in robots for q in ts.props] + [SYNC]))
    dist = Distribution(tuple(frozenset(p) for p in parts))
    if not dist.covers(props):
        raise ConfigError(f"{path}: distribution does not cover {sorted(set(props) - dist.props)}")
    if len(dist) != len(robots):
        raise ConfigError(f"{path}: need one distribution part per robot")
    rho = raw.get("rho", 0.0)
    rho = [float(rho)] * len(robots) if isinstance(rho, (int, float)) else [float(r) for r in rho]
    if len(rho) != len(robots) or any(not 0 <= r < 1 for r in rho):
        raise ConfigError(f"{path}: rho needs one value in [0, 1) per robot")
    sim = raw.get("simulation", {}) or {}
    mode = sim.get("mode", "uniform")
    mode = [mode] * len(robots) if isinstance(mode, str) else list(mode)
    return ProjectConfig(
        robots=tuple(robots), robot_paths=tuple(robot_paths), props=tuple(props),
        formula=formula, distribution=dist, rho=tuple(rho),
        cycles=int(sim.get("cycles", 1000)), seed=int(sim.get("seed", 0)),
        mode=tuple(mode), sync=bool(sim.get("sync", True)), trials=int(sim.get("trials", 1)),
        output=base / str(raw.get("output", "out")), pi=str(raw.get("pi", "pi")),
    )


def _fmt_symbols(word) -> str:
    return " ".join("{" + ",".join(sorted(s)) + "}" for s in word)


def _fmt_runs(runs, cycles=2) -> list[str]:
    lines = []
    for r in runs:
        seq = r.unroll(cycles) + [r.cycle[0].__class__(r.cycle[0].vertex,
                                                        r.cycle[0].time + cycles * r.period)]
        lines.append(f"  robot {r.robot + 1}: " + ", ".join(f"{a.vertex}@{a.time:g}" for a in seq))
    return lines


def plan_report(rp: RobustPlan, formula: str) -> str:
    p = rp.plan
    out = [
        f"syncplan {__version__} plan report",
        f"formula: {formula}",
        "trace-closedness: closed",
        f"region states = {rp.stats['region_states']} (bound {rp.stats['region_bound']}), "
        f"serialized = {rp.stats['serialized_states']}, "
        f"buchi = {rp.stats['buchi_states']}, product = {rp.stats['product_states']}",
        "prefix:",
    ]
    for k, s in enumerate(p.prefix):
        out.append(f"  T={p.timestamps[k]:<4} {s:<24} {_fmt_symbols([p.team_word[k]])}")
    out.append("suffix cycle:")
    for k, s in enumerate(p.cycle, start=len(p.prefix)):
        out.append(f"  T={p.timestamps[k]:<4} {s:<24} {_fmt_symbols([p.team_word[k]])}")
    out += [
        f"J = {p.cost:g}",
        f"d_s = {p.suffix_duration:g}",
        f"n_s = {p.n_pi}",
        "T^pi = " + ", ".join(f"{t:g}" for t in p.pi_times(3)) + ", ...",
        "robot runs:",
        *_fmt_runs(p.robot_runs),
        f"rho = {rp.rho:g}",
        f"conservative bound = {rp.conservative:g}",
        f"exact bound = {rp.exact:g}",
    ]
    return "\n".join(out) + "\n"


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)


def cmd_check(cfg: ProjectConfig, args) -> int:
    f = parse_ltl(cfg.formula, cfg.props)
    verdict = check_trace_closed(f, cfg.distribution, cfg.props)
    if verdict.closed:
        print("trace-closed: yes")
        return EXIT_OK
    print("trace-closed: no")
    print(verdict.witness.render())
    return EXIT_NOT_CLOSED


def _plan(cfg: ProjectConfig, rho=None) -> RobustPlan:
    return plan_robust(cfg.robots, cfg.formula, cfg.distribution,
                       rho if rho is not None else cfg.rho, cfg.props, pi=cfg.pi)


def cmd_plan(cfg: ProjectConfig, args) -> int:
    out = Path(args.out) if args.out else cfg.output
    rho = _rho_override(args.rho, len(cfg.robots))
    try:
        rp = _plan(cfg, rho)
    except NotTraceClosed as exc:
        print("trace-closed: no", file=sys.stderr)
        print(exc.verdict.witness.render(), file=sys.stderr)
        return EXIT_NOT_CLOSED
    except Unsatisfiable as exc:
        print(f"unsatisfiable: {exc}", file=sys.stderr)
        return EXIT_UNSAT
    report = plan_report(rp, cfg.formula)
    doc = plan_to_dict(rp, formula=cfg.formula, props=list(cfg.props), version=__version__)
    _write(out / "plan.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _write(out / "plan.txt", report)
    S = serialize_region_automaton(build_region_automaton(cfg.robots), cfg.props)
    _write(out / "plan.dot", lasso_dot(rp.plan, S))
    print(report, end="")
    return EXIT_OK


def _rho_override(text, m):
    if text is None:
        return None
    vals = [float(x) for x in str(text).split(",")]
    if len(vals) == 1:
        vals *= m
    if len(vals) != m or any(not 0 <= r < 1 for r in vals):
        raise ConfigError("--rho needs one value in [0, 1), or one per robot")
    return vals


def cmd_simulate(cfg: ProjectConfig, args) -> int:
    plan_path = Path(args.plan) if args.plan else cfg.output / "plan.json"
    out = Path(args.out) if args.out else plan_path.parent
    doc = json.loads(plan_path.read_text())
    plan = plan_from_dict(doc)
    m = len(plan.robot_runs)
    rho = _rho_override(args.rho, m) or list(cfg.rho)
    cycles = args.cycles if args.cycles is not None else cfg.cycles
    seed = args.seed if args.seed is not None else cfg.seed
    mode = args.mode.split(",") if args.mode else list(cfg.mode)
    if len(mode) == 1:
        mode *= m
    if any(md not in MODES for md in mode) or len(mode) != m:
        raise ConfigError(f"--mode needs one of {', '.join(MODES)}, or one per robot")
    sync = cfg.sync and not args.no_sync
    trials = args.trials if args.trials is not None else cfg.trials

    r = max(rho)
    bound_c = conservative_bound(plan.cost, plan.suffix_duration, r)
    bound_e = exact_bound(plan.cycle_pi_times, plan.suffix_duration, r)
    trace = simulate(plan, rho, cycles, seed, sync, mode)
    props = doc.get("props", list(cfg.props))
    B = ltl_to_buchi(parse_ltl(doc.get("formula", cfg.formula), props), props)
    report = verify_field_trace(trace, plan, B, cfg.distribution)
    costs = [field_cost(trace)]
    if trials > 1:
        results = run_trials(plan, rho, cycles, range(seed + 1, seed + trials), sync, mode,
                             jobs=args.jobs)
        costs += [res["field_cost"] for res in results]
    worst = max(costs)
    within = worst <= bound_c + 1e-9
    sk = skew(trace)
    summary = {
        "version": __version__,
        "cycles": cycles, "seed": seed, "trials": trials, "sync": sync,
        "mode": mode, "rho": rho,
        "planned_cost": plan.cost,
        "field_cost": costs[0], "worst_field_cost": worst,
        "conservative_bound": bound_c, "exact_bound": bound_e,
        "within_bound": within,
        "max_wait": max((max(w) for w in trace.sync_waits), default=0.0),
        "final_skew": sk[-1],
        "prefix_feasible": report.prefix_feasible,
        "per_robot_projection_ok": report.per_robot_projection_ok,
        "cyclewise_trace_equivalent": report.cyclewise_trace_equivalent,
    }
    _write(out / "trace.jsonl", trace_to_jsonl(trace))
    _write(out / "simulation.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    text = "\n".join([
        f"syncplan {__version__} simulation report",
        f"sync protocol: {'on' if sync else 'off'}; cycles = {cycles}; seed = {seed}; "
        f"trials = {trials}; mode = {','.join(mode)}",
        f"planned J = {plan.cost:g}",
        f"field cost = {costs[0]:.6g} (worst over trials {worst:.6g})",
        f"exact bound = {bound_e:.6g}",
        f"conservative bound = {bound_c:.6g}",
        f"max sync wait = {summary['max_wait']:.6g}",
        f"final skew = {sk[-1]:.6g}",
        f"prefix feasible: {report.prefix_feasible}",
        f"per-robot projection: {report.per_robot_projection_ok}",
        f"cycle-wise trace equivalence: {report.cyclewise_trace_equivalent}",
        "result: " + ("PASS" if within and report.ok else "FAIL"),
    ]) + "\n"
    _write(out / "simulation.txt", text)
    print(text, end="")
    return EXIT_OK if within and report.ok else EXIT_SIM_FAIL


def cmd_export_dot(cfg: ProjectConfig, args) -> int:
    out = Path(args.out) if args.out else cfg.output
    for i, ts in enumerate(cfg.robots):
        _write(out / f"robot{i + 1}.dot", export_dot(ts))
    R = build_region_automaton(cfg.robots)
    S = serialize_region_automaton(R, cfg.props)
    _write(out / "region.dot", export_dot(R, "region"))
    _write(out / "region_serialized.dot", export_dot(S, "region_serialized",
                                                     highlight=S.sync_states))
    f = parse_ltl(cfg.formula, cfg.props)
    _write(out / "buchi.dot", buchi_dot(ltl_to_buchi(f, cfg.props)))
    written = ["robot*.dot", "region.dot", "region_serialized.dot", "buchi.dot"]
    try:
        rp = _plan(cfg)
    except (NotTraceClosed, Unsatisfiable):
        pass
    else:
        _write(out / "plan.dot", lasso_dot(rp.plan, S))
        written.append("plan.dot")
    print(f"region states = {len(R) - 1} (bound {state_count_bound(cfg.robots)})")
    print(f"wrote {', '.join(written)} to {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="syncplan", description="Robust time-optimal multi-robot planning.")
    parser.add_argument("--version", action="version", version=f"syncplan {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=True, help="project YAML file")
        return p

    add("check", help="decide trace-closedness of the mission")
    p = add("plan", help="compute the optimal robust plan")
    p.add_argument("--out", help="output directory (overrides config)")
    p.add_argument("--rho", help="deviation bound, one value or one per robot")
    p = add("simulate", help="simulate a plan in the field")
    p.add_argument("--plan", help="plan.json to simulate (default: <output>/plan.json)")
    p.add_argument("--out", help="output directory (default: next to the plan)")
    p.add_argument("--cycles", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--rho", help="deviation bound, one value or one per robot")
    p.add_argument("--mode", help=f"{', '.join(MODES)}; one value or one per robot")
    p.add_argument("--no-sync", action="store_true", help="disable the barrier protocol")
    p.add_argument("--trials", type=int, help="independent seeds to simulate")
    p.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    p = add("export-dot", help="write DOT files for robots, region automata and plan")
    p.add_argument("--out", help="output directory (overrides config)")
    return parser


COMMANDS = {"check": cmd_check, "plan": cmd_plan, "simulate": cmd_simulate,
            "export-dot": cmd_export_dot}


def run_command(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except FormulaShapeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ConfigError, TSFormatError, LTLSyntaxError, UnknownAtomError,
            yaml.YAMLError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run_command())
