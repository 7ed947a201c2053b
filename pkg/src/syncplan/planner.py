"""Optimal prefix-suffix runs, their projection to robots, and field bounds.

The cost of a run is the largest time between consecutive satisfactions of
the optimizing proposition on its suffix cycle. The search works on the
product of the serialized region automaton with a Buchi automaton for the
mission: it builds a graph whose vertices are pi-emitting product states and
whose edges are pi-free product paths, then finds the smallest bottleneck
threshold admitting an accepting cycle.
"""
from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import _graph
from .buchi import BuchiAutomaton, accepts_lasso, ltl_to_buchi
from .ltl import Atom, Eventually, Formula, Globally, conjuncts, parse_ltl, size
from .region import (
    SYNC, RegionAutomaton, RegionState, build_region_automaton,
    serialize_region_automaton, state_count_bound,
)
from .trace import Distribution, TraceVerdict, check_trace_closed
from .ts import TransitionSystem

__all__ = [
    "PI", "Arrival", "RobotRun", "Plan", "Product", "RobustPlan",
    "PlanningError", "FormulaShapeError", "NotTraceClosed", "Unsatisfiable",
    "build_product", "optimal_run", "evaluate_cost", "project_run",
    "conservative_bound", "exact_bound", "plan_robust", "lasso_dot",
    "plan_to_dict", "plan_from_dict",
]

PI = "pi"


class PlanningError(Exception):
    pass


class FormulaShapeError(PlanningError, ValueError):
    pass


class NotTraceClosed(PlanningError):
    def __init__(self, verdict: TraceVerdict):
        self.verdict = verdict
        super().__init__("formula is not trace-closed:\n" + verdict.witness.render())


class Unsatisfiable(PlanningError):
    pass


@dataclass(frozen=True)
class Arrival:
    vertex: str
    time: float
    props: frozenset = frozenset()


@dataclass(frozen=True)
class RobotRun:
    """One robot's share of a plan: arrivals in the prefix and one cycle.

    ``cycle[0]`` is the robot's synchronization point; the cycle repeats
    every `period` time units.
    """
    robot: int
    prefix: tuple[Arrival, ...]
    cycle: tuple[Arrival, ...]
    period: float

    def unroll(self, cycles: int) -> list[Arrival]:
        out = list(self.prefix)
        for k in range(cycles):
            out.extend(Arrival(a.vertex, a.time + k * self.period, a.props) for a in self.cycle)
        return out


@dataclass(frozen=True)
class Plan:
    """Prefix-suffix run on the serialized region automaton.

    `timestamps` covers ``prefix + cycle``; the cycle's first state is
    synchronized (all robots on vertices) and emits Sync whenever the
    automaton carries that proposition.
    """
    prefix: tuple[str, ...]
    cycle: tuple[str, ...]
    timestamps: tuple[int, ...]
    team_word: tuple[frozenset, ...]
    suffix_duration: int
    cycle_pi_times: tuple[int, ...]
    cost: int
    robot_runs: tuple[RobotRun, ...] = ()
    states: tuple[RegionState, ...] = field(default=(), repr=False)
    robot_labels: tuple[dict, ...] = field(default=(), repr=False)
    pi: str = PI

    @property
    def n_pi(self) -> int:
        return len(self.cycle_pi_times)

    @property
    def suffix_start(self) -> int:
        return self.timestamps[len(self.prefix)]

    @property
    def lasso_word(self) -> tuple[tuple[frozenset, ...], tuple[frozenset, ...]]:
        p = len(self.prefix)
        return self.team_word[:p], self.team_word[p:]

    def pi_times(self, cycles: int = 1) -> list[int]:
        """Absolute pi times over the prefix and `cycles` suffix repetitions."""
        p = len(self.prefix)
        out = [t for t, s in zip(self.timestamps[:p], self.team_word[:p]) if self.pi in s]
        for k in range(cycles):
            out.extend(self.suffix_start + k * self.suffix_duration + t for t in self.cycle_pi_times)
        return out

    def timed_word(self, cycles: int = 1) -> list[tuple[int, frozenset]]:
        p = len(self.prefix)
        out = list(zip(self.timestamps[:p], self.team_word[:p]))
        for k in range(cycles):
            out.extend((t + k * self.suffix_duration, s)
                       for t, s in zip(self.timestamps[p:], self.team_word[p:]))
        return out


def evaluate_cost(pi_times: Sequence[float], d_s: float) -> float:
    """Largest gap between consecutive pi times on a cycle of length `d_s`."""
    if not len(pi_times):
        raise ValueError("cost needs at least one pi time")
    ts = list(pi_times)
    gaps = [b - a for a, b in zip(ts, ts[1:])]
    gaps.append(d_s + ts[0] - ts[-1])
    return max(gaps)


def conservative_bound(J: float, d_s: float, rho: float) -> float:
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return J + rho * (J + 2 * d_s)


def exact_bound(pi_times: Sequence[float], d_s: float, rho: float) -> float:
    """Worst-case field cost for a synchronized cycle with relative pi times.

    Combines the worst gap between consecutive satisfactions (including the
    wrap into the next cycle, which starts no later than ``d_s (1 + rho)``)
    with the worst spread of a single planned satisfaction.
    """
    if not len(pi_times):
        raise ValueError("bound needs at least one pi time")
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    lo = [t * (1 - rho) for t in pi_times]
    hi = [t * (1 + rho) for t in pi_times]
    tw = d_s * (1 + rho)
    n = len(pi_times)
    between = [hi[i + 1] - lo[i] for i in range(n - 1)]
    between.append(tw + hi[0] - lo[n - 1])
    spread = [hi[i] - lo[i] for i in range(n)]
    return max(max(between), max(spread))


# ---------------------------------------------------------------------------
# Product

@dataclass
class Product:
    region: RegionAutomaton
    buchi: BuchiAutomaton
    nodes: list
    initial: list
    succ: dict
    accepting: set
    pi_nodes: set
    pi: str = PI

    @property
    def index(self) -> dict:
        return {n: i for i, n in enumerate(self.nodes)}

    def __len__(self) -> int:
        return len(self.nodes)


def build_product(R: RegionAutomaton, B: BuchiAutomaton, pi: str = PI) -> Product:
    """Product whose nodes ``(s, b)`` hold the Buchi state after reading L(s)."""
    initial = []
    for s in R.successors(R.initial):
        for b0 in B.initial:
            for b in B.successors(b0, R.label(s)):
                if (s, b) not in initial:
                    initial.append((s, b))
    succ: dict = {}
    queue = list(initial)
    seen = set(initial)
    nodes = []
    while queue:
        node = queue.pop(0)
        nodes.append(node)
        s, b = node
        out = []
        for t in R.successors(s):
            w = R.weight(s, t)
            for b2 in B.successors(b, R.label(t)):
                m = (t, b2)
                out.append((m, w))
                if m not in seen:
                    seen.add(m)
                    queue.append(m)
        succ[node] = out
    accepting = {n for n in nodes if n[1] in B.accepting}
    pi_nodes = {n for n in nodes if pi in R.label(n[0])}
    return Product(R, B, nodes, initial, succ, accepting, pi_nodes, pi)


def _segments(P: Product):
    """Cheapest pi-free connections between pi nodes.

    Returns ``{u: {v: (dist, dacc)}}`` where `dist` is the least duration of a
    path from `u` to `v` whose interior avoids pi nodes and `dacc` the least
    duration of such a path that visits an accepting node after `u`.
    """
    idx = P.index
    out = {}
    for u in sorted(P.pi_nodes, key=idx.__getitem__):
        best: dict = {}
        done = set()
        heap = []
        for m, w in P.succ[u]:
            heapq.heappush(heap, (w, idx[m], m in P.accepting, m))
        while heap:
            t, _, flag, v = heapq.heappop(heap)
            if (v, flag) in done:
                continue
            done.add((v, flag))
            if v in P.pi_nodes:
                d, da = best.get(v, (math.inf, math.inf))
                best[v] = (min(d, t), min(da, t) if flag else da)
                continue
            for m, w in P.succ[v]:
                f2 = flag or m in P.accepting
                if (m, f2) not in done:
                    heapq.heappush(heap, (t + w, idx[m], f2, m))
        out[u] = best
    return out


def _segment_path(P: Product, u, v, need_acc: bool) -> list:
    """Nodes of a cheapest pi-free path ``u -> v`` (both ends included)."""
    idx = P.index
    parent = {}
    heap = []
    for m, w in P.succ[u]:
        key = (m, m in P.accepting)
        heapq.heappush(heap, (w, len(parent), idx[m], key, None))
    done = set()
    counter = itertools.count()
    while heap:
        t, _, _, key, par = heapq.heappop(heap)
        if key in done:
            continue
        done.add(key)
        parent[key] = par
        node, flag = key
        if node == v and (flag or not need_acc):
            path = [key]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return [u] + [k[0] for k in reversed(path)]
        if node in P.pi_nodes:
            continue
        for m, w in P.succ[node]:
            k2 = (m, flag or m in P.accepting)
            if k2 not in done:
                heapq.heappush(heap, (t + w, next(counter), idx[m], k2, key))
    raise AssertionError("segment path vanished")


def _bottleneck(P: Product, seg):
    """Smallest threshold admitting an accepting cycle, with a witness cycle."""
    idx = P.index
    cands = sorted({x for row in seg.values() for pair in row.values() for x in pair
                    if x < math.inf})

    def components(J):
        succ = {u: [v for v, (d, _) in row.items() if d <= J] for u, row in seg.items()}
        comp = {}
        for k, c in enumerate(_graph.sccs(sorted(seg, key=idx.__getitem__), succ)):
            for n in c:
                comp[n] = k
        return succ, comp

    def witness_edge(J):
        _, comp = components(J)
        best = None
        for u, row in seg.items():
            for v, (_, da) in row.items():
                if da <= J and comp[u] == comp[v]:
                    key = (da, idx[u], idx[v])
                    if best is None or key < best[0]:
                        best = (key, u, v)
        return best

    lo, hi = 0, len(cands) - 1
    if not cands or witness_edge(cands[hi]) is None:
        return None
    while lo < hi:
        mid = (lo + hi) // 2
        if witness_edge(cands[mid]) is not None:
            hi = mid
        else:
            lo = mid + 1
    J = cands[lo]
    _, u, v = witness_edge(J)
    succ, comp = components(J)
    cycle = _segment_path(P, u, v, True)
    if v != u:
        hops = _graph.bfs_path([v], succ, lambda n: n == u,
                               allowed=lambda n: comp[n] == comp[u])
        for a, b in zip(hops, hops[1:]):
            cycle.extend(_segment_path(P, a, b, False)[1:])
    return J, cycle[:-1]


def _primitive(seq: Sequence) -> list:
    n = len(seq)
    for p in range(1, n + 1):
        if n % p == 0 and all(seq[i] == seq[i % p] for i in range(n)):
            return list(seq[:p])
    return list(seq)


def _duration(R: RegionAutomaton, cycle: Sequence[str]) -> int:
    return sum(R.weight(a, b) for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]))


def _cycle_times(R: RegionAutomaton, cycle: Sequence[str]) -> list[int]:
    times, t = [], 0
    for a, b in zip(cycle, list(cycle[1:]) + [cycle[0]]):
        times.append(t)
        t += R.weight(a, b)
    return times


def _closed_walks(R: RegionAutomaton, starts, J, D, pi, budget):
    """Closed walks from each start with every pi gap at most `J`.

    Yields ``(duration, names)``; returns None when the budget runs out.
    """
    found = []
    steps = 0
    for s0 in starts:
        # stack entries: (node, path, time, first pi time, last pi time)
        first = 0 if pi in R.label(s0) else None
        stack = [(s0, (s0,), 0, first, first)]
        while stack:
            node, path, t, tf, tl = stack.pop()
            steps += 1
            if steps > budget:
                return None
            for nxt in reversed(R.successors(node)):
                t2 = t + R.weight(node, nxt)
                if t2 > D:
                    continue
                if nxt == s0:
                    if tf is not None and t2 - tl + tf <= J:
                        found.append((t2, path))
                    continue
                if nxt == R.initial:
                    continue
                if pi in R.label(nxt):
                    if tf is None:
                        if t2 > J:
                            continue
                        stack.append((nxt, path + (nxt,), t2, t2, t2))
                    else:
                        if t2 - tl > J:
                            continue
                        stack.append((nxt, path + (nxt,), t2, tf, t2))
                else:
                    if (tf is None and t2 > J) or (tf is not None and t2 - tl > J):
                        continue
                    stack.append((nxt, path + (nxt,), t2, tf, tl))
    return found


def _lock(P: Product, cycle: Sequence[str]):
    """Product starts at ``cycle[0]`` from which looping `cycle` is accepting."""
    B, R = P.buchi, P.region
    n = len(cycle)
    starts = [node for node in P.nodes if node[0] == cycle[0]]
    if not starts:
        return set()

    def succ(st):
        i, b = st
        j = (i + 1) % n
        return [(j, b2) for b2 in B.successors(b, R.label(cycle[j]))]

    nodes = _graph.reachable([(0, node[1]) for node in starts], succ)
    live = _graph.live_nodes(nodes, succ, lambda st: st[1] in B.accepting)
    return {node for node in starts if (0, node[1]) in live}


def _shortest_prefix(P: Product, targets: set) -> list:
    idx = P.index
    heap = [(0, 0, idx[n], n, None) for n in P.initial]
    heapq.heapify(heap)
    parent = {}
    counter = itertools.count(len(heap))
    while heap:
        t, h, _, node, par = heapq.heappop(heap)
        if node in parent:
            continue
        parent[node] = par
        if node in targets:
            path = [node]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for m, w in P.succ[node]:
            if m not in parent:
                heapq.heappush(heap, (t + w, h + 1, idx[m], m, node))
    raise AssertionError("no prefix to an accepting cycle")


def optimal_run(P: Product, sync: str = SYNC, walk_budget: int = 200_000) -> Plan:
    """Accepting prefix-suffix run with the least largest pi gap.

    Among optimal runs the suffix period is minimized next, then the
    sequence of state names of the suffix rotated to a Sync state.
    """
    R = P.region
    if not P.initial:
        raise Unsatisfiable("product has no initial states")
    seg = _segments(P)
    found = _bottleneck(P, seg)
    if found is None:
        if _graph.find_lasso(P.initial, lambda n: [m for m, _ in P.succ[n]],
                             P.accepting.__contains__) is None:
            raise Unsatisfiable("no accepting run exists")
        raise Unsatisfiable(f"no accepting cycle visits {P.pi!r}")
    J, witness = found
    names = _primitive([n[0] for n in witness])
    D = _duration(R, names)

    sync_idx = [i for i, s in enumerate(names) if sync in R.label(s)]
    rotations = [names[i:] + names[:i] for i in (sync_idx or range(len(names)))]
    fallback = [(D, tuple(r)) for r in rotations]

    starts = [s for s in R.states if sync in R.label(s)] if sync_idx else []
    walks = _closed_walks(R, starts, J, D, P.pi, walk_budget) if starts else None
    candidates = sorted(set(walks)) if walks else []
    candidates += sorted(fallback)

    for d_s, cyc in candidates:
        good = _lock(P, cyc)
        if good:
            break
    else:  # pragma: no cover - the witness itself is always accepting
        raise AssertionError("optimal cycle lost during tie-breaking")
    path = _shortest_prefix(P, good)
    prefix = tuple(n[0] for n in path[:-1])
    cycle = tuple(cyc)
    return _make_plan(R, prefix, cycle, P.pi)


def _make_plan(R: RegionAutomaton, prefix, cycle, pi) -> Plan:
    seq = list(prefix) + list(cycle)
    times, t = [], 0
    for k, s in enumerate(seq):
        times.append(t)
        nxt = seq[k + 1] if k + 1 < len(seq) else cycle[0]
        t += R.weight(s, nxt)
    d_s = _duration(R, cycle)
    rel = _cycle_times(R, cycle)
    cyc_pi = tuple(tt for tt, s in zip(rel, cycle) if pi in R.label(s))
    plan = Plan(
        prefix=tuple(prefix), cycle=tuple(cycle), timestamps=tuple(times),
        team_word=tuple(R.label(s) for s in seq), suffix_duration=d_s,
        cycle_pi_times=cyc_pi, cost=evaluate_cost(cyc_pi, d_s),
        states=tuple(R.region[s] for s in seq), pi=pi,
    )
    return plan


def project_run(plan: Plan, i: int, labels: dict | None = None) -> RobotRun:
    """Robot `i`'s arrivals: it appears at step k when its clock is 0 there
    and time strictly advances to step k + 1."""
    labels = labels if labels is not None else (
        plan.robot_labels[i] if plan.robot_labels else {})
    n, p = len(plan.states), len(plan.prefix)
    end = plan.suffix_start + plan.suffix_duration
    pre, cyc = [], []
    for k, rs in enumerate(plan.states):
        t = plan.timestamps[k]
        t_next = plan.timestamps[k + 1] if k + 1 < n else end
        if rs.at_vertex(i) and t != t_next:
            v = rs.vertex(i)
            (pre if k < p else cyc).append(Arrival(v, t, frozenset(labels.get(v, ()))))
    if not cyc or cyc[0].time != plan.suffix_start:
        raise AssertionError(f"robot {i} is not at a vertex when the suffix starts")
    return RobotRun(i, tuple(pre), tuple(cyc), plan.suffix_duration)


def lasso_dot(plan: Plan, R: RegionAutomaton, name: str = "plan") -> str:
    """DOT drawing of the planned lasso (prefix path plus suffix cycle)."""
    seq = list(plan.prefix) + list(plan.cycle)
    lines = [f'digraph "{name}" {{', "  rankdir=LR;"]
    for k, s in enumerate(seq):
        lab = ", ".join(sorted(plan.team_word[k]))
        shape = "box" if k >= len(plan.prefix) else "ellipse"
        text = f"{s}\\nT={plan.timestamps[k]}" + (f"\\n{{{lab}}}" if lab else "")
        lines.append(f'  k{k} [label="{text}", shape={shape}];')
    for k in range(len(seq)):
        nxt = k + 1 if k + 1 < len(seq) else len(plan.prefix)
        s, t = seq[k], seq[nxt]
        lines.append(f'  k{k} -> k{nxt} [label="{R.weight(s, t)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Orchestration

@dataclass(frozen=True)
class RobustPlan:
    plan: Plan
    verdict: TraceVerdict
    rho: float
    conservative: float
    exact: float
    stats: dict


def _check_shape(f: Formula, pi: str, sync: str) -> None:
    parts = conjuncts(f)
    for p in (pi, sync):
        if Globally(Eventually(Atom(p))) not in parts:
            raise FormulaShapeError(f"formula must contain the conjunct 'G F {p}'")


def plan_robust(robots: Sequence[TransitionSystem], formula: Formula | str,
                distribution: Distribution, rho: Sequence[float] | float,
                props: Sequence[str] | None = None, pi: str = PI, sync: str = SYNC,
                gate_alphabet: str = "subsets") -> RobustPlan:
    """Gate, build, serialize, search, project and bound, in that order.

    Raises FormulaShapeError, NotTraceClosed (with the witness) or
    Unsatisfiable.
    """
    if props is None:
        props = list(dict.fromkeys([p for ts in robots for p in ts.props] + [sync]))
    props = list(props)
    if sync not in props:
        props.append(sync)
    if isinstance(formula, str):
        formula = parse_ltl(formula, props)
    _check_shape(formula, pi, sync)
    if not distribution.covers(props):
        raise ValueError("distribution does not cover the proposition set")
    rhos = [float(rho)] * len(robots) if isinstance(rho, (int, float)) else [float(r) for r in rho]
    if len(rhos) != len(robots):
        raise ValueError("need one rho per robot")
    if any(r < 0 or r >= 1 for r in rhos):
        raise ValueError("each rho must lie in [0, 1)")

    verdict = check_trace_closed(formula, distribution, props, alphabet=gate_alphabet)
    if not verdict.closed:
        raise NotTraceClosed(verdict)

    R = build_region_automaton(robots)
    S = serialize_region_automaton(R, props)
    B = ltl_to_buchi(formula, props)
    P = build_product(S, B, pi)
    plan = optimal_run(P, sync)
    labels = tuple(dict(ts.labels) for ts in robots)
    plan = Plan(**{**plan.__dict__, "robot_labels": labels})
    runs = tuple(project_run(plan, i) for i in range(len(robots)))
    plan = Plan(**{**plan.__dict__, "robot_runs": runs})
    if not accepts_lasso(B, *plan.lasso_word):
        raise AssertionError("planned word is not accepted by the mission automaton")

    r = max(rhos)
    stats = {
        "region_states": len(R) - 1,
        "region_bound": state_count_bound(robots),
        "serialized_states": len(S) - 1,
        "buchi_states": len(B),
        "product_states": len(P),
        "formula_size": size(formula),
    }
    return RobustPlan(plan, verdict, r,
                      conservative_bound(plan.cost, plan.suffix_duration, r),
                      exact_bound(plan.cycle_pi_times, plan.suffix_duration, r), stats)


# ---------------------------------------------------------------------------
# Machine-readable form

PLAN_SCHEMA = "syncplan.plan/1"


def _arrivals(seq) -> list[dict]:
    return [{"vertex": a.vertex, "time": a.time, "props": sorted(a.props)} for a in seq]


def plan_to_dict(rp: RobustPlan, **extra) -> dict:
    """JSON-ready description of a robust plan; see README for the schema."""
    p = rp.plan
    return {
        "schema": PLAN_SCHEMA,
        "pi": p.pi,
        "prefix": list(p.prefix),
        "cycle": list(p.cycle),
        "timestamps": list(p.timestamps),
        "team_word": [sorted(s) for s in p.team_word],
        "states": [{"pairs": [list(e) for e in rs.pairs], "clocks": list(rs.clocks)}
                   for rs in p.states],
        "cost": p.cost,
        "suffix_duration": p.suffix_duration,
        "cycle_pi_times": list(p.cycle_pi_times),
        "pi_times": p.pi_times(2),
        "robots": [{"robot": r.robot, "period": r.period, "prefix": _arrivals(r.prefix),
                    "cycle": _arrivals(r.cycle)} for r in p.robot_runs],
        "rho": rp.rho,
        "bounds": {"conservative": rp.conservative, "exact": rp.exact},
        "stats": dict(rp.stats),
        **extra,
    }


def plan_from_dict(d: dict) -> Plan:
    if d.get("schema") != PLAN_SCHEMA:
        raise ValueError(f"not a plan document (schema {d.get('schema')!r})")

    def arrivals(seq):
        return tuple(Arrival(a["vertex"], a["time"], frozenset(a["props"])) for a in seq)

    runs = tuple(RobotRun(r["robot"], arrivals(r["prefix"]), arrivals(r["cycle"]), r["period"])
                 for r in d["robots"])
    states = tuple(RegionState(tuple(tuple(e) for e in s["pairs"]), tuple(s["clocks"]))
                   for s in d["states"])
    return Plan(
        prefix=tuple(d["prefix"]), cycle=tuple(d["cycle"]), timestamps=tuple(d["timestamps"]),
        team_word=tuple(frozenset(s) for s in d["team_word"]),
        suffix_duration=d["suffix_duration"], cycle_pi_times=tuple(d["cycle_pi_times"]),
        cost=d["cost"], robot_runs=runs, states=states, pi=d["pi"],
    )
