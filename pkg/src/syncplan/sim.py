"""Field simulator: robots execute their projected runs with perturbed travel
times, optionally meeting at a barrier at the start of every suffix cycle.

With the barrier on, a robot that reaches its synchronization point stops,
broadcasts, and waits until every robot has broadcast; messages are instant
and reliable. Propositions of the synchronization vertex are emitted at the
release, together with the team-wide Sync event.
"""
from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .buchi import BuchiAutomaton, prefix_feasible
from .planner import Plan
from .region import SYNC
from .trace import Distribution, trace_equivalent

__all__ = [
    "MODES", "FieldEvent", "FieldTrace", "FieldReport", "sample_duration",
    "simulate", "field_cost", "team_word", "verify_field_trace", "trace_to_jsonl",
    "run_trials", "skew",
]

MODES = ("uniform", "adversarial-slow", "adversarial-fast")
TOL = 1e-9


@dataclass(frozen=True)
class FieldEvent:
    time: float
    robot: int | None          # None marks the team-wide Sync event
    vertex: str | None
    props: frozenset

    def as_dict(self) -> dict:
        return {"time": self.time, "robot": self.robot, "vertex": self.vertex,
                "props": sorted(self.props)}


@dataclass(frozen=True)
class FieldTrace:
    events: tuple[FieldEvent, ...]
    sync: bool
    sync_waits: tuple[tuple[float, ...], ...]      # per cycle, per robot
    cycle_boundaries: tuple[float, ...]            # barrier releases
    sync_arrivals: tuple[tuple[float, ...], ...]   # per robot, per cycle
    warmup: float
    horizon: float
    pi: str = "pi"

    @property
    def pi_times(self) -> list[float]:
        return [e.time for e in self.events
                if self.pi in e.props and self.warmup - TOL <= e.time <= self.horizon + TOL]

    @property
    def observed_gaps(self) -> list[float]:
        ts = self.pi_times
        return [b - a for a, b in zip(ts, ts[1:])]

    @property
    def field_cost(self) -> float:
        return field_cost(self)


def sample_duration(w: float, rho: float, mode: str, rng: np.random.Generator) -> float:
    if not 0 <= rho < 1:
        raise ValueError("rho must lie in [0, 1)")
    if mode == "uniform":
        return float(rng.uniform((1 - rho) * w, (1 + rho) * w)) if rho else float(w)
    if mode == "adversarial-slow":
        return (1 + rho) * w
    if mode == "adversarial-fast":
        return (1 - rho) * w
    raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")


def _per_robot(value, m, name):
    if isinstance(value, (str, int, float)):
        return [value] * m
    value = list(value)
    if len(value) != m:
        raise ValueError(f"need one {name} per robot")
    return value


def simulate(plan: Plan, rho, cycles: int, seed: int = 0, sync: bool = True,
             mode="uniform") -> FieldTrace:
    """Run every robot through its prefix and `cycles` suffix repetitions."""
    if cycles < 1:
        raise ValueError("cycles must be at least 1")
    runs = plan.robot_runs
    m = len(runs)
    rhos = [float(r) for r in _per_robot(rho, m, "rho")]
    modes = _per_robot(mode, m, "mode")
    for md in modes:
        if md not in MODES:
            raise ValueError(f"unknown mode {md!r}; expected one of {MODES}")
    rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(m)]

    def legs(run):
        """Planned (arrival, duration to next arrival) over prefix then cycle."""
        seq = list(run.prefix) + list(run.cycle)
        nxt_times = [a.time for a in seq[1:]] + [run.cycle[0].time + run.period]
        return seq, [t2 - a.time for a, t2 in zip(seq, nxt_times)]

    events: list[tuple] = []
    sync_arrivals = [[] for _ in range(m)]
    waits, releases = [], []

    def emit(t, i, a, k):
        events.append((t, i, k, FieldEvent(t, i, a.vertex, a.props)))

    clocks = [0.0] * m
    seqs = [legs(r) for r in runs]
    p_len = [len(r.prefix) for r in runs]
    # prefix: from the initial vertex up to arrival at the sync point
    for i, (seq, dur) in enumerate(seqs):
        for k in range(p_len[i]):
            emit(clocks[i], i, seq[k], k)
            clocks[i] += sample_duration(dur[k], rhos[i], modes[i], rngs[i])
    counter = 0
    for c in range(cycles + 1):
        for i in range(m):
            sync_arrivals[i].append(clocks[i])
        if sync:
            release = max(clocks)
            waits.append(tuple(release - t for t in clocks))
            releases.append(release)
            clocks = [release] * m
            events.append((release, m, 0, FieldEvent(release, None, None, frozenset([SYNC]))))
        for i, (seq, dur) in enumerate(seqs):
            emit(clocks[i], i, seq[p_len[i]], counter)
        if c == cycles:
            break
        for i, (seq, dur) in enumerate(seqs):
            p = p_len[i]
            clocks[i] += sample_duration(dur[p], rhos[i], modes[i], rngs[i])
            for k in range(p + 1, len(seq)):
                emit(clocks[i], i, seq[k], k)
                clocks[i] += sample_duration(dur[k], rhos[i], modes[i], rngs[i])
        counter += 1
    if not sync:
        events += _coincident_syncs(events, m)
    events.sort(key=lambda e: (e[0], e[1], e[2]))
    ordered = tuple(e[3] for e in events)
    warmup = releases[0] if sync else max(a[0] for a in sync_arrivals)
    horizon = releases[-1] if sync else min(a[-1] for a in sync_arrivals)
    return FieldTrace(ordered, sync, tuple(waits), tuple(releases),
                      tuple(tuple(a) for a in sync_arrivals), warmup, horizon, plan.pi)


def _coincident_syncs(events, m):
    """Team Sync events at instants where every robot arrives together."""
    arrivals = sorted((e[0], e[1]) for e in events if e[1] < m)
    out, seen = [], set()
    j = 0
    while j < len(arrivals):
        t = arrivals[j][0]
        k = j
        robots = set()
        while k < len(arrivals) and arrivals[k][0] - t <= TOL:
            robots.add(arrivals[k][1])
            k += 1
        if len(robots) == m and t not in seen:
            seen.add(t)
            out.append((t, m, 0, FieldEvent(t, None, None, frozenset([SYNC]))))
        j = k
    return out


def field_cost(trace: FieldTrace, warmup: float | None = None) -> float:
    """Largest gap between consecutive pi events after the warm-up."""
    start = trace.warmup if warmup is None else warmup
    ts = [e.time for e in trace.events
          if trace.pi in e.props and start - TOL <= e.time <= trace.horizon + TOL]
    if len(ts) < 2:
        raise ValueError("field cost needs at least two pi events")
    return max(b - a for a, b in zip(ts, ts[1:]))


def team_word(events: Sequence[FieldEvent], keep_sync=lambda t: True) -> list[tuple[float, frozenset]]:
    """Group events by instant into ``(time, union of props)`` symbols."""
    out: list[tuple[float, set]] = []
    for e in events:
        props = set(e.props)
        if SYNC in props and not keep_sync(e.time):
            props.discard(SYNC)
        if out and e.time - out[-1][0] <= TOL:
            out[-1][1].update(props)
        else:
            out.append((e.time, props))
    return [(t, frozenset(p)) for t, p in out]


def skew(trace: FieldTrace) -> list[float]:
    """Per cycle, the spread of the robots' arrival times at their sync points."""
    arr = np.array(trace.sync_arrivals)
    return [float(x) for x in arr.max(axis=0) - arr.min(axis=0)]


@dataclass(frozen=True)
class FieldReport:
    prefix_feasible: bool
    per_robot_projection_ok: bool
    cyclewise_trace_equivalent: bool

    @property
    def ok(self) -> bool:
        return self.prefix_feasible and self.per_robot_projection_ok and self.cyclewise_trace_equivalent


def verify_field_trace(trace: FieldTrace, plan: Plan, B: BuchiAutomaton,
                       distribution: Distribution) -> FieldReport:
    word = [s for _, s in team_word(trace.events)]
    feasible = prefix_feasible(B, word)

    projection_ok = True
    cycles = len(trace.sync_arrivals[0]) - 1
    for run in plan.robot_runs:
        observed = [(e.vertex, e.props) for e in trace.events if e.robot == run.robot]
        planned = [(a.vertex, a.props) for a in run.unroll(cycles) + [run.cycle[0]]]
        projection_ok &= observed == planned

    equivalent = True
    if trace.sync:
        rel, p = [], len(plan.prefix)
        base = plan.suffix_start
        planned_events = [FieldEvent(t - base, None, None, s)
                          for t, s in zip(plan.timestamps[p:], plan.team_word[p:])]
        planned = [s for _, s in team_word(planned_events, lambda t: abs(t) <= TOL) if s]
        bounds = trace.cycle_boundaries
        for k in range(len(bounds) - 1):
            lo, hi = bounds[k], bounds[k + 1]
            evs = [e for e in trace.events if lo - TOL <= e.time < hi - TOL]
            obs = [s for _, s in team_word(evs, lambda t, lo=lo: abs(t - lo) <= TOL) if s]
            if not trace_equivalent(obs, planned, distribution):
                equivalent = False
                break
    return FieldReport(feasible, projection_ok, equivalent)


def trace_to_jsonl(trace: FieldTrace) -> str:
    return "".join(json.dumps(e.as_dict(), sort_keys=True) + "\n" for e in trace.events)


def _trial(args):
    plan, rho, cycles, seed, sync, mode = args
    tr = simulate(plan, rho, cycles, seed, sync, mode)
    return {"seed": seed, "field_cost": field_cost(tr),
            "max_wait": max((max(w) for w in tr.sync_waits), default=0.0)}


def run_trials(plan: Plan, rho, cycles: int, seeds: Sequence[int], sync: bool = True,
               mode="uniform", jobs: int = 1) -> list[dict]:
    """Independent simulations, one per seed; results come back in seed order."""
    work = [(plan, rho, cycles, s, sync, mode) for s in seeds]
    if jobs <= 1:
        return [_trial(w) for w in work]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(_trial, work))
