import random

import numpy as np
import pytest

from oracles import MISSIONS, random_team
from syncplan.buchi import ltl_to_buchi, prefix_feasible
from syncplan.ltl import parse_ltl
from syncplan.planner import Unsatisfiable, plan_robust
from syncplan.sim import (
    FieldEvent, FieldTrace, field_cost, run_trials, sample_duration, simulate, skew,
    team_word, trace_to_jsonl, verify_field_trace,
)
from syncplan.trace import Distribution, check_trace_closed


def test_sample_duration():
    rng = np.random.default_rng(0)
    assert sample_duration(2, 0, "uniform", rng) == 2
    assert sample_duration(2, 0.05, "adversarial-slow", rng) == pytest.approx(2.1)
    assert sample_duration(2, 0.05, "adversarial-fast", rng) == pytest.approx(1.9)
    draws = [sample_duration(1, 0.04, "uniform", rng) for _ in range(10_000)]
    assert 0.96 <= min(draws) and max(draws) <= 1.04
    assert abs(np.mean(draws) - 1) < 0.002
    for bad in (1.0, -0.1):
        with pytest.raises(ValueError):
            sample_duration(1, bad, "uniform", rng)
    with pytest.raises(ValueError):
        sample_duration(1, 0.1, "sideways", rng)


def test_nominal_run_matches_plan(example):
    p = example.plan
    trace = simulate(p, 0.0, 3, seed=5)
    assert all(w == 0 for ws in trace.sync_waits for w in ws)
    for r in p.robot_runs:
        observed = [e.time for e in trace.events if e.robot == r.robot]
        planned = [a.time for a in r.unroll(3)] + [r.cycle[0].time + 3 * r.period]
        assert observed == planned
    assert field_cost(trace) == p.cost


def test_field_cost_examples():
    ev = lambda ts: tuple(FieldEvent(float(t), 0, "b", frozenset({"pi"})) for t in ts)
    base = dict(sync=True, sync_waits=(), cycle_boundaries=(), sync_arrivals=((0.0,),),
                warmup=0.0, horizon=100.0)
    assert field_cost(FieldTrace(ev([2, 4, 6, 8]), **base)) == 2
    assert field_cost(FieldTrace(ev([0, 1, 5]), **base)) == 4
    with pytest.raises(ValueError):
        field_cost(FieldTrace(ev([3]), **base))


@pytest.mark.parametrize("mode", ["uniform", "adversarial-slow", "adversarial-fast"])
def test_sync_keeps_bound(example, b_sync, dist, mode):
    trace = simulate(example.plan, 0.05, 300, seed=11, mode=mode)
    assert field_cost(trace) <= example.exact + 1e-9 <= example.conservative + 1e-9
    assert verify_field_trace(trace, example.plan, b_sync, dist).ok
    d_s = example.plan.suffix_duration
    assert max(max(w) for w in trace.sync_waits) <= 2 * 0.05 * d_s + 1e-9


def test_reproducible(example):
    a = simulate(example.plan, [0.05, 0.05], 50, seed=3)
    b = simulate(example.plan, [0.05, 0.05], 50, seed=3)
    c = simulate(example.plan, [0.05, 0.05], 50, seed=4)
    assert trace_to_jsonl(a) == trace_to_jsonl(b) != trace_to_jsonl(c)


def test_events_ordered(example):
    trace = simulate(example.plan, 0.1, 20, seed=2)
    times = [e.time for e in trace.events]
    assert times == sorted(times)


def test_drift_without_sync(example):
    trace = simulate(example.plan, 0.05, 200, seed=0, sync=False,
                     mode=["adversarial-slow", "adversarial-fast"])
    assert field_cost(trace) > example.conservative
    sk = skew(trace)
    assert all(b > a for a, b in zip(sk, sk[1:]))
    solo = max(r.period for r in example.plan.robot_runs) * 0.95
    assert field_cost(trace) >= solo - 1e-9


def test_first_symbols_feasible(example, b_sync):
    trace = simulate(example.plan, 0.05, 5, seed=9)
    word = [s for _, s in team_word(trace.events)][:12]
    assert len(word) == 12 and prefix_feasible(b_sync, word)


def test_forbidden_swap_detected(t1, t2, dist):
    props = ["r1P", "Sync", "r2P", "pi"]
    cross = parse_ltl("G(r1P -> X r2P) & G F r1P & G F pi & G F Sync", props)
    witness = check_trace_closed(cross, dist, props).witness
    B = ltl_to_buchi(cross, props)
    events = tuple(FieldEvent(float(k), None, None, frozenset(s))
                   for k, s in enumerate(witness.swapped.prefix))
    word = [s for _, s in team_word(events)]
    assert prefix_feasible(B, [s for s in witness.word.prefix])
    assert not prefix_feasible(B, word + [frozenset()] * 0) or \
        not prefix_feasible(B, word + list(witness.swapped.cycle) * 3)


def test_trials_in_parallel_match_serial(example):
    serial = run_trials(example.plan, 0.05, 20, seeds=[1, 2, 3], jobs=1)
    parallel = run_trials(example.plan, 0.05, 20, seeds=[1, 2, 3], jobs=2)
    assert serial == parallel


@pytest.mark.parametrize("seed", range(10))
def test_random_instances_respect_bounds(seed):
    rng = random.Random(500 + seed)
    robots = random_team(rng)
    phi = rng.choice(MISSIONS)
    props = ["p1", "Sync", "p2", "pi"]
    dist = Distribution(({"p1", "pi", "Sync"}, {"p2", "pi", "Sync"}))
    try:
        rp = plan_robust(robots, f"({phi}) & G F pi & G F Sync", dist, 0.1, props)
    except Exception as exc:          # not closed or unsatisfiable: nothing to simulate
        assert type(exc).__name__ in ("NotTraceClosed", "Unsatisfiable")
        return
    trace = simulate(rp.plan, 0.1, 200, seed=seed)
    assert field_cost(trace) <= rp.exact + 1e-9 <= rp.conservative + 1e-9
