import random

from hypothesis import given, strategies as st

from conftest import CROSS, PHI_SYNC, PROPS
from oracles import swap_counterexample
from syncplan.buchi import accepts_lasso, ltl_to_buchi
from syncplan.ltl import parse_ltl
from syncplan.trace import (
    Distribution, check_trace_closed, independent, project_word, trace_equivalent,
)

S = frozenset


def test_projection(dist):
    w = [S({"r1P"}), S({"r2P"}), S({"pi"})]
    assert project_word(w, dist.parts[1]) == [S({"r2P"}), S({"pi"})]
    assert project_word(w[2:], dist.parts[0]) == w[2:]
    assert project_word([], dist.parts[0]) == []


def test_independence(dist):
    assert independent({"r1P"}, {"r2P"}, dist)
    assert not independent({"r1P"}, {"pi"}, dist)
    assert independent({"r1P", "pi"}, set(), dist)


def test_trace_equivalence(dist):
    assert trace_equivalent([{"r1P"}, {"r2P"}], [{"r2P"}, {"r1P"}], dist)
    assert not trace_equivalent([{"r1P"}, {"pi"}], [{"pi"}, {"r1P"}], dist)


def test_distribution_cover(dist):
    assert dist.covers(PROPS) and not dist.covers(PROPS + ["x"])


def test_example_formula_closed(dist):
    assert check_trace_closed(parse_ltl(PHI_SYNC, PROPS), dist, PROPS).closed


def test_example_formula_closed_by_swap_oracle(dist):
    f = parse_ltl(PHI_SYNC, PROPS)
    singles = [S({p}) for p in PROPS]
    ind = lambda a, b: independent(a, b, dist)
    assert swap_counterexample(f, ind, singles, max_prefix=0, max_cycle=4) is None


def test_cross_robot_not_closed(dist):
    f = parse_ltl(CROSS, PROPS)
    verdict = check_trace_closed(f, dist, PROPS)
    assert not verdict.closed
    w = verdict.witness
    B = ltl_to_buchi(f, PROPS)
    assert accepts_lasso(B, w.word.prefix, w.word.cycle)
    assert not accepts_lasso(B, w.swapped.prefix, w.swapped.cycle)
    assert trace_equivalent(w.word.prefix, w.swapped.prefix, dist)
    assert w.word.cycle == w.swapped.cycle


def test_cross_robot_singleton_witness_swaps_robot_events():
    d = Distribution(({"r1P"}, {"r2P"}))
    f = parse_ltl("G(r1P -> X r2P) & G F r1P", ["r1P", "r2P"])
    verdict = check_trace_closed(f, d, alphabet="singletons")
    assert not verdict.closed
    k = verdict.witness.position
    pair = verdict.witness.word.prefix[k:k + 2]
    assert {s for sym in pair for s in sym} <= {"r1P", "r2P"}
    assert verdict.witness.swapped.prefix[k:k + 2] == pair[::-1]


def test_shared_proposition_is_closed():
    d = Distribution(({"pi"}, {"pi"}))
    assert check_trace_closed(parse_ltl("G F pi", ["pi"]), d, alphabet="singletons").closed


words = st.lists(st.frozensets(st.sampled_from(PROPS), min_size=1), max_size=6)


@given(words, words, words)
def test_equivalence_relation(a, b, c):
    dist = Distribution(({"r1P", "pi", "Sync"}, {"r2P", "pi", "Sync"}))
    assert trace_equivalent(a, a, dist)
    assert trace_equivalent(a, b, dist) == trace_equivalent(b, a, dist)
    if trace_equivalent(a, b, dist) and trace_equivalent(b, c, dist):
        assert trace_equivalent(a, c, dist)


@given(words, st.integers(0, 10**6))
def test_independent_swaps_preserve_equivalence(w, seed):
    dist = Distribution(({"r1P", "pi", "Sync"}, {"r2P", "pi", "Sync"}))
    rng = random.Random(seed)
    v = list(w)
    for _ in range(3):
        if len(v) < 2:
            break
        k = rng.randrange(len(v) - 1)
        if independent(v[k], v[k + 1], dist):
            v[k], v[k + 1] = v[k + 1], v[k]
    assert trace_equivalent(w, v, dist)
