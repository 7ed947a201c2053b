import random

import pytest

from conftest import PROPS
from syncplan.region import (
    INIT, SYNC, build_region_automaton, serialize_region_automaton, state_count_bound,
)
from syncplan.ts import TransitionSystem


@pytest.fixture(scope="module")
def R(t1, t2):
    return build_region_automaton([t1, t2])


@pytest.fixture(scope="module")
def S(R):
    return serialize_region_automaton(R, PROPS)


def test_single_robot_is_the_ts(t1):
    R = build_region_automaton([t1])
    assert R.successors(INIT) == ["(ab),(0)"]
    assert R.successors("(ab),(0)") == ["(ba),(0)"] and R.weight("(ab),(0)", "(ba),(0)") == 2
    assert len(R) - 1 == len(t1.edges)


def test_example_transition(R):
    assert R.weight("(ba,bc),(0,0)", "(ba,cb),(1,0)") == 1


def test_state_count_bound(R, t1, t2):
    assert state_count_bound([t1, t2]) == 25
    assert len(R) - 1 <= 25


def test_bound_small_case():
    ts = TransitionSystem(("a", "b"), "a", {("a", "b"): 1, ("b", "a"): 1, ("a", "a"): 1},
                          {}, ())
    assert state_count_bound([ts]) == 4


def test_bound_grows_with_team_size():
    ts = TransitionSystem(("a", "b"), "a", {("a", "b"): 2, ("b", "a"): 1}, {}, ())
    bounds = [state_count_bound([ts] * m) for m in (1, 2, 3)]
    assert bounds[0] < bounds[1] < bounds[2]


def test_weight_consistency(R, t1, t2):
    robots = [t1, t2]
    for (u, v), w in R.weights.items():
        if u == INIT:
            assert w == 0 and R.region[v].synchronized
            continue
        a, b = R.region[u], R.region[v]
        rem = [robots[i].weight(*a.pairs[i]) - a.clocks[i] for i in range(2)]
        assert w == min(rem)
        for i in range(2):
            assert isinstance(b.clocks[i], int)
            if rem[i] == w:
                assert b.clocks[i] == 0 and b.pairs[i][0] == a.pairs[i][1]
            else:
                assert rem[i] > w and b.pairs[i] == a.pairs[i]
                assert b.clocks[i] == a.clocks[i] + w


def test_deterministic_names(t1, t2, R):
    again = build_region_automaton([t1, t2])
    assert again.states == R.states and again.weights == R.weights


def test_serialized_chain(S):
    chain = [f"(ba,bc),(0,0)#{k}" for k in range(1, 5)]
    assert [sorted(S.label(c)) for c in chain] == [["r1P"], [SYNC], ["r2P"], ["pi"]]
    for a, b in zip(chain, chain[1:]):
        assert S.successors(a) == [b] and S.weight(a, b) == 0


def test_unsynchronized_state_unchanged(S):
    assert "(ba,cb),(1,0)" in S.states and S.label("(ba,cb),(1,0)") == frozenset()


def test_at_most_one_proposition(S):
    assert all(len(S.label(s)) <= 1 for s in S.states)


def test_sync_labels(R, S):
    for s in S.states:
        if s == INIT:
            continue
        chain = [c for c in S.states if S.origin.get(c) == S.origin[s]]
        has_sync = any(SYNC in S.label(c) for c in chain)
        assert has_sync == R.region[S.origin[s]].synchronized


def test_serialization_preserves_timed_words(R, S):
    rng = random.Random(3)

    def timed(word_steps):
        out = {}
        for t, lab in word_steps:
            out.setdefault(t, set()).update(lab)
        return out

    for _ in range(50):
        state, t, steps = INIT, 0, []
        ser_state, ser_t, ser_steps = INIT, 0, []
        for _ in range(8):
            nxt = rng.choice(R.successors(state))
            t += R.weight(state, nxt)
            state = nxt
            lab = set(R.label(state)) | ({SYNC} if R.region[state].synchronized else set())
            steps.append((t, lab))
            target = next(c for c in S.successors(ser_state) if S.origin[c] == state)
            ser_t += S.weight(ser_state, target)
            ser_state = target
            ser_steps.append((ser_t, S.label(ser_state)))
            while S.successors(ser_state) and all(S.weight(ser_state, c) == 0
                                                  for c in S.successors(ser_state)):
                ser_state = S.successors(ser_state)[0]
                ser_steps.append((ser_t, S.label(ser_state)))
        assert timed(steps) == timed(ser_steps)
