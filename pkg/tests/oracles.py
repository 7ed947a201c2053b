"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import itertools
import math
import random
from functools import lru_cache

from syncplan.ltl import (
    And, Atom, Eventually, Formula, Globally, Next, Not, Or, Release, Top, Until,
)


def eval_lasso(f: Formula, prefix, cycle, pos: int = 0) -> bool:
    """Direct recursive LTL semantics on the word ``prefix . cycle^omega``."""
    word = [frozenset(s) for s in list(prefix) + list(cycle)]
    n, p = len(word), len(prefix)

    def nxt(i):
        return i + 1 if i + 1 < n else p

    def walk(i):
        # every position reachable from i, in order, each once
        out = []
        seen = set()
        while i not in seen:
            seen.add(i)
            out.append(i)
            i = nxt(i)
        return out

    @lru_cache(maxsize=None)
    def ev(g, i):
        if isinstance(g, Top):
            return True
        if isinstance(g, Atom):
            return g.name in word[i]
        if isinstance(g, Not):
            return not ev(g.operand, i)
        if isinstance(g, And):
            return ev(g.left, i) and ev(g.right, i)
        if isinstance(g, Or):
            return ev(g.left, i) or ev(g.right, i)
        if isinstance(g, Next):
            return ev(g.operand, nxt(i))
        if isinstance(g, Until):
            for j in walk(i):
                if ev(g.right, j):
                    return True
                if not ev(g.left, j):
                    return False
            return False
        if isinstance(g, Release):
            return not ev(Until(Not(g.left), Not(g.right)), i)
        if isinstance(g, Eventually):
            return any(ev(g.operand, j) for j in walk(i))
        if isinstance(g, Globally):
            return all(ev(g.operand, j) for j in walk(i))
        raise TypeError(g)

    return ev(f, pos)


def random_formula(rng: random.Random, atoms, depth: int) -> Formula:
    if depth == 0 or rng.random() < 0.25:
        r = rng.random()
        if r < 0.1:
            return Top()
        return Atom(rng.choice(atoms))
    op = rng.choice(["not", "and", "or", "X", "U", "R", "F", "G"])
    if op == "not":
        return Not(random_formula(rng, atoms, depth - 1))
    if op in ("X", "F", "G"):
        cls = {"X": Next, "F": Eventually, "G": Globally}[op]
        return cls(random_formula(rng, atoms, depth - 1))
    cls = {"and": And, "or": Or, "U": Until, "R": Release}[op]
    return cls(random_formula(rng, atoms, depth - 1), random_formula(rng, atoms, depth - 1))


def all_lassos(symbols, max_prefix: int, max_cycle: int):
    for p in range(max_prefix + 1):
        for c in range(1, max_cycle + 1):
            for word in itertools.product(symbols, repeat=p + c):
                yield word[:p], word[p:]


def subsets(props):
    props = sorted(props)
    return [frozenset(c) for r in range(len(props) + 1) for c in itertools.combinations(props, r)]


def swap_counterexample(f: Formula, independent, symbols, max_prefix=2, max_cycle=4):
    """Search lassos for w |= f whose one adjacent independent swap violates f.

    The swap is applied inside ``prefix + cycle`` (one unrolled copy), giving
    the lasso ``(swapped, cycle)``. Returns ``(w, w')`` pairs or None.
    """
    for prefix, cycle in all_lassos(symbols, max_prefix, max_cycle):
        if not eval_lasso(f, prefix, cycle):
            continue
        flat = list(prefix) + list(cycle)
        for k in range(len(flat) - 1):
            a, b = flat[k], flat[k + 1]
            if a == b or not independent(a, b):
                continue
            swapped = flat[:k] + [b, a] + flat[k + 2:]
            if not eval_lasso(f, swapped, cycle):
                return (prefix, cycle), (tuple(swapped), tuple(cycle))
    return None


# ---------------------------------------------------------------------------
# Planning oracles

def random_team(rng: random.Random, max_states: int = 3, max_weight: int = 2):
    """Two random robots over props p1 / p2 with pi sprinkled on both."""
    from syncplan.ts import TransitionSystem

    robots = []
    for i, own in enumerate(("p1", "p2")):
        n = rng.randint(1, max_states)
        states = tuple("abc"[:n])
        weights = {}
        for s in states:
            targets = [t for t in states if rng.random() < 0.5]
            if not targets:
                targets = [rng.choice(states)]
            for t in targets:
                weights[(s, t)] = rng.randint(1, max_weight)
        labels = {}
        for s in states:
            lab = set()
            if rng.random() < 0.5:
                lab.add(own)
            if rng.random() < 0.5:
                lab.add("pi")
            labels[s] = frozenset(lab)
        robots.append(TransitionSystem(states, states[0], weights, labels, (own, "pi"),
                                       name=f"T{i + 1}"))
    return robots


MISSIONS = [
    "G F p1", "G F p2", "G F p1 & G F p2", "G (p1 -> F p2)", "F G !p2",
    "G (p1 -> X !p1)", "G F (p1 & p2)", "(!p2 U p1)", "G (p2 -> F pi)", "true",
]


def brute_force_cost(S, B, pi: str = "pi", max_len: int = 12):
    """Least wrap-around pi gap over accepting lassos of the serialized team.

    For J = 1, 2, ... enumerates, depth first, every closed walk of `S` that
    starts at a pi state, has at most `max_len` timed steps (zero-weight
    serialization steps are free) and keeps every gap <= J. A walk counts
    when some Buchi state reachable at its first state accepts the walk's
    word repeated forever. Returns the first such J, or None.
    """
    from syncplan.buchi import BuchiAutomaton, accepts_lasso

    reach = {}
    todo = [(s, b) for s in S.successors(S.initial) for b0 in B.initial
            for b in B.successors(b0, S.label(s))]
    while todo:
        s, b = todo.pop()
        if b in reach.setdefault(s, set()):
            continue
        reach[s].add(b)
        for t in S.successors(s):
            todo.extend((t, b2) for b2 in B.successors(b, S.label(t)))

    def accepted(walk):
        word = [S.label(s) for s in walk[1:]] + [S.label(walk[0])]
        for b in sorted(reach.get(walk[0], ()), key=repr):
            Bb = BuchiAutomaton(B.props, B.states, [b], B.transitions, B.accepting)
            if accepts_lasso(Bb, [], word):
                return True
        return False

    starts = [s for s in S.states if s != S.initial and pi in S.label(s)]
    max_cost = max_len * max(S.weights.values())   # no walk lasts longer
    for J in range(1, max_cost + 1):
        for start in starts:
            stack = [((start,), 0, 0, 0)]
            while stack:
                walk, n, t, tl = stack.pop()
                for m in S.successors(walk[-1]):
                    w = S.weight(walk[-1], m)
                    t2 = t + w
                    if t2 - tl > J:
                        continue
                    if m == start:
                        if accepted(walk):
                            return J
                        continue
                    n2 = n + (w > 0)
                    if n2 > max_len or m == S.initial:
                        continue
                    stack.append((walk + (m,), n2, t2, t2 if pi in S.label(m) else tl))
    return None


def augmented_cost(P, max_cost: int = 64):
    """Least threshold J for which an accepting cycle keeps every pi gap <= J.

    Works on product states paired with the time since the last pi event,
    so it covers closed walks of any length. Integer durations make J an
    integer.
    """
    for J in range(1, max_cost + 1):
        def succ(node):
            s, e = node
            out = []
            for m, w in P.succ[s]:
                e2 = 0 if m in P.pi_nodes else e + w
                if (m in P.pi_nodes and e + w <= J) or (m not in P.pi_nodes and e2 <= J):
                    out.append((m, e2))
            return out
        starts = [(n, 0) for n in P.pi_nodes]
        from syncplan import _graph
        nodes = _graph.reachable(starts, succ)
        for comp in _graph.cyclic_components(nodes, succ):
            if any(n in P.accepting for n, _ in comp) and any(n in P.pi_nodes for n, _ in comp):
                return J
    return None
