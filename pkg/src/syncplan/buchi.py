"""Buchi automata: tableau translation from LTL and language queries.

Transitions carry symbolic guards ``(pos, neg)``; a symbol (a set of
propositions) satisfies a guard when it contains every proposition in ``pos``
and none in ``neg``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Hashable, Iterable, NamedTuple, Sequence

from . import _graph
from .ltl import (
    And, Atom, Eventually, Formula, Globally, Next, Not, Or, Release, Top,
    Until, pretty, to_nnf,
)

__all__ = [
    "Guard", "BuchiAutomaton", "Lasso", "ltl_to_buchi", "accepts_lasso",
    "is_empty", "find_accepting_lasso", "intersect", "prefix_feasible",
    "to_dot",
]

Symbol = frozenset


class Guard(NamedTuple):
    pos: frozenset
    neg: frozenset

    def satisfied_by(self, symbol: Iterable[str]) -> bool:
        if not isinstance(symbol, (set, frozenset)):
            symbol = frozenset(symbol)
        return self.pos <= symbol and self.neg.isdisjoint(symbol)

    def conjoin(self, other: "Guard") -> "Guard | None":
        pos, neg = self.pos | other.pos, self.neg | other.neg
        if pos & neg:
            return None
        return Guard(pos, neg)

    def label(self) -> str:
        lits = sorted(self.pos) + ["!" + p for p in sorted(self.neg)]
        return " & ".join(lits) if lits else "true"

    @classmethod
    def exact(cls, symbol: Iterable[str], props: Iterable[str]) -> "Guard":
        symbol = frozenset(symbol)
        return cls(symbol, frozenset(props) - symbol)


TRUE_GUARD = Guard(frozenset(), frozenset())


@dataclass
class BuchiAutomaton:
    """Nondeterministic Buchi automaton over subsets of `props`.

    `transitions` maps each state to an ordered list of ``(guard, target)``.
    States are any hashable values; `to_dot` renders them with ``str``.
    """
    props: frozenset
    states: list
    initial: list
    transitions: dict
    accepting: frozenset
    formula: Formula | None = None
    _live: set | None = field(default=None, repr=False, compare=False)
    _succ_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        known = set(self.states)
        if not set(self.initial) <= known or not set(self.accepting) <= known:
            raise ValueError("initial/accepting states must be states")
        for s, edges in self.transitions.items():
            if s not in known or any(t not in known for _, t in edges):
                raise ValueError(f"transition endpoint outside state set at {s!r}")

    def successors(self, state, symbol) -> list:
        if not isinstance(symbol, frozenset):
            symbol = frozenset(symbol)
        key = (state, symbol)
        hit = self._succ_cache.get(key)
        if hit is None:
            hit = [t for g, t in self.transitions.get(state, ())
                   if g.pos <= symbol and g.neg.isdisjoint(symbol)]
            self._succ_cache[key] = hit
        return hit

    def edges(self):
        for s in self.states:
            for g, t in self.transitions.get(s, ()):
                yield s, g, t

    def live_states(self) -> set:
        """States from which an accepting cycle is reachable."""
        if self._live is None:
            succ = {s: [t for _, t in self.transitions.get(s, ())] for s in self.states}
            self._live = _graph.live_nodes(self.states, succ, self.accepting.__contains__)
        return self._live

    def __len__(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class Lasso:
    prefix: tuple
    cycle: tuple

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("lasso cycle must be nonempty")

    def unroll(self, n: int) -> list:
        out = list(self.prefix)
        while len(out) < n:
            out.extend(self.cycle)
        return out[:n]


# ---------------------------------------------------------------------------
# Tableau translation (expand / cover-set construction)

def _key(f: Formula) -> str:
    return pretty(f)


def _desugar(f: Formula) -> Formula:
    """Rewrite F/G with U/R so the tableau only sees U, R, X, &, |, literals."""
    if isinstance(f, (Top, Atom, Not)):
        return f
    if isinstance(f, Eventually):
        return Until(Top(), _desugar(f.operand))
    if isinstance(f, Globally):
        return Release(Not(Top()), _desugar(f.operand))
    if isinstance(f, Next):
        return Next(_desugar(f.operand))
    return type(f)(_desugar(f.left), _desugar(f.right))


def _is_literal(f: Formula) -> bool:
    return isinstance(f, (Top, Atom)) or (isinstance(f, Not) and isinstance(f.operand, (Top, Atom)))


def _contradicts(lit: Formula, old: frozenset) -> bool:
    if isinstance(lit, Not):
        return isinstance(lit.operand, Top) or lit.operand in old
    return Not(lit) in old


@dataclass
class _Node:
    incoming: set
    new: set
    old: set
    next: set


def _tableau(f: Formula):
    """Return (nodes, incoming) where nodes maps id -> (old, next)."""
    nodes: dict[int, tuple[frozenset, frozenset]] = {}
    index: dict[tuple[frozenset, frozenset], int] = {}
    incoming: dict[int, set] = {}
    stack = [_Node({"init"}, {f}, set(), set())]
    while stack:
        node = stack.pop()
        if not node.new:
            sig = (frozenset(node.old), frozenset(node.next))
            if sig in index:
                incoming[index[sig]] |= node.incoming
                continue
            nid = len(nodes)
            nodes[nid] = sig
            index[sig] = nid
            incoming[nid] = set(node.incoming)
            stack.append(_Node({nid}, set(node.next), set(), set()))
            continue
        eta = min(node.new, key=_key)
        node.new.discard(eta)
        if eta in node.old:
            stack.append(node)
            continue
        if _is_literal(eta):
            if _contradicts(eta, node.old) or eta == Not(Top()):
                continue
            node.old.add(eta)
            stack.append(node)
        elif isinstance(eta, And):
            node.old.add(eta)
            node.new |= {eta.left, eta.right} - node.old
            stack.append(node)
        elif isinstance(eta, Next):
            node.old.add(eta)
            node.next.add(eta.operand)
            stack.append(node)
        elif isinstance(eta, (Or, Until, Release)):
            if isinstance(eta, Or):
                new1, next1, new2 = {eta.left}, set(), {eta.right}
            elif isinstance(eta, Until):
                new1, next1, new2 = {eta.left}, {eta}, {eta.right}
            else:
                new1, next1, new2 = {eta.right}, {eta}, {eta.left, eta.right}
            old = node.old | {eta}
            n1 = _Node(set(node.incoming), node.new | (new1 - old), set(old), node.next | next1)
            n2 = _Node(set(node.incoming), node.new | (new2 - old), set(old), set(node.next))
            # n1 is processed last so lower-numbered nodes follow the right branch first
            stack.append(n1)
            stack.append(n2)
        else:
            raise TypeError(f"unexpected subformula in tableau: {eta!r}")
    return nodes, incoming


def _subformulas(f: Formula):
    yield f
    if isinstance(f, (Not, Next)):
        yield from _subformulas(f.operand)
    elif isinstance(f, (And, Or, Until, Release)):
        yield from _subformulas(f.left)
        yield from _subformulas(f.right)


def ltl_to_buchi(f: Formula, props: Iterable[str]) -> BuchiAutomaton:
    """Translate `f` into a Buchi automaton over ``2**props``.

    Tableau to a generalized automaton (one acceptance set per Until
    subformula), then degeneralized with a counter over the acceptance sets.
    """
    props = frozenset(props)
    g = _desugar(to_nnf(f))
    nodes, incoming = _tableau(g)

    untils = sorted({h for h in _subformulas(g) if isinstance(h, Until)}, key=_key)

    def guard(nid):
        old = nodes[nid][0]
        return Guard(
            frozenset(h.name for h in old if isinstance(h, Atom)),
            frozenset(h.operand.name for h in old if isinstance(h, Not) and isinstance(h.operand, Atom)),
        )

    def in_set(nid, u):
        old = nodes[nid][0]
        return u.right in old or u not in old

    # successors of each tableau node (and of the pseudo initial node)
    succ: dict = {"init": []}
    for nid in nodes:
        succ.setdefault(nid, [])
    for nid in sorted(nodes):
        for src in sorted(incoming[nid], key=lambda s: (-1,) if s == "init" else (s,)):
            succ[src].append(nid)

    k = len(untils)
    guards = {nid: guard(nid) for nid in nodes}
    start = ("init", 0)
    states = [start]
    seen = {start}
    transitions: dict = {}
    accepting = set()
    queue = [start]
    while queue:
        state = queue.pop(0)
        node, level = state
        if k == 0:
            nxt_level = 0
        elif node != "init" and in_set(node, untils[level]):
            nxt_level = (level + 1) % k
        else:
            nxt_level = level
        edges = []
        for t in succ[node]:
            tgt = (t, nxt_level)
            edges.append((guards[t], tgt))
            if tgt not in seen:
                seen.add(tgt)
                states.append(tgt)
                queue.append(tgt)
        transitions[state] = edges
        if node != "init" and (k == 0 or (level == 0 and in_set(node, untils[0]))):
            accepting.add(state)

    # rename to compact string states for readability
    names = {s: "init" if s[0] == "init" else f"n{s[0]}.{s[1]}" for s in states}
    return BuchiAutomaton(
        props=props,
        states=[names[s] for s in states],
        initial=[names[start]],
        transitions={names[s]: [(gd, names[t]) for gd, t in transitions[s]] for s in states},
        accepting=frozenset(names[s] for s in accepting),
        formula=f,
    )


# ---------------------------------------------------------------------------
# Queries

def _lasso_product(B: BuchiAutomaton, prefix: Sequence, cycle: Sequence):
    word = [frozenset(s) for s in list(prefix) + list(cycle)]
    n, p = len(word), len(prefix)
    sources = [(0, s) for s in B.initial]
    adj: dict = {}
    stack = list(sources)
    while stack:
        node = stack.pop()
        if node in adj:
            continue
        pos, s = node
        nxt = pos + 1 if pos + 1 < n else p
        out = [(nxt, t) for t in B.successors(s, word[pos])]
        adj[node] = out
        stack.extend(m for m in out if m not in adj)
    return sources, adj


def accepts_lasso(B: BuchiAutomaton, prefix: Sequence, cycle: Sequence) -> bool:
    """Whether ``prefix . cycle^omega`` is in the language of `B`."""
    if len(cycle) == 0:
        raise ValueError("lasso cycle must be nonempty")
    _, adj = _lasso_product(B, prefix, cycle)
    acc = B.accepting
    return any(
        any(node[1] in acc for node in comp)
        for comp in _graph.cyclic_components(list(adj), adj)
    )


def find_accepting_lasso(B: BuchiAutomaton) -> tuple[Lasso, Lasso] | None:
    """Return ``(word, run)`` lassos witnessing a nonempty language, or None.

    Each word symbol is the minimal set satisfying the guard taken.
    """
    succ = {s: [t for _, t in B.transitions.get(s, ())] for s in B.states}
    found = _graph.find_lasso(B.initial, succ, B.accepting.__contains__)
    if found is None:
        return None
    stem, cycle = found
    run = list(stem) + list(cycle) + [cycle[0]]
    symbols = []
    for s, t in zip(run, run[1:]):
        g = next(g for g, u in B.transitions[s] if u == t)
        symbols.append(g.pos)
    p = len(stem)
    return Lasso(tuple(symbols[:p]), tuple(symbols[p:])), Lasso(tuple(stem), tuple(cycle))


def is_empty(B: BuchiAutomaton) -> bool:
    return find_accepting_lasso(B) is None


def intersect(B1: BuchiAutomaton, B2: BuchiAutomaton) -> BuchiAutomaton:
    """Product automaton for the intersection (two-copy acceptance tracking)."""
    props = B1.props | B2.props
    start = [(s1, s2, 1) for s1 in B1.initial for s2 in B2.initial]
    states, seen, transitions, accepting = [], set(), {}, set()
    queue = list(start)
    seen.update(start)
    while queue:
        st = queue.pop(0)
        states.append(st)
        s1, s2, c = st
        if c == 1 and s1 in B1.accepting:
            accepting.add(st)
            nc = 2
        elif c == 2 and s2 in B2.accepting:
            nc = 1
        else:
            nc = c
        edges = []
        for g1, t1 in B1.transitions.get(s1, ()):
            for g2, t2 in B2.transitions.get(s2, ()):
                g = g1.conjoin(g2)
                if g is None:
                    continue
                tgt = (t1, t2, nc)
                edges.append((g, tgt))
                if tgt not in seen:
                    seen.add(tgt)
                    queue.append(tgt)
        transitions[st] = edges
    return BuchiAutomaton(props, states, start, transitions, frozenset(accepting))


def prefix_feasible(B: BuchiAutomaton, word: Sequence) -> bool:
    """Whether some continuation of the finite `word` is accepted by `B`."""
    live = B.live_states()
    current = {s for s in B.initial}
    for sym in word:
        sym = frozenset(sym)
        current = {t for s in current for t in B.successors(s, sym)}
        current &= live
        if not current:
            return False
    return bool(current & live)


def to_dot(B: BuchiAutomaton, name: str = "buchi") -> str:
    ids = {s: i for i, s in enumerate(B.states)}
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point];']
    for s in B.states:
        shape = "doublecircle" if s in B.accepting else "circle"
        lines.append(f'  s{ids[s]} [label="{s}", shape={shape}];')
    for s in B.initial:
        lines.append(f"  __start -> s{ids[s]};")
    for s, g, t in B.edges():
        lines.append(f'  s{ids[s]} -> s{ids[t]} [label="{g.label()}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def all_symbols(props: Sequence[str]) -> list[frozenset]:
    """Every subset of `props`, smallest first, in a stable order."""
    props = sorted(props)
    out = []
    for r in range(len(props) + 1):
        out.extend(frozenset(c) for c in itertools.combinations(props, r))
    return out
