"""Distributions, word projections and the trace-closedness gate.

A distribution splits the proposition set into (possibly overlapping) parts,
one per robot. Two symbols are independent when no part sees both of them;
swapping adjacent independent symbols leaves every projection unchanged, so
a specification that is robust to timing perturbation must be closed under
such swaps.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .buchi import (
    BuchiAutomaton, Guard, Lasso, accepts_lasso, all_symbols,
    find_accepting_lasso, intersect, ltl_to_buchi,
)
from .ltl import Formula, Not, atoms

__all__ = [
    "Distribution", "project_word", "independent", "trace_equivalent",
    "TraceWitness", "TraceVerdict", "one_swap_automaton", "check_trace_closed",
]


@dataclass(frozen=True)
class Distribution:
    """Ordered cover ``[Pi_1, ..., Pi_m]`` of the proposition set."""
    parts: tuple[frozenset, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(frozenset(p) for p in self.parts))
        if not self.parts:
            raise ValueError("a distribution needs at least one part")

    @property
    def props(self) -> frozenset:
        return frozenset().union(*self.parts)

    def covers(self, props: Iterable[str]) -> bool:
        return frozenset(props) <= self.props

    def __len__(self) -> int:
        return len(self.parts)


def project_word(word: Sequence[Iterable[str]], part: Iterable[str]) -> list[frozenset]:
    """Restrict each symbol to `part`, dropping symbols that become empty."""
    part = frozenset(part)
    out = []
    for sym in word:
        kept = frozenset(sym) & part
        if kept:
            out.append(kept)
    return out


def independent(s1: Iterable[str], s2: Iterable[str], d: Distribution) -> bool:
    s1, s2 = frozenset(s1), frozenset(s2)
    return not any(s1 & p and s2 & p for p in d.parts)


def trace_equivalent(w1: Sequence, w2: Sequence, d: Distribution) -> bool:
    return all(project_word(w1, p) == project_word(w2, p) for p in d.parts)


@dataclass(frozen=True)
class TraceWitness:
    """A critical word: `word` satisfies the formula, `swapped` does not.

    `swapped` is `word` with the prefix symbols at ``position`` and
    ``position + 1`` exchanged; both share the same cycle.
    """
    word: Lasso
    swapped: Lasso
    position: int

    def render(self) -> str:
        def fmt(seq):
            return " ".join("{" + ",".join(sorted(s)) + "}" for s in seq)
        return (f"w  = {fmt(self.word.prefix)} ({fmt(self.word.cycle)})^w\n"
                f"w' = {fmt(self.swapped.prefix)} ({fmt(self.swapped.cycle)})^w\n"
                f"swap at positions {self.position}, {self.position + 1}")


@dataclass(frozen=True)
class TraceVerdict:
    closed: bool
    witness: TraceWitness | None = None

    def __bool__(self) -> bool:
        return self.closed


def one_swap_automaton(B: BuchiAutomaton, d: Distribution,
                       symbols: Sequence[frozenset]) -> BuchiAutomaton:
    """Automaton for words obtained from L(B) by one adjacent independent swap.

    States are ``("pre", b)`` before the swap, ``("pend", b, c)`` after
    reading the first symbol ``c`` of the swapped pair, and ``("post", b)``
    once the pair has been fed to `B` in its original order. Every guard is
    exact, so the language is over the concrete `symbols` only.
    """
    props = B.props
    symbols = [frozenset(s) for s in symbols]
    guards = {s: Guard.exact(s, props) for s in symbols}
    start = [("pre", b) for b in B.initial]
    states, seen, transitions = [], set(start), {}
    queue = list(start)
    while queue:
        st = queue.pop(0)
        states.append(st)
        edges = []
        if st[0] in ("pre", "post"):
            b = st[1]
            for c in symbols:
                for t in B.successors(b, c):
                    edges.append((guards[c], (st[0], t)))
                if st[0] == "pre":
                    edges.append((guards[c], ("pend", b, c)))
        else:
            _, b, c = st
            for a in symbols:
                if a == c or not independent(a, c, d):
                    continue
                for t1 in B.successors(b, a):
                    for t2 in B.successors(t1, c):
                        edges.append((guards[a], ("post", t2)))
        dedup = list(dict.fromkeys(edges))
        transitions[st] = dedup
        for _, t in dedup:
            if t not in seen:
                seen.add(t)
                queue.append(t)
    accepting = frozenset(s for s in states if s[0] != "pend" and s[1] in B.accepting)
    return BuchiAutomaton(props, states, start, transitions, accepting)


def check_trace_closed(f: Formula, d: Distribution, props: Iterable[str] | None = None,
                       alphabet: str = "subsets") -> TraceVerdict:
    """Decide closure of L(f) under one adjacent independent swap.

    `alphabet` is ``"subsets"`` (every subset of the propositions) or
    ``"singletons"`` (the empty symbol plus one-proposition symbols, which is
    what a serialized region automaton emits). A not-closed verdict carries a
    witness pair that has been re-checked against B(f).
    """
    props = sorted(set(props) if props is not None else (atoms(f) | d.props))
    if alphabet == "subsets":
        symbols = all_symbols(props)
    elif alphabet == "singletons":
        symbols = [frozenset()] + [frozenset([p]) for p in props]
    else:
        raise ValueError(f"unknown alphabet {alphabet!r}")
    B = ltl_to_buchi(f, props)
    Bneg = ltl_to_buchi(Not(f), props)
    found = find_accepting_lasso(intersect(one_swap_automaton(B, d, symbols), Bneg))
    if found is None:
        return TraceVerdict(True)
    word, run = found
    swapped = Lasso(tuple(word.prefix), tuple(word.cycle))
    pend = next(i for i, st in enumerate(run.prefix) if st[0][0] == "pend")
    k = pend - 1
    pre = list(swapped.prefix)
    pre[k], pre[k + 1] = pre[k + 1], pre[k]
    original = Lasso(tuple(pre), swapped.cycle)
    if not accepts_lasso(B, original.prefix, original.cycle) or \
            accepts_lasso(B, swapped.prefix, swapped.cycle):
        raise AssertionError("internal error: trace witness failed re-verification")
    return TraceVerdict(False, TraceWitness(original, swapped, k))
