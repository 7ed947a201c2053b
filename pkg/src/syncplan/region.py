"""Region automaton of a robot team and its serialization.

A region state records, for every robot, the edge it is traversing and the
integer time already spent on it. From a state, the robots with the least
remaining time finish their edges together and choose next edges; everyone
else's clock advances by that amount.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .ts import TransitionSystem

__all__ = [
    "RegionState", "RegionAutomaton", "build_region_automaton",
    "serialize_region_automaton", "state_count_bound", "INIT", "SYNC",
]

INIT = "init"
SYNC = "Sync"


@dataclass(frozen=True)
class RegionState:
    pairs: tuple[tuple[str, str], ...]
    clocks: tuple[int, ...]

    @property
    def name(self) -> str:
        def pair(u, v):
            return u + v if len(u) == 1 and len(v) == 1 else f"{u}-{v}"
        edges = ",".join(pair(u, v) for u, v in self.pairs)
        clocks = ",".join(str(x) for x in self.clocks)
        return f"({edges}),({clocks})"

    @property
    def synchronized(self) -> bool:
        return not any(self.clocks)

    def at_vertex(self, i: int) -> bool:
        return self.clocks[i] == 0

    def vertex(self, i: int) -> str:
        return self.pairs[i][0]


@dataclass(frozen=True)
class RegionAutomaton:
    """Weighted transition system over region states.

    States are canonical names; `region` maps every name except the virtual
    initial state to its `RegionState`. In a serialized automaton, a state
    with several propositions is a chain ``name#1 .. name#k``; `origin` maps
    each chain copy back to the unserialized name.
    """
    states: tuple[str, ...]
    initial: str
    weights: dict
    labels: dict
    props: tuple[str, ...]
    region: dict
    robots: int
    serialized: bool = False
    origin: dict = field(default_factory=dict)
    name: str = "R"
    _succ: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        succ = {s: [] for s in self.states}
        for (u, v) in self.weights:
            succ[u].append(v)
        object.__setattr__(self, "_succ", succ)

    def successors(self, state: str) -> list[str]:
        return self._succ[state]

    def weight(self, u: str, v: str) -> int:
        return self.weights[(u, v)]

    def label(self, state: str) -> frozenset:
        return self.labels[state]

    def iter_edges(self):
        for (u, v), w in self.weights.items():
            yield u, v, w

    @property
    def sync_states(self) -> list[str]:
        return [s for s in self.states if SYNC in self.labels[s]]

    def __len__(self) -> int:
        return len(self.states)


def _label(robots: Sequence[TransitionSystem], rs: RegionState) -> frozenset:
    # Only robots sitting on a vertex (clock 0) contribute their propositions.
    out = set()
    for i, ts in enumerate(robots):
        if rs.at_vertex(i):
            out |= ts.label(rs.vertex(i))
    return frozenset(out)


def build_region_automaton(robots: Sequence[TransitionSystem], name: str = "R") -> RegionAutomaton:
    if not robots:
        raise ValueError("need at least one robot")
    m = len(robots)

    def start_edges(ts, q):
        return [(q, t) for t in ts.successors(q)]

    starts = [RegionState(tuple(p), (0,) * m)
              for p in itertools.product(*(start_edges(ts, ts.initial) for ts in robots))]
    region: dict[str, RegionState] = {}
    weights: dict[tuple[str, str], int] = {}
    order = [INIT]
    queue = deque()
    for rs in starts:
        region[rs.name] = rs
        order.append(rs.name)
        weights[(INIT, rs.name)] = 0
        queue.append(rs)
    while queue:
        rs = queue.popleft()
        remaining = [robots[i].weight(*rs.pairs[i]) - rs.clocks[i] for i in range(m)]
        d = min(remaining)
        movers = [i for i in range(m) if remaining[i] == d]
        options = []
        for i in range(m):
            if i in movers:
                q = rs.pairs[i][1]
                options.append([((q, t), 0) for t in robots[i].successors(q)])
            else:
                options.append([(rs.pairs[i], rs.clocks[i] + d)])
        for combo in itertools.product(*options):
            nxt = RegionState(tuple(p for p, _ in combo), tuple(x for _, x in combo))
            assert all(isinstance(x, int) for x in nxt.clocks)
            if nxt.name not in region:
                region[nxt.name] = nxt
                order.append(nxt.name)
                queue.append(nxt)
            weights[(rs.name, nxt.name)] = d
    labels = {INIT: frozenset()}
    labels.update({s: _label(robots, region[s]) for s in order[1:]})
    props = tuple(dict.fromkeys(p for ts in robots for p in ts.props))
    return RegionAutomaton(tuple(order), INIT, weights, labels, props, region, m, name=name)


def serialize_region_automaton(R: RegionAutomaton, order: Iterable[str] | None = None) -> RegionAutomaton:
    """Add Sync to synchronized states and split multi-proposition states.

    `order` fixes the sequence in which a chain emits its propositions; it
    defaults to the automaton's proposition order followed by Sync.
    """
    if R.serialized:
        raise ValueError("automaton is already serialized")
    order = list(order) if order is not None else list(R.props) + [SYNC]
    if SYNC not in order:
        order.append(SYNC)
    rank = {p: i for i, p in enumerate(order)}

    labels0 = {}
    for s in R.states:
        lab = set(R.labels[s])
        if s != R.initial and R.region[s].synchronized:
            lab.add(SYNC)
        missing = lab - rank.keys()
        if missing:
            raise ValueError(f"serialization order lacks propositions {sorted(missing)}")
        labels0[s] = sorted(lab, key=rank.__getitem__)

    chain: dict[str, list[str]] = {}
    states, labels, region, origin = [], {}, {}, {}
    for s in R.states:
        lab = labels0[s]
        copies = [s] if len(lab) <= 1 else [f"{s}#{k}" for k in range(1, len(lab) + 1)]
        chain[s] = copies
        for k, c in enumerate(copies):
            states.append(c)
            labels[c] = frozenset(lab[k:k + 1]) if len(copies) > 1 else frozenset(lab)
            origin[c] = s
            if s != R.initial:
                region[c] = R.region[s]
    weights = {}
    for s in R.states:
        copies = chain[s]
        for a, b in zip(copies, copies[1:]):
            weights[(a, b)] = 0
    for (u, v), w in R.weights.items():
        weights[(chain[u][-1], chain[v][0])] = w
    props = tuple(p for p in order if p in set(R.props) | {SYNC})
    return RegionAutomaton(tuple(states), R.initial, weights, labels, props, region,
                           R.robots, serialized=True, origin=origin, name=R.name + "_ser")


def state_count_bound(robots: Sequence[TransitionSystem]) -> int:
    """Upper bound on the number of region states (plus the initial state)."""
    edges = math.prod(len(ts.weights) for ts in robots)
    W = [ts.max_weight for ts in robots]
    return edges * (math.prod(W) - math.prod(w - 1 for w in W)) + 1
