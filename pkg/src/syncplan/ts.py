"""Weighted transition systems: one robot's motion model.

Native text format (``#`` starts a comment)::

    name: T1              # optional
    props: r1P pi
    states: a b
    init: a
    edges:
      a b 2               # source target weight (positive integer)
      b a 2
    labels:
      b: r1P pi           # states without a line carry no propositions

``props``, ``states`` and ``init`` take their values on the header line;
``edges`` and ``labels`` take one entry per following line.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

__all__ = [
    "TransitionSystem", "TSFormatError", "load_ts", "load_ts_file", "dump_ts",
    "export_dot", "validate_run",
]


class TSFormatError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


@dataclass(frozen=True)
class TransitionSystem:
    states: tuple[str, ...]
    initial: str
    weights: Mapping[tuple[str, str], int]
    labels: Mapping[str, frozenset]
    props: tuple[str, ...]
    name: str = "T"
    _succ: dict = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        known = set(self.states)
        if len(known) != len(self.states):
            raise TSFormatError("duplicate state names")
        if self.initial not in known:
            raise TSFormatError(f"initial state {self.initial!r} is not declared")
        for (u, v), w in self.weights.items():
            if u not in known or v not in known:
                raise TSFormatError(f"edge {u}->{v} references an undeclared state")
            if isinstance(w, bool) or not isinstance(w, int):
                raise TSFormatError(f"edge {u}->{v}: non-integer weight {w!r}")
            if w < 1:
                raise TSFormatError(f"edge {u}->{v}: non-positive weight {w}")
        for s, lab in self.labels.items():
            if s not in known:
                raise TSFormatError(f"label for undeclared state {s!r}")
            extra = set(lab) - set(self.props)
            if extra:
                raise TSFormatError(f"state {s!r}: undeclared proposition(s) {sorted(extra)}")
        succ = {s: [] for s in self.states}
        for (u, v) in self.weights:
            succ[u].append(v)
        dead = [s for s in self.states if not succ[s]]
        if dead:
            raise TSFormatError(f"state(s) without outgoing edge: {dead}")
        object.__setattr__(self, "_succ", succ)
        object.__setattr__(self, "labels", {s: frozenset(self.labels.get(s, ())) for s in self.states})

    def successors(self, state: str) -> list[str]:
        return self._succ[state]

    def weight(self, u: str, v: str) -> int:
        return self.weights[(u, v)]

    def label(self, state: str) -> frozenset:
        return self.labels[state]

    @property
    def edges(self) -> list[tuple[str, str]]:
        return list(self.weights)

    @property
    def max_weight(self) -> int:
        return max(self.weights.values())

    def iter_edges(self):
        for (u, v), w in self.weights.items():
            yield u, v, w


def load_ts(text: str, name: str | None = None) -> TransitionSystem:
    sections: dict[str, list[tuple[int, str]]] = {}
    current = None
    inline = {"name", "props", "states", "init"}
    block = {"edges", "labels"}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, sep, rest = line.partition(":")
        key = head.strip().lower()
        if sep and key in inline | block and " " not in head.strip():
            if key in sections:
                raise TSFormatError(f"duplicate section {key!r}", lineno)
            sections[key] = []
            current = key
            if rest.strip():
                if key in block:
                    raise TSFormatError(f"section {key!r} takes entries on following lines", lineno)
                sections[key].append((lineno, rest.strip()))
            continue
        if current not in block:
            raise TSFormatError(f"unexpected content {line!r}", lineno)
        sections[current].append((lineno, line))

    for key in ("props", "states", "init", "edges"):
        if key not in sections:
            raise TSFormatError(f"missing section {key!r}")

    def words(key):
        return [w for _, text in sections.get(key, []) for w in text.split()]

    props = words("props")
    states = words("states")
    init = words("init")
    if len(init) != 1:
        raise TSFormatError("init takes exactly one state")
    known = set(states)

    weights: dict[tuple[str, str], int] = {}
    for lineno, entry in sections["edges"]:
        parts = entry.split()
        if len(parts) != 3:
            raise TSFormatError("edge entries are 'source target weight'", lineno)
        u, v, w = parts
        for s in (u, v):
            if s not in known:
                raise TSFormatError(f"dangling state reference {s!r}", lineno)
        try:
            weight = int(w)
        except ValueError:
            raise TSFormatError(f"non-integer weight {w!r}", lineno) from None
        if weight < 1:
            raise TSFormatError(f"non-positive weight {weight}", lineno)
        if (u, v) in weights:
            raise TSFormatError(f"duplicate edge {u} {v}", lineno)
        weights[(u, v)] = weight

    labels: dict[str, frozenset] = {}
    for lineno, entry in sections.get("labels", []):
        state, sep, rest = entry.partition(":")
        state = state.strip()
        if not sep:
            raise TSFormatError("label entries are 'state: prop ...'", lineno)
        if state not in known:
            raise TSFormatError(f"dangling state reference {state!r}", lineno)
        lab = rest.split()
        bad = [p for p in lab if p not in props]
        if bad:
            raise TSFormatError(f"label proposition not declared: {bad}", lineno)
        labels[state] = labels.get(state, frozenset()) | frozenset(lab)

    ts_name = name or (words("name")[0] if words("name") else "T")
    return TransitionSystem(tuple(states), init[0], weights, labels, tuple(props), ts_name)


def load_ts_file(path: str | Path) -> TransitionSystem:
    path = Path(path)
    return load_ts(path.read_text(), name=None)


def dump_ts(ts: TransitionSystem) -> str:
    lines = [
        f"name: {ts.name}",
        f"props: {' '.join(ts.props)}",
        f"states: {' '.join(ts.states)}",
        f"init: {ts.initial}",
        "edges:",
    ]
    lines += [f"  {u} {v} {w}" for u, v, w in ts.iter_edges()]
    lines.append("labels:")
    lines += [f"  {s}: {' '.join(p for p in ts.props if p in ts.labels[s])}"
              for s in ts.states if ts.labels[s]]
    return "\n".join(lines) + "\n"


def _quote(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def export_dot(system, name: str | None = None, highlight: Iterable[str] = ()) -> str:
    """Deterministic DOT rendering of a transition system or region automaton.

    Works on anything exposing ``states``, ``initial``, ``iter_edges()`` and
    ``label(state)``. Nodes listed in `highlight` are filled.
    """
    name = name or getattr(system, "name", "T")
    highlight = set(highlight)
    lines = [f"digraph {_quote(name)} {{", "  rankdir=LR;", "  node [shape=ellipse];"]
    for s in system.states:
        lab = sorted(system.label(s))
        text = s if not lab else f"{s}\\n{{{', '.join(lab)}}}"
        attrs = [f"label={_quote(text)}"]
        if s == system.initial:
            attrs.append("peripheries=2")
        if s in highlight:
            attrs.append('style=filled, fillcolor="lightblue"')
        lines.append(f"  {_quote(s)} [{', '.join(attrs)}];")
    for u, v, w in system.iter_edges():
        color = ", color=red" if w == 0 else ""
        lines.append(f"  {_quote(u)} -> {_quote(v)} [label={_quote(w)}{color}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def validate_run(ts: TransitionSystem, run: Sequence[str]) -> bool:
    """True when `run` starts at the initial state and follows transitions."""
    if not run or run[0] != ts.initial:
        return False
    return all((u, v) in ts.weights for u, v in zip(run, run[1:]))
