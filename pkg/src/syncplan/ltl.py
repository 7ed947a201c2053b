"""LTL formulas: AST, parser, negation normal form."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Iterator

__all__ = [
    "Formula", "Top", "Atom", "Not", "And", "Or", "Next", "Until", "Release",
    "Eventually", "Globally", "LTLSyntaxError", "UnknownAtomError",
    "parse_ltl", "negate", "to_nnf", "pretty", "atoms", "size", "conjuncts",
    "is_nnf",
]


@dataclass(frozen=True)
class Formula:
    def __and__(self, other: "Formula") -> "Formula":
        return And(self, other)

    def __or__(self, other: "Formula") -> "Formula":
        return Or(self, other)

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True)
class Globally(Formula):
    operand: Formula


FALSE = Not(Top())

_UNARY = {"!": Not, "X": Next, "F": Eventually, "G": Globally}
_KEYWORDS = {"true", "false", "X", "F", "G", "U", "R"}


class LTLSyntaxError(ValueError):
    def __init__(self, text: str, position: int, expected: Iterable[str]):
        self.text = text
        self.position = position
        self.expected = tuple(expected)
        found = text[position:position + 10] or "end of input"
        super().__init__(
            f"syntax error at position {position} (near {found!r}); "
            f"expected one of: {', '.join(self.expected)}"
        )


class UnknownAtomError(ValueError):
    def __init__(self, name: str, position: int, props: Iterable[str]):
        self.name = name
        self.position = position
        super().__init__(
            f"unknown proposition {name!r} at position {position}; "
            f"declared: {', '.join(sorted(props))}"
        )


_TOKEN = re.compile(r"\s*(?:(->)|([!&|()])|([A-Za-z][A-Za-z0-9_]*))")


def _tokenize(text: str) -> list[tuple[str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if m is None:
            start = pos + len(text[pos:]) - len(text[pos:].lstrip())
            raise LTLSyntaxError(text, start, ["operator", "identifier", "("])
        tok = m.group(1) or m.group(2) or m.group(3)
        tokens.append((tok, m.start(m.lastindex)))
        pos = m.end()
    tokens.append(("", len(text)))
    return tokens


class _Parser:
    # impl := or ("->" impl)?   or := and ("|" and)*   and := bin ("&" bin)*
    # bin := unary (("U"|"R") bin)?   unary := ("!"|"X"|"F"|"G") unary | atom

    def __init__(self, text: str, props: frozenset[str]):
        self.text = text
        self.props = props
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def pos(self) -> int:
        return self.tokens[self.i][1]

    def take(self) -> str:
        tok = self.tokens[self.i][0]
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implication()
        if self.peek() != "":
            raise LTLSyntaxError(self.text, self.pos(), ["&", "|", "->", "U", "R", "end of input"])
        return f

    def implication(self) -> Formula:
        lhs = self.disjunction()
        if self.peek() == "->":
            self.take()
            return Or(Not(lhs), self.implication())
        return lhs

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.binary()
        while self.peek() == "&":
            self.take()
            f = And(f, self.binary())
        return f

    def binary(self) -> Formula:
        lhs = self.unary()
        op = self.peek()
        if op in ("U", "R"):
            self.take()
            rhs = self.binary()
            return Until(lhs, rhs) if op == "U" else Release(lhs, rhs)
        return lhs

    def unary(self) -> Formula:
        tok, pos = self.tokens[self.i]
        if tok in _UNARY:
            self.take()
            return _UNARY[tok](self.unary())
        if tok == "(":
            self.take()
            f = self.implication()
            if self.peek() != ")":
                raise LTLSyntaxError(self.text, self.pos(), [")", "&", "|", "->", "U", "R"])
            self.take()
            return f
        if tok == "true":
            self.take()
            return Top()
        if tok == "false":
            self.take()
            return FALSE
        if tok and tok not in _KEYWORDS and tok[0].isalpha():
            if tok not in self.props:
                raise UnknownAtomError(tok, pos, self.props)
            self.take()
            return Atom(tok)
        raise LTLSyntaxError(self.text, pos, ["true", "identifier", "!", "X", "F", "G", "("])


def parse_ltl(text: str, props: Iterable[str]) -> Formula:
    """Parse `text` into a formula whose atoms must all be in `props`.

    Precedence, tightest first: unary (``! X F G``), ``U``/``R`` (right
    associative), ``&``, ``|``, ``->`` (right associative, desugared to
    ``!a | b``).
    """
    props = frozenset(props)
    if not props:
        raise ValueError("proposition set must be nonempty")
    return _Parser(text, props).parse()


def negate(f: Formula) -> Formula:
    return Not(f)


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms (``!true`` is kept as the constant false)."""
    if isinstance(f, (Top, Atom)):
        return f
    if isinstance(f, Not):
        return _negated_nnf(f.operand)
    if isinstance(f, (Next, Eventually, Globally)):
        return type(f)(to_nnf(f.operand))
    return type(f)(to_nnf(f.left), to_nnf(f.right))


def _negated_nnf(f: Formula) -> Formula:
    if isinstance(f, (Top, Atom)):
        return Not(f)
    if isinstance(f, Not):
        return to_nnf(f.operand)
    if isinstance(f, And):
        return Or(_negated_nnf(f.left), _negated_nnf(f.right))
    if isinstance(f, Or):
        return And(_negated_nnf(f.left), _negated_nnf(f.right))
    if isinstance(f, Next):
        return Next(_negated_nnf(f.operand))
    if isinstance(f, Until):
        return Release(_negated_nnf(f.left), _negated_nnf(f.right))
    if isinstance(f, Release):
        return Until(_negated_nnf(f.left), _negated_nnf(f.right))
    if isinstance(f, Eventually):
        return Globally(_negated_nnf(f.operand))
    if isinstance(f, Globally):
        return Eventually(_negated_nnf(f.operand))
    raise TypeError(f"not a formula: {f!r}")


def is_nnf(f: Formula) -> bool:
    return all(
        not isinstance(g, Not) or isinstance(g.operand, (Atom, Top))
        for g in subformulas(f)
    )


def subformulas(f: Formula) -> Iterator[Formula]:
    yield f
    if isinstance(f, (Not, Next, Eventually, Globally)):
        yield from subformulas(f.operand)
    elif isinstance(f, (And, Or, Until, Release)):
        yield from subformulas(f.left)
        yield from subformulas(f.right)


def atoms(f: Formula) -> set[str]:
    return {g.name for g in subformulas(f) if isinstance(g, Atom)}


def size(f: Formula) -> int:
    """Node count, used as |phi| in complexity reports."""
    return sum(1 for _ in subformulas(f))


def conjuncts(f: Formula) -> list[Formula]:
    """Flatten a top-level conjunction, left to right."""
    if isinstance(f, And):
        return conjuncts(f.left) + conjuncts(f.right)
    return [f]


_BIN_SYM = {And: "&", Or: "|", Until: "U", Release: "R"}
_UN_SYM = {Not: "!", Next: "X ", Eventually: "F ", Globally: "G "}


def pretty(f: Formula) -> str:
    """Render in the concrete grammar; binary nodes are always parenthesized."""
    if isinstance(f, Top):
        return "true"
    if isinstance(f, Atom):
        return f.name
    if type(f) in _UN_SYM:
        return _UN_SYM[type(f)] + pretty(f.operand)
    if type(f) in _BIN_SYM:
        return f"({pretty(f.left)} {_BIN_SYM[type(f)]} {pretty(f.right)})"
    raise TypeError(f"not a formula: {f!r}")
