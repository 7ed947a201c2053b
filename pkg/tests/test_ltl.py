import random

import pytest
from hypothesis import given, settings, strategies as st

from oracles import eval_lasso, random_formula
from syncplan.ltl import (
    And, Atom, Eventually, Globally, LTLSyntaxError, Next, Not, Or, Release, Top,
    UnknownAtomError, Until, atoms, conjuncts, is_nnf, negate, parse_ltl, pretty, size, to_nnf,
)

AB = ["a", "b", "c"]


def test_parse_gf():
    assert parse_ltl("G F pi", {"pi"}) == Globally(Eventually(Atom("pi")))


def test_parse_sync_shape():
    f = parse_ltl("phi1 & G F pi & G F Sync", {"phi1", "pi", "Sync"})
    gf = lambda p: Globally(Eventually(Atom(p)))
    assert f == And(And(Atom("phi1"), gf("pi")), gf("Sync"))


def test_parse_upload_rule():
    f = parse_ltl("G(r1u -> X(!r1u U r1g))", {"r1u", "r1g"})
    expected = Globally(Or(Not(Atom("r1u")), Next(Until(Not(Atom("r1u")), Atom("r1g")))))
    assert f == expected


def test_precedence():
    f = parse_ltl("a | b & c U a", AB)
    assert f == Or(Atom("a"), And(Atom("b"), Until(Atom("c"), Atom("a"))))
    assert parse_ltl("a U b U c", AB) == Until(Atom("a"), Until(Atom("b"), Atom("c")))
    assert parse_ltl("!a U b", AB) == Until(Not(Atom("a")), Atom("b"))
    assert parse_ltl("a -> b -> c", AB) == Or(Not(Atom("a")), Or(Not(Atom("b")), Atom("c")))


def test_constants():
    assert parse_ltl("true", AB) == Top()
    assert parse_ltl("false", AB) == Not(Top())


@pytest.mark.parametrize("text, pos", [("a &", 3), ("(a", 2), ("a b", 2), ("G", 1), ("a $ b", 2)])
def test_syntax_errors(text, pos):
    with pytest.raises(LTLSyntaxError) as info:
        parse_ltl(text, AB)
    assert info.value.position == pos
    assert info.value.expected


def test_unknown_atom():
    with pytest.raises(UnknownAtomError) as info:
        parse_ltl("G F zz", AB)
    assert info.value.name == "zz" and info.value.position == 4


def test_empty_props_rejected():
    with pytest.raises(ValueError):
        parse_ltl("true", set())


def test_nnf_dualities():
    a, b = Atom("a"), Atom("b")
    assert to_nnf(Not(Until(a, b))) == Release(Not(a), Not(b))
    assert to_nnf(Not(Globally(a))) == Eventually(Not(a))
    assert str(to_nnf(negate(parse_ltl("G F pi", {"pi"})))) == "F G !pi"
    assert to_nnf(negate(Top())) == Not(Top())


def test_helpers():
    f = parse_ltl("G F a & (b U c) & X a", AB)
    assert atoms(f) == {"a", "b", "c"}
    assert len(conjuncts(f)) == 3
    assert size(Atom("a")) == 1 and size(f) == 10


formulas = st.builds(lambda seed, d: random_formula(random.Random(seed), AB, d),
                     st.integers(0, 10**6), st.integers(0, 4))


@given(formulas)
def test_pretty_round_trip(f):
    assert parse_ltl(pretty(f), AB) == f


@given(formulas)
def test_nnf_idempotent_and_normal(f):
    g = to_nnf(f)
    assert is_nnf(g)
    assert to_nnf(g) == g


symbol = st.frozensets(st.sampled_from(AB))


@settings(max_examples=200)
@given(formulas, st.lists(symbol, max_size=4), st.lists(symbol, min_size=1, max_size=4))
def test_nnf_preserves_semantics(f, prefix, cycle):
    assert eval_lasso(f, prefix, cycle) == eval_lasso(to_nnf(f), prefix, cycle)


@given(formulas, st.lists(symbol, max_size=3), st.lists(symbol, min_size=1, max_size=3))
def test_double_negation(f, prefix, cycle):
    assert eval_lasso(negate(negate(f)), prefix, cycle) == eval_lasso(f, prefix, cycle)
