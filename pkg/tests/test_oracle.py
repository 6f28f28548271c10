"""The judge must be right before it judges: hand-computed facts only."""
from oracle import Undecidable, holds, search_model, subsets, val

import pytest
from setsolve.formulas import C, Neg, conj, disj
from setsolve.parser import parse_formula
from setsolve.terms import CP, EMPTY, Atom, Int, Interval, Pair, Var, mkset


def ints(*ns):
    return mkset([Int(n) for n in ns])


def rel(*ps):
    return mkset([Pair(Int(a), Int(b)) for a, b in ps])


def test_value_of_sets_ignores_order_and_repeats():
    assert val(ints(1, 2, 2), {}) == val(ints(2, 1), {})
    assert val(EMPTY, {}) == frozenset()
    assert val(Interval(Int(1), Int(3)), {}) == frozenset({1, 2, 3})
    assert val(Interval(Int(3), Int(1)), {}) == frozenset()
    assert val(CP(ints(1), ints(2, 3)), {}) == frozenset({(1, 2), (1, 3)})


def test_atoms_strings_and_ints_are_distinct():
    from setsolve.terms import Str
    assert val(Atom("x"), {}) != val(Str("x"), {})
    assert val(Int(1), {}) != val(Atom("1"), {})


def test_union_membership_and_equality():
    assert holds(C("un", ints(1, 2), ints(2, 3), ints(1, 2, 3)))
    assert not holds(C("un", ints(1, 2), ints(2, 3), ints(1, 2)))
    assert holds(C("nun", ints(1), ints(2), ints(1)))
    assert holds(C("in", Int(2), ints(1, 2)))
    assert holds(C("nin", Int(5), ints(1, 2)))
    assert holds(C("eq", ints(1, 2, 2), ints(2, 1)))
    assert holds(C("neq", Int(1), Atom("one")))


def test_disjointness_and_inclusion():
    assert holds(C("disj", ints(1), ints(2)))
    assert holds(C("ndisj", ints(1, 2), ints(2)))
    assert holds(C("subset", ints(1), ints(1, 2)))
    assert holds(C("nsubset", ints(3), ints(1, 2)))
    assert not holds(C("subset", Int(1), ints(1)))


def test_relational_kinds():
    r = rel((1, 2), (2, 3))
    assert holds(C("comp", rel((1, 2)), rel((2, 5)), rel((1, 5))))
    assert holds(C("comp", rel((1, 2)), rel((3, 5)), EMPTY))
    assert holds(C("ncomp", rel((1, 2)), rel((2, 5)), EMPTY))
    assert holds(C("inv", r, rel((2, 1), (3, 2))))
    assert holds(C("id", ints(1, 2), rel((1, 1), (2, 2))))
    assert holds(C("dom", r, ints(1, 2)))
    assert holds(C("ran", r, ints(2, 3)))
    assert holds(C("ndom", r, ints(1)))
    assert not holds(C("dom", ints(1), ints(1)))


def test_partial_function_discipline():
    assert holds(C("pfun", rel((1, 2), (2, 2))))
    assert holds(C("npfun", rel((1, 2), (1, 3))))
    assert holds(C("pfun", EMPTY))
    assert holds(C("npfun", ints(1)))


def test_application_needs_exactly_one_image():
    f = rel((1, 7), (2, 8))
    assert holds(C("applyTo", f, Int(1), Int(7)))
    assert not holds(C("applyTo", f, Int(3), Int(7)))
    assert not holds(C("applyTo", rel((1, 7), (1, 8)), Int(1), Int(7)))
    assert not holds(C("applyTo", Int(5), Int(1), Int(7)))


def test_override_replaces_every_image_at_the_point():
    f = rel((1, 7), (2, 8))
    assert holds(C("foplus", f, Int(1), Int(9), rel((1, 9), (2, 8))))
    assert holds(C("foplus", f, Int(3), Int(9), rel((1, 7), (2, 8), (3, 9))))
    assert not holds(C("foplus", rel((1, 7), (1, 8)), Int(1), Int(9), rel((1, 9))))


def test_arithmetic():
    assert holds(parse_formula("X is 2 * 3 + 1", ), {"X": 7})
    assert holds(parse_formula("1 + 1 =< 2"))
    assert not holds(parse_formula("2 < 2"))
    assert holds(parse_formula("3 >= 1 + 2"))
    with pytest.raises(Undecidable):
        holds(C("le", Atom("a"), Int(1)))


def test_quantifiers():
    assert holds(parse_formula("foreach(X in {1,2,3}, X =< 3)"))
    assert not holds(parse_formula("foreach(X in {1,2,3}, X =< 2)"))
    assert holds(parse_formula("exists(X in {1,2,3}, X =< 1)"))
    assert not holds(parse_formula("exists(X in {}, X =< 1)"))
    assert holds(parse_formula("foreach([X,Y] in {[1,2],[2,3]}, X < Y)"))


def test_quantified_application_binds_the_local():
    from setsolve.formulas import Constraint, QPayload
    f = Constraint("foreach", (), q=QPayload(
        binder=Var("P"), domain=Var("F_dom"), locals=("M",),
        body=C("eq", Var("M"), Int(7)),
        funcs=C("applyTo", Var("F"), Var("P"), Var("M"))))
    dom = frozenset({1, 2})
    assert holds(f, {"F_dom": dom, "F": frozenset({(1, 7), (2, 7)})})
    assert not holds(f, {"F_dom": dom, "F": frozenset({(1, 7), (2, 8)})})
    assert not holds(f, {"F_dom": dom, "F": frozenset({(1, 7)})})
    assert not holds(f, {"F_dom": dom, "F": frozenset({(1, 7), (1, 8), (2, 7)})})


def test_connectives():
    t = parse_formula("1 = 1")
    f = parse_formula("1 = 2")
    assert holds(conj([t, Neg(f)]))
    assert holds(disj([f, t]))
    assert not holds(conj([t, f]))
    assert holds(parse_formula("1 = 2 implies 3 = 4"))


def test_search_model_and_subsets():
    assert len(subsets([1, 2, 3])) == 8
    f = conj([C("un", Var("A"), Var("B"), ints(1, 2)),
              C("disj", Var("A"), Var("B")),
              C("in", Int(1), Var("A"))])
    pool = subsets([1, 2])
    m = search_model(f, ["A", "B"], [pool, pool])
    assert m is not None
    assert 1 in m["A"] and m["A"] | m["B"] == {1, 2} and not (m["A"] & m["B"])
    bad = C("un", Var("A"), Var("A"), ints(1, 2, 3))
    assert search_model(bad, ["A"], [subsets([1, 2])]) is None
