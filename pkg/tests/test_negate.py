"""Negation stays inside the constraint language and flips truth exactly."""
import random

import oracle
import pytest
from setsolve.formulas import (
    And, C, Constraint, FalseF, Implies, Neg, Or, QPayload, TrueF, conj, disj,
)
from setsolve.negate import COMPLEMENT, NotNegatable, negate, nnf
from setsolve.parser import parse_formula, parse_program
from setsolve.terms import Int, Pair, Var, VarGen, mkset

from test_groundeval import rnd_constraint


def neg(f, program=None):
    return negate(f, VarGen(), program)


def test_complement_table_is_an_involution():
    for a, b in COMPLEMENT.items():
        assert COMPLEMENT[b] == a
    f = C("un", Var("A"), Var("B"), Var("C"))
    assert neg(f) == C("nun", Var("A"), Var("B"), Var("C"))
    assert neg(neg(f)) == f


def test_order_negations_swap_arguments():
    a, b = Int(1), Int(2)
    assert neg(C("le", a, b)) == C("lt", b, a)
    assert neg(C("lt", a, b)) == C("le", b, a)
    got = neg(C("is", Var("X"), Int(3)))
    assert isinstance(got, Or)
    assert set(p.kind for p in got.parts) == {"lt"}


def test_application_negation_is_an_image_disequation():
    f = neg(C("applyTo", Var("F"), Int(1), Int(7)))
    assert f == C("ncomp", mkset([Pair(Int(1), Int(1))]), Var("F"),
                  mkset([Pair(Int(1), Int(7))]))


def test_pair_shape_negation_introduces_fresh_components():
    f = neg(C("npair", Var("T")))
    assert f.kind == "eq" and isinstance(f.args[1], Pair)


def test_override_and_declarations():
    with pytest.raises(NotNegatable):
        neg(C("foplus", Var("F"), Int(1), Int(2), Var("G")))
    assert neg(C("dec", Var("X"), None)) == FalseF()


def test_connective_negation():
    t, f = parse_formula("1 = 1"), parse_formula("1 = 2")
    assert neg(conj([t, f])) == disj([neg(t), neg(f)])
    assert neg(disj([t, f])) == conj([neg(t), neg(f)])
    assert neg(Neg(t)) == t
    assert neg(Implies(t, f)) == conj([t, neg(f)])
    assert neg(TrueF()) == FalseF()
    assert neg(FalseF()) == TrueF()


def test_quantifier_negation_dualizes():
    f = parse_formula("foreach(X in {1,2}, X = 1)")
    g = neg(f)
    assert g.kind == "exists"
    assert g.q.body == C("neq", Var("X"), Int(1))
    assert neg(g).kind == "foreach"


def test_functional_let_part_survives_negation():
    q = Constraint("foreach", (), q=QPayload(
        Var("P"), Var("D"), ("M",),
        C("eq", Var("M"), Int(1)),
        C("applyTo", Var("F"), Var("P"), Var("M"))))
    g = neg(q)
    assert g.kind == "exists"
    assert g.q.funcs == q.q.funcs
    assert g.q.body == C("neq", Var("M"), Int(1))


def test_non_functional_let_part_is_rejected():
    q = Constraint("foreach", (), q=QPayload(
        Var("P"), Var("D"), ("M",),
        C("eq", Var("M"), Int(1)),
        C("in", Pair(Var("P"), Var("M")), Var("F"))))
    with pytest.raises(NotNegatable):
        neg(q)


def test_predicate_negation_unfolds_clauses():
    prog = parse_program("p(X) :- X in {1,2}.")
    f = neg(parse_formula("p(Y)"), prog)
    assert f == C("nin", Var("Y"), mkset([Int(1), Int(2)]))
    with pytest.raises(NotNegatable):
        neg(parse_formula("p(Y)"))
    with pytest.raises(NotNegatable):
        neg(parse_formula("q(Y)"), prog)


def test_predicate_with_clause_locals_cannot_negate():
    prog = parse_program("p(X) :- X = {Z} & 1 in Z.")
    with pytest.raises(NotNegatable):
        neg(parse_formula("p(Y)"), prog)


def test_existential_binder_only_locals_are_fine():
    prog = parse_program("p(X) :- exists(Z in X, Z = 1).")
    f = neg(parse_formula("p(Y)"), prog)
    assert f.kind == "foreach"


def no_negs(f):
    if isinstance(f, (Neg, Implies)):
        return False
    if isinstance(f, (And, Or)):
        return all(no_negs(p) for p in f.parts)
    if isinstance(f, Constraint) and f.q is not None:
        ok = no_negs(f.q.body)
        return ok and (f.q.funcs is None or no_negs(f.q.funcs))
    return True


def test_nnf_eliminates_negations_and_implications():
    f = parse_formula(
        "neg(un(A, B, C) & (1 in A or neg(2 in B)) implies C neq {})")
    g = nnf(f, VarGen())
    assert no_negs(g)


def test_negation_flips_ground_truth():
    r = random.Random(11)
    flipped = 0
    for _ in range(2500):
        c = rnd_constraint(r)
        try:
            before = oracle.holds(c)
        except oracle.Undecidable:
            continue
        try:
            after = oracle.holds(neg(c))
        except (oracle.Undecidable, NotNegatable):
            continue
        assert before != after, f"{c}"
        flipped += 1
    assert flipped > 1500


def test_nnf_preserves_ground_truth():
    r = random.Random(13)
    kept = 0
    for _ in range(800):
        parts = [rnd_constraint(r) for _ in range(r.randint(1, 3))]
        f = conj(parts) if r.random() < 0.5 else disj(parts)
        if r.random() < 0.5:
            f = Neg(f)
        if r.random() < 0.4:
            f = Implies(f, rnd_constraint(r))
        try:
            before = oracle.holds(f)
            after = oracle.holds(nnf(f, VarGen()))
        except (oracle.Undecidable, NotNegatable):
            continue
        assert before == after, f"{f}"
        kept += 1
    assert kept > 400
