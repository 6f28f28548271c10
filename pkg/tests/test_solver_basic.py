"""Every constraint kind through the solver, answers certified by the oracle."""
import pytest
from conftest import certify
from setsolve.engine import ground_complete, solve
from setsolve.formulas import C
from setsolve.parser import parse_formula
from setsolve.terms import EMPTY, Atom, Int, Pair, Var, mkset


def sat(run, text, **kw):
    f = parse_formula(text) if isinstance(text, str) else text
    res = run(f, **kw)
    assert not res.unsat, f"{text} reported unsatisfiable"
    certify(f, res)
    return res


def unsat(run, text, **kw):
    res = run(text, **kw)
    assert res.unsat, f"{text} should be unsatisfiable"


def test_equality(run):
    sat(run, "{1,2} = {2,1}")
    sat(run, "{1,1,2} = {1,2}")
    sat(run, "X = {1,2} & {2,1} = X")
    unsat(run, "{1,2} = {1,3}")
    unsat(run, "X = {1} & X = {2}")
    unsat(run, "[1,2] = [2,1]")
    sat(run, "{X/{2}} = {1,2}")


def test_disequality(run):
    sat(run, "X neq {1}")
    sat(run, "{1,2} neq {1,3}")
    unsat(run, "{1,2} neq {2,1,1}")
    unsat(run, "X neq X")
    sat(run, "[X,2] neq [1,Y]")


def test_membership(run):
    sat(run, "2 in {1,2,3}")
    sat(run, "X in {1,2,3}")
    sat(run, "1 in X & 2 in X")
    unsat(run, "4 in {1,2,3}")
    unsat(run, "X in {}")
    unsat(run, "1 in X & X = {2}")


def test_non_membership(run):
    sat(run, "4 nin {1,2,3}")
    sat(run, "X nin {1,2}")
    unsat(run, "2 nin {1,2}")
    unsat(run, "X in A & X nin A")
    sat(run, "X nin A & A = {1,2}")


def test_union(run):
    sat(run, "un({1,2}, {2,3}, X)")
    sat(run, "un(A, B, {1,2})", max_solutions=50)
    sat(run, "un({1}, B, {1,2})")
    unsat(run, "un({1}, {2}, {1,2,3})")
    unsat(run, "un(A, B, {1}) & 2 in A")
    res = solve(parse_formula("un({1,2}, {2,3}, X)"))
    g = ground_complete(res.solutions[0])
    assert g["X"] == mkset([Int(1), Int(2), Int(3)])


def test_union_enumerates_covers(run):
    f = parse_formula("un(A, B, {1,2})")
    res = run(f, max_solutions=100)
    assert res.complete
    got = set()
    for sol in res.solutions:
        g = ground_complete(sol)
        assert g is not None
        got.add((frozenset(x.value for x in iter_elems(g["A"])),
                 frozenset(x.value for x in iter_elems(g["B"]))))
    assert (frozenset({1, 2}), frozenset()) in got
    assert (frozenset(), frozenset({1, 2})) in got


def iter_elems(t):
    from setsolve.terms import set_parts
    elems, tail = set_parts(t)
    assert tail == EMPTY
    return elems


def test_non_union(run):
    sat(run, "nun({1}, {2}, {1})")
    sat(run, "nun(A, B, C) & A = {1} & B = {} & C = {1,2}")
    unsat(run, "nun({1}, {2}, {1,2})")
    unsat(run, "un(A, B, C) & nun(A, B, C)")


def test_disjointness(run):
    sat(run, "disj({1}, {2})")
    sat(run, "disj(A, B) & 1 in A")
    sat(run, "disj(A, A) & A = {}")
    unsat(run, "disj({1,2}, {2})")
    unsat(run, "disj(A, A) & 1 in A")
    sat(run, "ndisj({1,2}, {2,3})")
    unsat(run, "ndisj({1}, {2})")
    unsat(run, "ndisj(A, A) & A = {}")


def test_inclusion(run):
    sat(run, "subset({1}, {1,2})")
    sat(run, "subset(A, {1,2}) & 1 in A")
    unsat(run, "subset({3}, {1,2})")
    unsat(run, "subset(A, {1}) & 2 in A")
    sat(run, "nsubset({3}, {1,2})")
    unsat(run, "nsubset({1}, {1,2})")
    unsat(run, "nsubset(A, A)")


def test_composition(run):
    sat(run, "comp({[1,2]}, {[2,5]}, {[1,5]})")
    sat(run, "comp({[1,2]}, {[3,5]}, {})")
    sat(run, "comp({[1,2],[2,2]}, {[2,7]}, X)")
    unsat(run, "comp({[1,2]}, {[2,5]}, {})")
    unsat(run, "comp({[1,2]}, {[2,5]}, {[1,5],[2,2]})")
    sat(run, "ncomp({[1,2]}, {[2,5]}, {})")
    unsat(run, "ncomp({[1,2]}, {[2,5]}, {[1,5]})")


def test_inverse(run):
    sat(run, "inv({[1,2],[3,4]}, {[2,1],[4,3]})")
    sat(run, "inv({[1,2]}, X)")
    sat(run, "inv(X, {[2,1]})")
    unsat(run, "inv({[1,2]}, {[1,2]})")
    sat(run, "ninv({[1,2]}, {[1,2]})")
    unsat(run, "ninv({[1,2]}, {[2,1]})")


def test_identity(run):
    sat(run, "id({1,2}, {[1,1],[2,2]})")
    sat(run, "id(A, {[1,1]})")
    unsat(run, "id({1,2}, {[1,1]})")
    unsat(run, "id({1}, {[1,2]})")
    sat(run, "nid({1}, {[1,2]})")
    unsat(run, "nid({1}, {[1,1]})")


def test_partial_function(run):
    sat(run, "pfun({[1,2],[2,2]})")
    sat(run, "pfun(F) & [1,2] in F & [2,3] in F")
    unsat(run, "pfun({[1,2],[1,3]})")
    unsat(run, "pfun(F) & [1,2] in F & [1,3] in F")
    sat(run, "npfun({[1,2],[1,3]})")
    unsat(run, "npfun({[1,2],[2,3]})")


def test_domain(run):
    sat(run, "dom({[1,2],[3,4]}, {1,3})")
    sat(run, "dom(F, {1}) & pfun(F) & ran(F, {7})")
    unsat(run, "dom({[1,2]}, {1,3})")
    unsat(run, "dom({[1,2]}, {})")
    sat(run, "ndom({[1,2]}, {2})")
    unsat(run, "ndom({[1,2]}, {1})")


def test_range(run):
    sat(run, "ran({[1,2],[3,4]}, {2,4})")
    sat(run, "ran(F, {1})")
    unsat(run, "ran({[1,2]}, {1})")
    sat(run, "nran({[1,2]}, {1})")
    unsat(run, "nran({[1,2]}, {2})")


def test_application(run):
    sat(run, "applyTo({[1,7],[2,8]}, 1, 7)")
    sat(run, "applyTo({[1,7],[2,8]}, 2, X)")
    sat(run, "applyTo(F, 1, 7) & dom(F, {1})")
    unsat(run, "applyTo({[1,7],[2,8]}, 1, 8)")
    unsat(run, "applyTo({[1,7],[1,8]}, 1, 7)")
    unsat(run, "applyTo({}, 1, X)")


def test_override(run):
    sat(run, "foplus({[1,7]}, 1, 9, {[1,9]})")
    sat(run, "foplus({[1,7]}, 2, 9, {[1,7],[2,9]})")
    sat(run, "foplus({[1,7],[2,8]}, 1, 9, G)")
    unsat(run, "foplus({[1,7]}, 1, 9, {[1,7],[1,9]})")
    unsat(run, "foplus({[1,7]}, 2, 9, {[1,7]})")


def test_declarations_are_transparent(run):
    res = run("dec(X, stype(int)) & X = {1,2}")
    assert res.solutions
    assert res.solutions[0].bindings["X"] == mkset([Int(1), Int(2)])


def test_atoms_strings_ints_are_distinct(run):
    unsat(run, 'a = "a"')
    unsat(run, "1 = one")
    sat(run, 'X = "hi" & X neq hi')


def test_deterministic_propagation_through_queues(run):
    res = sat(run, "un(A, B, C) & C = {1} & A = {} & B = X")
    g = ground_complete(res.solutions[0])
    assert g["X"] == mkset([Int(1)])


def test_budget_exhaustion_is_reported():
    f = parse_formula("un(A, B, C) & un(C, D, E) & un(E, F, G) & 1 in G")
    res = solve(f, budget=5)
    assert not res.complete
    assert res.exhausted_budget
    assert not res.unsat


def test_multiple_solutions_stop_at_limit(run):
    res = run("X in {1,2,3}", max_solutions=2)
    assert len(res.solutions) == 2
