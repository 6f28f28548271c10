"""Linear integer arithmetic: the store and its solver integration."""
import pytest
from setsolve.arith import ABin, ANeg, ArithStore, NonLinear, eval_ground, lower
from setsolve.engine import solve
from setsolve.parser import parse_formula
from setsolve.terms import Int, Var


def expr(op, a, b):
    return ABin(op, a, b)


def test_lower_and_eval_ground():
    e = expr("+", expr("*", Int(2), Int(3)), ANeg(Int(1)))
    assert eval_ground(e) == 5
    with pytest.raises(ValueError):
        eval_ground(expr("+", Var("X"), Int(1)))
    with pytest.raises(NonLinear):
        lower(expr("*", Var("X"), Var("Y")))


def test_store_solves_equalities():
    st = ArithStore()
    st.assert_eq(lower(expr("-", Var("x"), expr("+", Var("y"), Int(2)))))
    st.assert_eq(lower(expr("-", Var("y"), Int(3))))
    assert st.consistent() is True
    assert st.model() == {"x": 5, "y": 3}


def test_store_detects_contradictions():
    st = ArithStore()
    st.assert_le(lower(expr("-", Var("x"), Int(2))))        # x <= 2
    st.assert_le(lower(expr("-", Int(2), Var("x"))), True)  # x > 2
    assert st.consistent() is False

    st2 = ArithStore()
    st2.assert_eq(lower(expr("-", Int(1), Int(2))))
    assert st2.consistent() is False


def test_store_strict_versus_weak_bounds():
    st = ArithStore()
    st.assert_le(lower(expr("-", Var("x"), Int(5))))        # x <= 5
    st.assert_le(lower(expr("-", Int(5), Var("x"))))        # x >= 5
    assert st.consistent() is True
    assert st.model()["x"] == 5


def test_solver_arith_end_to_end(run):
    assert run("X is 2 + 3 * 4").solutions[0].bindings["X"] == Int(14)
    assert run("X is 1 & X is 2").unsat
    assert run("3 < 3").unsat
    assert run("3 >= 3").solutions
    r = run("X is Y + 1 & Y is 4")
    b = r.solutions[0].bindings
    assert b["X"] == Int(5) and b["Y"] == Int(4)
    assert run("X < 3 & 3 < X").unsat
    assert run("X =< 2 & 2 =< X & X = 3").unsat


def test_solver_bounds_have_integer_models(run):
    r = run("2 < X & X < 4")
    sol = r.solutions[0]
    model = sol.arith_model()
    assert model["X"] == 3


def test_nonlinear_parks_until_linear(run):
    r = run("X is Y * Y & Y = 3")
    assert r.solutions[0].bindings["X"] == Int(9)
    r = run("X is Y * Y & X = 2")
    sol = r.solutions[0]
    assert any(c.kind == "is" for c in sol.residual)


def test_interval_membership_bridges_to_arith(run):
    assert run("X in int(1, 3) & X = 2").solutions
    assert run("X in int(1, 3) & X = 5").unsat
    assert run("int(1, 0) = {}").solutions
    assert run("int(1, 2) = {1, 2}").solutions
