"""Independent brute-force evaluator used to judge the solver.

This module re-derives the semantics of every constraint kind from plain
set theory, on purpose without importing the package's own evaluator, so
the two can check each other.  Values: ints stay ints, atoms become
``"a:<name>"``, strings ``"s:<text>"``, pairs 2-tuples, sets frozensets.
Evaluation is environment-based (no substitution pass): ``holds(f, env)``
with ``env`` mapping variable names to values or ground terms.
"""
from __future__ import annotations

from itertools import chain, combinations
from typing import Iterable, Optional, Union

from setsolve.arith import ABin, ANeg
from setsolve.formulas import (
    And, Constraint, FalseF, Formula, Implies, Neg, Or, PredCall, TrueF,
)
from setsolve.terms import (
    CP, Atom, EmptySet, ExtSet, Int, Interval, Pair, Str, Term, Var,
)

Value = Union[int, str, tuple, frozenset]


class Undecidable(Exception):
    """The formula leaves the environment's values underdetermined."""


def val(t: Term, env: dict[str, Value]) -> Value:
    if isinstance(t, Int):
        return t.value
    if isinstance(t, Atom):
        return "a:" + t.name
    if isinstance(t, Str):
        return "s:" + t.value
    if isinstance(t, Var):
        if t.name not in env:
            raise Undecidable(f"no value for {t.name}")
        v = env[t.name]
        return val(v, env) if isinstance(v, Term) else v
    if isinstance(t, Pair):
        return (val(t.first, env), val(t.second, env))
    if isinstance(t, EmptySet):
        return frozenset()
    if isinstance(t, ExtSet):
        head = val(t.head, env)
        tail = val(t.tail, env)
        if not isinstance(tail, frozenset):
            raise Undecidable("set tail does not denote a set")
        return tail | {head}
    if isinstance(t, CP):
        a, b = val(t.left, env), val(t.right, env)
        if not isinstance(a, frozenset) or not isinstance(b, frozenset):
            raise Undecidable("cp argument does not denote a set")
        return frozenset((x, y) for x in a for y in b)
    if isinstance(t, Interval):
        lo, hi = val(t.lo, env), val(t.hi, env)
        if not isinstance(lo, int) or not isinstance(hi, int):
            raise Undecidable("interval bound is not an integer")
        return frozenset(range(lo, hi + 1))
    raise TypeError(f"not a term: {t!r}")


def _pairs(v: Value) -> Optional[list[tuple]]:
    """The pair list of a relation value, or None if not a relation."""
    if not isinstance(v, frozenset):
        return None
    out = []
    for x in v:
        if not (isinstance(x, tuple) and len(x) == 2):
            return None
        out.append(x)
    return out


def _num(t, env: dict[str, Value]) -> int:
    if isinstance(t, ABin):
        x, y = _num(t.left, env), _num(t.right, env)
        if t.op == "+":
            return x + y
        if t.op == "-":
            return x - y
        if t.op == "*":
            return x * y
        raise TypeError(f"unknown operator {t.op}")
    if isinstance(t, ANeg):
        return -_num(t.body, env)
    v = val(t, env)
    if not isinstance(v, int):
        raise Undecidable("arithmetic over a non-integer")
    return v


def _sets(env: dict[str, Value], *vs: Value) -> Optional[tuple]:
    return vs if all(isinstance(v, frozenset) for v in vs) else None


def holds_constraint(c: Constraint, env: dict[str, Value]) -> bool:
    k = c.kind
    if k in ("foreach", "exists"):
        return _holds_quant(c, env)
    if k == "dec":
        return True
    if k == "is":
        return val(c.args[0], env) == _num(c.args[1], env)
    if k == "le":
        return _num(c.args[0], env) <= _num(c.args[1], env)
    if k == "lt":
        return _num(c.args[0], env) < _num(c.args[1], env)

    a = [val(t, env) for t in c.args]
    if k == "eq":
        return a[0] == a[1]
    if k == "neq":
        return a[0] != a[1]
    if k == "in":
        return isinstance(a[1], frozenset) and a[0] in a[1]
    if k == "nin":
        return not (isinstance(a[1], frozenset) and a[0] in a[1])
    if k == "npair":
        return not (isinstance(a[0], tuple) and len(a[0]) == 2)

    if k in ("un", "nun"):
        ok = (_sets(env, *a) is not None) and a[2] == a[0] | a[1]
        return ok if k == "un" else not ok
    if k in ("disj", "ndisj"):
        ok = (_sets(env, *a) is not None) and not (a[0] & a[1])
        return ok if k == "disj" else not ok
    if k in ("subset", "nsubset"):
        ok = (_sets(env, *a) is not None) and a[0] <= a[1]
        return ok if k == "subset" else not ok

    if k in ("comp", "ncomp"):
        r, s = _pairs(a[0]), _pairs(a[1])
        ok = (r is not None and s is not None and isinstance(a[2], frozenset)
              and a[2] == frozenset((x, w) for x, y in r for z, w in s
                                    if y == z))
        return ok if k == "comp" else not ok
    if k in ("inv", "ninv"):
        r = _pairs(a[0])
        ok = (r is not None and isinstance(a[1], frozenset)
              and a[1] == frozenset((y, x) for x, y in r))
        return ok if k == "inv" else not ok
    if k in ("id", "nid"):
        ok = (isinstance(a[0], frozenset) and isinstance(a[1], frozenset)
              and a[1] == frozenset((x, x) for x in a[0]))
        return ok if k == "id" else not ok
    if k in ("pfun", "npfun"):
        f = _pairs(a[0])
        ok = f is not None and len({x for x, _ in f}) == len(f)
        return ok if k == "pfun" else not ok
    if k in ("dom", "ndom"):
        r = _pairs(a[0])
        ok = (r is not None and isinstance(a[1], frozenset)
              and a[1] == frozenset(x for x, _ in r))
        return ok if k == "dom" else not ok
    if k in ("ran", "nran"):
        r = _pairs(a[0])
        ok = (r is not None and isinstance(a[1], frozenset)
              and a[1] == frozenset(y for _, y in r))
        return ok if k == "ran" else not ok

    if k == "applyTo":
        f = _pairs(a[0])
        if f is None:
            return False
        return {y for x, y in f if x == a[1]} == {a[2]}
    if k == "foplus":
        f = _pairs(a[0])
        if f is None or not isinstance(a[3], frozenset):
            return False
        if len({y for x, y in f if x == a[1]}) > 1:
            return False
        keep = frozenset(p for p in f if p[0] != a[1])
        return a[3] == keep | {(a[1], a[2])}
    raise ValueError(f"unknown constraint kind {k}")


def _binder_env(binder: Term, elem: Value) -> Optional[dict[str, Value]]:
    if isinstance(binder, Var):
        return {binder.name: elem}
    if isinstance(binder, Pair):
        if not (isinstance(elem, tuple) and len(elem) == 2):
            return None
        return {binder.first.name: elem[0], binder.second.name: elem[1]}
    raise TypeError(f"bad binder {binder!r}")


def _applies(f: Formula) -> list[Constraint]:
    if isinstance(f, Constraint) and f.kind == "applyTo":
        return [f]
    if isinstance(f, And):
        return [c for p in f.parts for c in _applies(p)]
    raise Undecidable("quantifier let-part is not a conjunction of applications")


def _holds_quant(c: Constraint, env: dict[str, Value]) -> bool:
    q = c.q
    dom = val(q.domain, env)
    if not isinstance(dom, frozenset):
        raise Undecidable("quantifier domain does not denote a set")
    want_all = c.kind == "foreach"
    for elem in dom:
        inner = _binder_env(q.binder, elem)
        if inner is None:
            ok = False
        else:
            e2 = dict(env)
            e2.update(inner)
            ok = True
            if q.funcs is not None:
                # The let-part defines each local as a function image; an
                # undefined image falsifies the element.
                for app in _applies(q.funcs):
                    fv = val(app.args[0], e2)
                    x = val(app.args[1], e2)
                    pairs = _pairs(fv)
                    images = ({y for px, y in pairs if px == x}
                              if pairs is not None else set())
                    if len(images) != 1:
                        ok = False
                        break
                    out = app.args[2]
                    if not isinstance(out, Var):
                        raise Undecidable("application result is not a variable")
                    e2[out.name] = next(iter(images))
            if ok:
                ok = holds(q.body, e2)
        if want_all and not ok:
            return False
        if not want_all and ok:
            return True
    return want_all


def holds(f: Formula, env: Optional[dict[str, Value]] = None) -> bool:
    env = env or {}
    if isinstance(f, TrueF):
        return True
    if isinstance(f, FalseF):
        return False
    if isinstance(f, And):
        return all(holds(p, env) for p in f.parts)
    if isinstance(f, Or):
        return any(holds(p, env) for p in f.parts)
    if isinstance(f, Neg):
        return not holds(f.body, env)
    if isinstance(f, Implies):
        return (not holds(f.left, env)) or holds(f.right, env)
    if isinstance(f, Constraint):
        return holds_constraint(f, env)
    if isinstance(f, PredCall):
        raise Undecidable("predicate calls need a clause database")
    raise TypeError(f"not a formula: {f!r}")


# --- bounded model search -------------------------------------------------------

def subsets(xs: Iterable[Value]) -> list[frozenset]:
    xs = list(xs)
    return [frozenset(c) for c in
            chain.from_iterable(combinations(xs, n) for n in range(len(xs) + 1))]


def search_model(f: Formula, names: list[str],
                 pools: list[list[Value]]) -> Optional[dict[str, Value]]:
    """First assignment of pool values to names that satisfies ``f``."""

    def go(i: int, env: dict[str, Value]) -> Optional[dict[str, Value]]:
        if i == len(names):
            try:
                return dict(env) if holds(f, env) else None
            except Undecidable:
                return None
        for v in pools[i]:
            env[names[i]] = v
            got = go(i + 1, env)
            if got is not None:
                return got
        del env[names[i]]
        return None

    return go(0, {})
