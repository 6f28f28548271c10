"""Set unification.

``unify`` returns a disjunction of candidate solutions: each branch is a
substitution plus a list of residual constraints the caller's solver must
still process (mixed equations such as a symbolic cartesian product against
an extensional set, or interval-emptiness side conditions).

Extensional sets unify modulo permutation and absorption through the
four-way decomposition on ``{t/A} = {s/B}``: match heads and tails, absorb
the head on either side, or swap both heads through a fresh common tail.
The occurs check is relaxed in set-tail position: ``X = {t/X}`` denotes
"X contains t" and rebinds X with a fresh open tail; any other cyclic
equation fails.
"""
from __future__ import annotations

from typing import Optional

from .formulas import C, Constraint
from .groundeval import NotGround, term_value
from .terms import (
    CP, Atom, EMPTY, EmptySet, ExtSet, Int, Interval, Pair, Str, Term, Var,
    VarGen, compose, is_ground, mkset, set_parts, subst_term, term_key, term_vars,
)

Branch = tuple[dict[str, Term], list[Constraint]]


def unify(t1: Term, t2: Term, gen: Optional[VarGen] = None) -> list[Branch]:
    """All ways to make two terms equal under set semantics."""
    gen = gen or VarGen()
    gen.bump_past(term_vars(t1) | term_vars(t2))
    return _solve([(t1, t2)], {}, [], gen)


def _solve(eqs: list[tuple[Term, Term]], subst: dict[str, Term],
           deferred: list[Constraint], gen: VarGen) -> list[Branch]:
    eqs = list(eqs)
    while eqs:
        a, b = eqs.pop(0)
        a = subst_term(subst, a)
        b = subst_term(subst, b)
        if a == b:
            continue
        if isinstance(a, Var) or isinstance(b, Var):
            if not isinstance(a, Var):
                a, b = b, a
            res = _bind(a.name, b, gen)
            if res is None:
                return []
            delta, extra = res
            subst = compose(dict(subst), delta)
            eqs = [(subst_term(delta, x), subst_term(delta, y)) for x, y in eqs]
            eqs.extend(extra)
            continue
        if isinstance(a, Pair) and isinstance(b, Pair):
            eqs.insert(0, (a.second, b.second))
            eqs.insert(0, (a.first, b.first))
            continue
        if isinstance(a, (Atom, Int, Str)) or isinstance(b, (Atom, Int, Str)):
            return []  # distinct constants or a constant against a structure
        if isinstance(a, Pair) or isinstance(b, Pair):
            return []  # pair against a set term
        # Both sides are set terms now.
        if is_ground(a) and is_ground(b):
            try:
                return _solve(eqs, subst, deferred, gen) if term_value(a) == term_value(b) else []
            except NotGround:
                pass
        branches = _set_eq_branches(a, b, gen)
        if branches is None:
            deferred.append(C("eq", a, b))
            continue
        out: list[Branch] = []
        for extra_eqs, extra_cs in branches:
            out.extend(_solve(extra_eqs + eqs, subst, deferred + extra_cs, gen))
        return out
    return [(dict(subst), list(deferred))]


def _bind(name: str, t: Term, gen: VarGen):
    """Bind a variable, relaxing the occurs check in set-tail position.
    Returns (delta, extra equations) or None when unsatisfiable."""
    if name not in term_vars(t):
        return {name: t}, []
    if isinstance(t, ExtSet):
        elems, tail = set_parts(t)
        spine_ok = isinstance(tail, Var) and tail.name == name
        if spine_ok and not any(name in term_vars(e) for e in elems):
            fresh = gen.fresh()
            return {name: mkset(elems, fresh)}, []
    return None


def _set_eq_branches(a: Term, b: Term, gen: VarGen):
    """Decompose an equation between two non-variable set terms.  Each branch
    is (equations, residual constraints); None defers to the solver rules."""
    # Expand ground products/intervals so the extensional rules apply.
    ga = concretize(a)
    gb = concretize(b)
    if ga is not None or gb is not None:
        return [([(ga or a, gb or b)], [])]

    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        if isinstance(b, EmptySet):
            a, b = b, a
        if isinstance(b, EmptySet):
            return [([], [])]
        if isinstance(b, ExtSet):
            return []
        if isinstance(b, CP):
            return [([(b.left, EMPTY)], []), ([(b.right, EMPTY)], [])]
        if isinstance(b, Interval):
            return [([], [C("lt", b.hi, b.lo)])]

    if isinstance(a, ExtSet) and isinstance(b, ExtSet):
        t, rest_a = a.head, a.tail
        s, rest_b = b.head, b.tail
        fresh = gen.fresh()
        return [
            ([(t, s), (rest_a, rest_b)], []),
            ([(t, s), (a, rest_b)], []),
            ([(t, s), (rest_a, b)], []),
            ([(rest_a, ExtSet(s, fresh)), (rest_b, ExtSet(t, fresh))], []),
        ]

    if isinstance(a, CP) and isinstance(b, CP):
        return [
            ([(a.left, b.left), (a.right, b.right)], []),
            ([(a.left, EMPTY), (b.left, EMPTY)], []),
            ([(a.left, EMPTY), (b.right, EMPTY)], []),
            ([(a.right, EMPTY), (b.left, EMPTY)], []),
            ([(a.right, EMPTY), (b.right, EMPTY)], []),
        ]

    if isinstance(a, Interval) and isinstance(b, Interval):
        return [
            ([], [C("lt", a.hi, a.lo), C("lt", b.hi, b.lo)]),
            ([(a.lo, b.lo), (a.hi, b.hi)],
             [C("le", a.lo, a.hi)]),
        ]

    # Mixed symbolic product/interval against an extensional set: the solver
    # decomposes these through membership rules.
    return None


def concretize(t: Term) -> Optional[Term]:
    """Ground CP/Interval -> canonical extensional set; None when no change
    applies (returns the rewritten term only at the outermost level)."""
    if isinstance(t, CP) and is_ground(t):
        try:
            val = term_value(t)
        except NotGround:
            return None
        return _values_to_set(val)
    if isinstance(t, Interval) and is_ground(t):
        val = term_value(t)
        return _values_to_set(val)
    return None


def _values_to_set(val) -> Term:
    from .groundeval import value_to_term

    return value_to_term(val)
