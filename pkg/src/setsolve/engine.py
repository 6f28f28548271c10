"""Constraint store and search loop.

Solving works on a stack of stores (depth-first over the branch points the
rules produce).  Each store keeps a substitution, priority queues of pending
goals, a list of parked irreducible constraints, and a linear-arithmetic
store.  Binding a variable wakes any parked constraint that mentions it.

A quiescent store is an answer: the substitution plus the parked residue.
Unsatisfiability is only reported when every branch failed within budget;
running out of budget degrades the verdict, never flips it.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterator, Optional

from . import arith, groundeval
from .arith import ABin, ANeg, ArithStore
from .formulas import (
    And, C, Constraint, FalseF, Formula, IllFormed, Implies, Neg, Or,
    PredCall, Program, QPayload, TrueF, expand_calls, formula_vars,
    subst_formula,
)
from .negate import nnf
from .rules import Bind, rewrite
from .terms import (
    CP, Atom, EMPTY, ExtSet, Int, Interval, Pair, Subst, Term, Var, VarGen,
    compose, is_ground, mkset, subst_term, term_vars,
)


class ResourceExhausted(Exception):
    pass


@dataclass(frozen=True)
class OrNode:
    alts: tuple[Formula, ...]


QItem = object  # Constraint | OrNode

PRIO = {
    "eq": 0,
    "in": 1, "nin": 1, "neq": 1, "npair": 1, "is": 1, "le": 1, "lt": 1,
    "foreach": 3, "exists": 3,
}
N_PRIO = 5

SET_POS = {
    "un": (0, 1, 2), "nun": (0, 1, 2),
    "disj": (0, 1), "ndisj": (0, 1),
    "subset": (0, 1), "nsubset": (0, 1),
    "comp": (0, 1, 2), "ncomp": (0, 1, 2),
    "inv": (0, 1), "ninv": (0, 1),
    "id": (0, 1), "nid": (0, 1),
    "dom": (0, 1), "ndom": (0, 1),
    "ran": (0, 1), "nran": (0, 1),
    "pfun": (0,), "npfun": (0,),
    "applyTo": (0,), "foplus": (0, 3),
    "in": (1,), "nin": (1,),
    "eq": (), "neq": (),
}


def _prio(item: QItem) -> int:
    if isinstance(item, OrNode):
        return 2
    if item.delayed:
        return 4
    return PRIO.get(item.kind, 2)


def items_of(f: Formula) -> Optional[list[QItem]]:
    """Flatten a negation-free formula into queue items; None means false."""
    if isinstance(f, TrueF):
        return []
    if isinstance(f, FalseF):
        return None
    if isinstance(f, Constraint):
        return [f]
    if isinstance(f, And):
        out: list[QItem] = []
        for p in f.parts:
            sub = items_of(p)
            if sub is None:
                return None
            out.extend(sub)
        return out
    if isinstance(f, Or):
        return [OrNode(f.parts)]
    raise IllFormed(f"unexpected {type(f).__name__} after preprocessing")


class Store:
    __slots__ = ("subst", "queues", "parked", "arith", "gen", "_sorts_dirty",
                 "_set_sorted", "_int_sorted")

    def __init__(self, gen: VarGen):
        self.subst: dict[str, Term] = {}
        self.queues: list[deque] = [deque() for _ in range(N_PRIO)]
        self.parked: list[tuple[frozenset, Constraint]] = []
        self.arith = ArithStore()
        self.gen = gen
        self._sorts_dirty = True
        self._set_sorted: frozenset = frozenset()
        self._int_sorted: frozenset = frozenset()

    def clone(self) -> "Store":
        s = Store.__new__(Store)
        s.subst = dict(self.subst)
        s.queues = [deque(q) for q in self.queues]
        s.parked = list(self.parked)
        s.arith = self.arith.copy()
        s.gen = self.gen
        s._sorts_dirty = True
        s._set_sorted = frozenset()
        s._int_sorted = frozenset()
        return s

    def enqueue(self, item: QItem) -> None:
        self.queues[_prio(item)].append(item)
        self._sorts_dirty = True

    def pop(self) -> Optional[QItem]:
        for q in self.queues:
            if q:
                self._sorts_dirty = True
                return q.popleft()
        return None

    def park(self, c: Constraint) -> None:
        self.parked.append((frozenset(_constraint_vars(c)), c))
        self._sorts_dirty = True

    def apply_bind(self, delta: dict[str, Term]) -> bool:
        self.subst = compose(self.subst, delta)
        keys = set(delta)
        kept = []
        for vs, c in self.parked:
            if vs & keys:
                # Woken constraints jump their queue: a parked constraint
                # becomes reducible exactly when a binding touches it, and
                # letting it run before older generative items fails doomed
                # branches early.
                self.queues[_prio(c)].appendleft(c)
            else:
                kept.append((vs, c))
        self.parked = kept
        for name in delta:
            if name in self.arith.vars():
                t = subst_term(self.subst, Var(name))
                if isinstance(t, Int):
                    self.arith.assert_eq(arith.lower(Var(name)) - arith.lower(t))
                elif isinstance(t, Var):
                    if t.name != name:
                        self.arith.assert_eq(arith.lower(Var(name)) - arith.lower(t))
                else:
                    return False  # an arithmetic variable bound to a non-integer
        self._sorts_dirty = True
        return True

    def _scan_sorts(self) -> None:
        sset: set[str] = set()
        sint: set[str] = set(self.arith.vars())
        items: list[QItem] = [c for _, c in self.parked]
        for q in self.queues:
            items.extend(q)
        for it in items:
            if isinstance(it, OrNode):
                continue
            c = it
            if c.q is not None:
                d = subst_term(self.subst, c.q.domain)
                if isinstance(d, Var):
                    sset.add(d.name)
                continue
            for i, a in enumerate(c.args):
                if not isinstance(a, Term):
                    for v in _aexpr_vars(a):
                        sint.add(v)
                    continue
                a = subst_term(self.subst, a)
                if isinstance(a, Interval):
                    for b in (a.lo, a.hi):
                        if isinstance(b, Var):
                            sint.add(b.name)
                if c.kind in ("is", "le", "lt"):
                    sint.update(term_vars(a))
                elif isinstance(a, Var) and i in SET_POS.get(c.kind, ()):
                    sset.add(a.name)
        self._set_sorted = frozenset(sset)
        self._int_sorted = frozenset(sint)
        self._sorts_dirty = False

    def set_sorted(self) -> frozenset:
        if self._sorts_dirty:
            self._scan_sorts()
        return self._set_sorted

    def int_sorted(self) -> frozenset:
        if self._sorts_dirty:
            self._scan_sorts()
        return self._int_sorted


def _aexpr_vars(a) -> set[str]:
    if isinstance(a, Term):
        return term_vars(a)
    if isinstance(a, ABin):
        return _aexpr_vars(a.left) | _aexpr_vars(a.right)
    if isinstance(a, ANeg):
        return _aexpr_vars(a.body)
    return set()


def _constraint_vars(c: Constraint) -> set[str]:
    return formula_vars(c)


def _subst_item(store: Store, c: Constraint) -> Constraint:
    return subst_formula(store.subst, c, store.gen)


@dataclass
class Solution:
    bindings: dict[str, Term]
    residual: list[Constraint]
    query_vars: frozenset
    store: Store = field(repr=False)

    def arith_model(self) -> Optional[dict[str, int]]:
        return self.store.arith.model()


@dataclass
class Result:
    solutions: list[Solution]
    complete: bool           # the whole search space was examined
    exhausted_budget: bool
    steps: int

    @property
    def unsat(self) -> bool:
        return self.complete and not self.solutions


def all_var_names(f: Formula) -> set[str]:
    """Every variable name occurring anywhere, bound or free."""
    out: set[str] = set()

    def walk(g: Formula) -> None:
        if isinstance(g, Constraint):
            for a in g.args:
                out.update(_aexpr_vars(a))
            if g.q is not None:
                out.update(term_vars(g.q.binder))
                out.update(term_vars(g.q.domain))
                out.update(g.q.locals)
                walk(g.q.body)
                if g.q.funcs is not None:
                    walk(g.q.funcs)
        elif isinstance(g, (And, Or)):
            for p in g.parts:
                walk(p)
        elif isinstance(g, Neg):
            walk(g.body)
        elif isinstance(g, Implies):
            walk(g.left)
            walk(g.right)
        elif isinstance(g, PredCall):
            for a in g.args:
                out.update(_aexpr_vars(a))

    walk(f)
    return out


def prepare(formula: Formula, program: Optional[Program], gen: VarGen) -> Formula:
    gen.bump_past(all_var_names(formula))
    f = nnf(formula, gen, program)
    if program is not None:
        # Clause bodies may carry implications and negations of their own.
        f = nnf(expand_calls(f, program, gen), gen, program)
    gen.bump_past(all_var_names(f))
    return f


def solve(formula: Formula, program: Optional[Program] = None, *,
          budget: int = 200_000, max_solutions: int = 1,
          gen: Optional[VarGen] = None,
          query_vars: Optional[set[str]] = None,
          trace=None) -> Result:
    gen = gen or VarGen()
    if query_vars is None:
        query_vars = formula_vars(formula)
    f = prepare(formula, program, gen)
    root = Store(gen)
    init = items_of(f)
    steps = 0
    if init is None:
        return Result([], True, False, steps)
    for it in init:
        root.enqueue(it)

    stack: list[Store] = [root]
    sols: list[Solution] = []
    exhausted = False

    while stack:
        store = stack.pop()
        dead = False
        while not dead:
            if steps >= budget:
                exhausted = True
                break
            item = store.pop()
            if item is None:
                sol = _extract(store, query_vars)
                if sol is not None:
                    sols.append(sol)
                break
            steps += 1
            if isinstance(item, OrNode):
                branches = []
                for alt in item.alts:
                    g = subst_formula(store.subst, alt, store.gen)
                    sub = items_of(g)
                    if sub is not None:
                        branches.append(sub)
                if trace:
                    trace("or", alts=len(branches))
                if not branches:
                    dead = True
                    break
                for sub in reversed(branches[1:]):
                    s2 = store.clone()
                    for it in sub:
                        s2.enqueue(it)
                    stack.append(s2)
                for it in branches[0]:
                    store.enqueue(it)
                continue
            c = _subst_item(store, item)
            out = rewrite(c, store)
            if trace:
                trace(c.kind, constraint=c,
                      result=("park" if out is None else len(out)))
            if out is None:
                store.park(c)
                continue
            if not out:
                dead = True
                break
            rest = out[1:]
            for branch in reversed(rest):
                s2 = store.clone()
                if _apply_branch(s2, branch):
                    stack.append(s2)
            if not _apply_branch(store, out[0]):
                dead = True
                break
        if exhausted:
            break
        if sols and len(sols) >= max_solutions:
            break

    complete = (not exhausted) and not stack
    return Result(sols, complete, exhausted, steps)


def _apply_branch(store: Store, branch: list) -> bool:
    for em in branch:
        if isinstance(em, Bind):
            if not store.apply_bind(dict(em.delta)):
                return False
        elif isinstance(em, Constraint):
            store.enqueue(em)
        elif isinstance(em, (And, Or, TrueF, FalseF)):
            sub = items_of(em)
            if sub is None:
                return False
            for it in sub:
                store.enqueue(it)
        else:
            raise IllFormed(f"bad emission {type(em).__name__}")
    if store.arith.failed:
        return False
    return True


def _extract(store: Store, query_vars: set[str]) -> Optional[Solution]:
    if store.arith.consistent(budget=4096) is False:
        return None
    bindings = {}
    for v in sorted(query_vars):
        t = subst_term(store.subst, Var(v))
        if t != Var(v):
            bindings[v] = t
    residual = [_subst_item(store, c) for _, c in store.parked]
    return Solution(bindings, residual, frozenset(query_vars), store)


# --- grounding completion ----------------------------------------------------

def ground_complete(sol: Solution, hints: Optional[dict[str, list[Term]]] = None,
                    tries: int = 4000) -> Optional[dict[str, Term]]:
    """Extend an answer to a fully ground witness, or return None.

    Unbound variables are filled from carrier hints, the arithmetic model,
    or small default pools; the parked residue is then evaluated on the
    candidate.  Success certifies the answer as a genuine solution.
    """
    hints = hints or {}
    store = sol.store
    need: set[str] = set()
    for t in sol.bindings.values():
        need |= term_vars(t)
    for c in sol.residual:
        need |= _constraint_vars(c)
    for v in sol.query_vars:
        if v not in store.subst:
            need.add(v)
    if not need:
        return dict(sol.bindings) if _residual_ok(sol.residual, {}) else None

    model = store.arith.model()
    int_sorted = set(store.int_sorted())
    set_sorted = set(store.set_sorted())
    # Variables sitting in structural positions of the answer terms carry
    # their sort with them: set tails must be sets, interval bounds integers.
    stack = list(sol.bindings.values())
    for c in sol.residual:
        stack.extend(a for a in c.args if isinstance(a, Term))
    while stack:
        t = stack.pop()
        if isinstance(t, ExtSet):
            if isinstance(t.tail, Var):
                set_sorted.add(t.tail.name)
            stack.append(t.head)
            stack.append(t.tail)
        elif isinstance(t, Pair):
            stack.append(t.first)
            stack.append(t.second)
        elif isinstance(t, CP):
            for s in (t.left, t.right):
                if isinstance(s, Var):
                    set_sorted.add(s.name)
                stack.append(s)
        elif isinstance(t, Interval):
            for s in (t.left, t.right):
                if isinstance(s, Var):
                    int_sorted.add(s.name)

    a1, a2 = Atom("_e1"), Atom("_e2")
    pools: list[tuple[str, list[Term]]] = []
    for i, v in enumerate(sorted(need)):
        if v in hints:
            pools.append((v, list(hints[v])))
        elif v in store.arith.vars():
            if model is None:
                return None  # arithmetic residue with no certified model
            pools.append((v, [Int(model[v])] if v in model
                          else [Int(0), Int(1), Int(-1), Int(2)]))
        elif v in int_sorted:
            pools.append((v, [Int(0), Int(1), Int(-1), Int(2)]))
        elif v in set_sorted:
            pools.append((v, [EMPTY, mkset([a1]), mkset([a2]), mkset([a1, a2])]))
        else:
            own = Atom(f"_e{i + 3}")
            pools.append((v, [own, a1, EMPTY, Int(0)]))

    count = [0]

    def leaf(fill: dict[str, Term]) -> Optional[dict[str, Term]]:
        if not _residual_ok(sol.residual, fill):
            return None
        out = {}
        try:
            for v, t in sol.bindings.items():
                g = subst_term(fill, t)
                if not is_ground(g):
                    return None
                out[v] = g
        except ValueError:
            return None  # a candidate landed in an ill-typed position
        for v, t in fill.items():
            out.setdefault(v, t)
        return out

    def rec(idx: int, fill: dict[str, Term]) -> Optional[dict[str, Term]]:
        if idx == len(pools):
            return leaf(fill)
        name, cands = pools[idx]
        for cand in cands:
            count[0] += 1
            if count[0] > tries:
                return None
            fill[name] = cand
            got = rec(idx + 1, fill)
            if got is not None:
                return got
            del fill[name]
        return None

    return rec(0, {})


def _residual_ok(residual: list[Constraint], fill: dict[str, Term]) -> bool:
    for c in residual:
        try:
            g = subst_formula(fill, c, VarGen())
            if not groundeval.eval_formula(g):
                return False
        except (groundeval.NotGround, ValueError):
            return False
    return True
