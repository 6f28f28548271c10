"""Constraint and formula AST shared by the solver, parsers and verifier."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Optional, Sequence, Union

from .terms import Term, Var, VarGen, subst_term, term_vars

# The primitive constraint kinds.  Every ``nX`` is the exact complement of
# ``X``.  ``npair`` is internal: it is emitted by negative rewrite rules and
# never appears in surface syntax.
KINDS = frozenset(
    {
        "eq", "neq", "in", "nin",
        "un", "nun", "disj", "ndisj", "subset", "nsubset",
        "comp", "ncomp", "inv", "ninv", "id", "nid",
        "pfun", "npfun", "dom", "ndom", "ran", "nran",
        "applyTo", "foplus",
        "le", "lt", "is",
        "foreach", "exists",
        "npair",
        "dec",
    }
)

ARITY = {
    "eq": 2, "neq": 2, "in": 2, "nin": 2,
    "un": 3, "nun": 3, "disj": 2, "ndisj": 2, "subset": 2, "nsubset": 2,
    "comp": 3, "ncomp": 3, "inv": 2, "ninv": 2, "id": 2, "nid": 2,
    "pfun": 1, "npfun": 1, "dom": 2, "ndom": 2, "ran": 2, "nran": 2,
    "applyTo": 3, "foplus": 4,
    "le": 2, "lt": 2, "is": 2,
    "npair": 1,
    "dec": 2,
}


class Formula:
    __slots__ = ()


@dataclass(frozen=True, slots=True)
class TrueF(Formula):
    pass


@dataclass(frozen=True, slots=True)
class FalseF(Formula):
    pass


TRUE = TrueF()
FALSE = FalseF()


@dataclass(frozen=True, slots=True)
class QPayload:
    """Quantifier payload: binder pattern, domain, locals, body, let-part.

    ``binder`` is a Var or a Pair of Vars.  ``locals`` are instantiated fresh
    at every expansion step.  ``funcs`` holds the functional predicates of the
    four-argument form (the "let" conjuncts); None for the two-argument form.
    """

    binder: Term
    domain: Term
    locals: tuple[str, ...]
    body: Formula
    funcs: Optional[Formula] = None


@dataclass(frozen=True, slots=True)
class Constraint(Formula):
    kind: str
    args: tuple = ()
    q: Optional[QPayload] = None
    delayed: bool = False

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown constraint kind: {self.kind}")
        if self.kind in ("foreach", "exists"):
            if self.q is None:
                raise ValueError(f"{self.kind} needs a quantifier payload")
        elif len(self.args) != ARITY[self.kind]:
            raise ValueError(f"{self.kind} expects {ARITY[self.kind]} args")


@dataclass(frozen=True, slots=True)
class And(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Or(Formula):
    parts: tuple[Formula, ...]


@dataclass(frozen=True, slots=True)
class Neg(Formula):
    body: Formula


@dataclass(frozen=True, slots=True)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, slots=True)
class PredCall(Formula):
    """Call to a user-defined predicate; expanded by inlining its clause."""

    name: str
    args: tuple[Term, ...]


@dataclass(frozen=True, slots=True)
class Clause:
    name: str
    params: tuple[str, ...]
    body: Formula


@dataclass(frozen=True, slots=True)
class Program:
    """Clause database plus the typing directives collected from a file."""

    clauses: dict[tuple[str, int], Clause] = field(default_factory=dict)
    pred_types: dict[tuple[str, int], tuple] = field(default_factory=dict)
    type_defs: dict[str, object] = field(default_factory=dict)
    queries: tuple[Formula, ...] = ()

    def lookup(self, name: str, arity: int) -> Optional[Clause]:
        return self.clauses.get((name, arity))


def conj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, TrueF):
            continue
        if isinstance(p, And):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def disj(parts: Iterable[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, FalseF):
            continue
        if isinstance(p, Or):
            flat.extend(p.parts)
        else:
            flat.append(p)
    if not flat:
        return FALSE
    if len(flat) == 1:
        return flat[0]
    return Or(tuple(flat))


def C(kind: str, *args, q: Optional[QPayload] = None, delayed: bool = False) -> Constraint:
    return Constraint(kind, tuple(args), q=q, delayed=delayed)


def binder_names(binder: Term) -> tuple[str, ...]:
    from .terms import Pair

    if isinstance(binder, Var):
        return (binder.name,)
    if isinstance(binder, Pair) and isinstance(binder.first, Var) and isinstance(binder.second, Var):
        return (binder.first.name, binder.second.name)
    raise ValueError(f"invalid quantifier binder: {binder!r}")


def formula_vars(f: Formula) -> set[str]:
    """Free variables of a formula (quantifier binders and locals removed)."""
    if isinstance(f, Constraint):
        if f.q is not None:
            out = term_vars(f.q.domain)
            bound = set(binder_names(f.q.binder)) | set(f.q.locals)
            inner = formula_vars(f.q.body)
            if f.q.funcs is not None:
                inner |= formula_vars(f.q.funcs)
            out |= inner - bound
            return out
        out = set()
        for a in f.args:
            out |= _arg_vars(a)
        return out
    if isinstance(f, (And, Or)):
        out = set()
        for p in f.parts:
            out |= formula_vars(p)
        return out
    if isinstance(f, Neg):
        return formula_vars(f.body)
    if isinstance(f, Implies):
        return formula_vars(f.left) | formula_vars(f.right)
    if isinstance(f, PredCall):
        out = set()
        for a in f.args:
            out |= term_vars(a)
        return out
    return set()


def _arg_vars(a) -> set[str]:
    from . import arith

    if isinstance(a, Term):
        return term_vars(a)
    if isinstance(a, arith.ABin):
        return _arg_vars(a.left) | _arg_vars(a.right)
    if isinstance(a, arith.ANeg):
        return _arg_vars(a.body)
    return set()


def subst_formula(s: dict[str, Term], f: Formula, gen: VarGen) -> Formula:
    """Capture-avoiding substitution into a formula."""
    if not s:
        return f
    if isinstance(f, Constraint):
        if f.q is not None:
            return _subst_quant(s, f, gen)
        return Constraint(f.kind, tuple(_subst_arg(s, a) for a in f.args), delayed=f.delayed)
    if isinstance(f, And):
        return And(tuple(subst_formula(s, p, gen) for p in f.parts))
    if isinstance(f, Or):
        return Or(tuple(subst_formula(s, p, gen) for p in f.parts))
    if isinstance(f, Neg):
        return Neg(subst_formula(s, f.body, gen))
    if isinstance(f, Implies):
        return Implies(subst_formula(s, f.left, gen), subst_formula(s, f.right, gen))
    if isinstance(f, PredCall):
        return PredCall(f.name, tuple(subst_term(s, a) for a in f.args))
    return f


def _subst_arg(s: dict[str, Term], a):
    from . import arith

    if isinstance(a, Term):
        return subst_term(s, a)
    if isinstance(a, arith.ABin):
        return arith.ABin(a.op, _subst_arg(s, a.left), _subst_arg(s, a.right))
    if isinstance(a, arith.ANeg):
        return arith.ANeg(_subst_arg(s, a.body))
    return a


def _subst_quant(s: dict[str, Term], f: Constraint, gen: VarGen) -> Constraint:
    q = f.q
    assert q is not None
    bound = set(binder_names(q.binder)) | set(q.locals)
    inner = {k: v for k, v in s.items() if k not in bound}
    domain = subst_term(s, q.domain)
    if not inner:
        return Constraint(f.kind, (), q=QPayload(q.binder, domain, q.locals, q.body, q.funcs),
                          delayed=f.delayed)
    # Rename bound names that would capture variables of the incoming terms.
    incoming: set[str] = set()
    for v in inner.values():
        incoming |= term_vars(v)
    renames: dict[str, Term] = {}
    for name in sorted(bound):
        if name in incoming:
            renames[name] = gen.fresh()
    binder = subst_term(renames, q.binder) if renames else q.binder
    locals_ = tuple(renames[n].name if n in renames else n for n in q.locals)
    body = q.body
    funcs = q.funcs
    if renames:
        body = subst_formula(renames, body, gen)
        if funcs is not None:
            funcs = subst_formula(renames, funcs, gen)
    body = subst_formula(inner, body, gen)
    if funcs is not None:
        funcs = subst_formula(inner, funcs, gen)
    return Constraint(f.kind, (), q=QPayload(binder, domain, locals_, body, funcs),
                      delayed=f.delayed)


class IllFormed(Exception):
    """Raised for structurally bad input: unknown predicates, bad arities,
    recursive clause expansion, malformed quantifiers."""


def expand_calls(f: Formula, program: Optional[Program], gen: VarGen,
                 _stack: tuple = ()) -> Formula:
    """Inline user-predicate calls.  Clause-local variables are renamed fresh
    at every expansion, which makes them implicitly existential."""
    if isinstance(f, PredCall):
        if program is None:
            raise IllFormed(f"unknown predicate {f.name}/{len(f.args)}")
        key = (f.name, len(f.args))
        if key in _stack:
            raise IllFormed(f"recursive predicate {f.name}/{len(f.args)} cannot be expanded")
        clause = program.lookup(f.name, len(f.args))
        if clause is None:
            raise IllFormed(f"unknown predicate {f.name}/{len(f.args)}")
        body, _ = instantiate_clause(clause, f.args, gen)
        return expand_calls(body, program, gen, _stack + (key,))
    if isinstance(f, And):
        return conj(expand_calls(p, program, gen, _stack) for p in f.parts)
    if isinstance(f, Or):
        return disj(expand_calls(p, program, gen, _stack) for p in f.parts)
    if isinstance(f, Neg):
        return Neg(expand_calls(f.body, program, gen, _stack))
    if isinstance(f, Implies):
        return Implies(expand_calls(f.left, program, gen, _stack),
                       expand_calls(f.right, program, gen, _stack))
    if isinstance(f, Constraint) and f.q is not None:
        q = f.q
        body = expand_calls(q.body, program, gen, _stack)
        funcs = expand_calls(q.funcs, program, gen, _stack) if q.funcs is not None else None
        return Constraint(f.kind, (), q=QPayload(q.binder, q.domain, q.locals, body, funcs),
                          delayed=f.delayed)
    return f


def instantiate_clause(clause: Clause, args: Sequence[Term], gen: VarGen):
    """Clause body with parameters bound to ``args`` and body-local variables
    renamed fresh.  Returns (formula, local-name mapping)."""
    if len(args) != len(clause.params):
        raise IllFormed(
            f"predicate {clause.name}/{len(clause.params)} called with {len(args)} arguments")
    locals_ = sorted(formula_vars(clause.body) - set(clause.params))
    ren = {name: gen.fresh() for name in locals_}
    s: dict[str, Term] = dict(zip(clause.params, args))
    s.update(ren)
    return subst_formula(s, clause.body, gen), ren
