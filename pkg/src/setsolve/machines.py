"""State machine files (.smch): parsing and translation to constraints.

A machine file declares carrier sets, typed state variables, invariants,
an initialisation, and guarded events:

    machine gears
    context
      positionsdg = {front, right, left}
    end
    variables
      gear_ext_p : stype([positionsdg, bool])
    end
    invariants
      inv1: pfun(gear_ext_p) & dom(gear_ext_p, positionsdg)
    end
    init
      act1: gear_ext_p := cp(positionsdg, {true})
    end
    event make_GearExtended
      any po
      where
        grd1: po in positionsdg & gear_ext_p(po) = false
      then
        act1: gear_ext_p(po) := true
      end

Identifier case carries no meaning here; names are resolved by scope.  A name
denotes a state variable, event parameter, quantifier binder or carrier set
when one is in scope, and an atom otherwise.  Comments start with ``#``.

Guards and invariants use the constraint language, extended with function
application ``f(x)``.  Applications are not terms of the core language, so
they are compiled away: ``f(x)`` becomes a fresh variable ``m`` constrained
by ``applyTo(f, x, m)``.  Inside a quantifier the application constraints
move to the functional slot of the quantifier and the fresh variables become
its locals.  Every application produced this way is kept as a
well-definedness obligation.

Actions come in two forms.  ``x := e`` binds the next-state variable ``x_``
(plain ``x`` in the initialisation), and ``f(k) := v`` is functional
override, compiled to ``foplus(f, k, v, f_)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .arith import ABin, ANeg
from .formulas import (
    ARITY, C, Constraint, FalseF, Formula, Implies, KINDS, Neg, Or, QPayload,
    TrueF, conj, disj,
)
from .parser import ParseError, Tok
from .terms import (
    CP, Atom, EMPTY, ExtSet, Int, Interval, Pair, Str, Term, Var, mkset,
    term_vars,
)
from .typecheck import TBasic, TEnum, TInt, TProd, TSet, TStr

_KEYWORDS = frozenset((
    "machine", "context", "variables", "invariants", "init",
    "event", "any", "where", "then", "end",
))

# Names that cannot be declared as variables, carriers or parameters.
_RESERVED = frozenset(KINDS) | _KEYWORDS | frozenset((
    "or", "implies", "neg", "true", "false", "cp", "int", "str",
    "etype", "stype", "div", "mod", "delay", "dec",
))


# --- surface structure -------------------------------------------------------

@dataclass(frozen=True)
class Carrier:
    name: str
    members: Optional[tuple[str, ...]]  # None for an abstract carrier


@dataclass(frozen=True)
class MachineVar:
    name: str
    ty: Optional[object]  # a typecheck type, or None when undeclared


@dataclass(frozen=True)
class Invariant:
    label: str
    formula: Formula


@dataclass(frozen=True)
class WDOcc:
    """One function application occurrence, kept for well-definedness.

    ``apply`` is the generated applyTo constraint; its first two arguments
    (function and point) define the obligation.  ``binders`` is the chain of
    enclosing quantifier binders with their domains, outermost first, and
    ``pre`` collects the conjuncts of the same guard that were already
    established when the application was read.
    """
    apply: Constraint
    binders: tuple[tuple[Term, Term], ...]
    pre: Formula
    site: str


@dataclass(frozen=True)
class Guard:
    label: str
    formula: Formula
    wd: tuple[WDOcc, ...]


@dataclass(frozen=True)
class Action:
    label: str
    writes: str
    formula: Formula
    wd: tuple[WDOcc, ...]


@dataclass(frozen=True)
class Event:
    name: str
    params: tuple[str, ...]
    guards: tuple[Guard, ...]
    actions: tuple[Action, ...]

    def writes(self) -> tuple[str, ...]:
        return tuple(a.writes for a in self.actions)


@dataclass(frozen=True)
class Machine:
    name: str
    carriers: tuple[Carrier, ...]
    variables: tuple[MachineVar, ...]
    invariants: tuple[Invariant, ...]
    init: tuple[Action, ...]
    events: tuple[Event, ...]

    def var_names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def event(self, name: str) -> Event:
        for ev in self.events:
            if ev.name == name:
                return ev
        raise KeyError(name)

    def invariant(self, label: str) -> Invariant:
        for inv in self.invariants:
            if inv.label == label:
                return inv
        raise KeyError(label)


class MachineError(ParseError):
    pass


# --- tokenizer ---------------------------------------------------------------

_PUNCT2 = (":=", "=<", ">=")
_PUNCT1 = "()[]{},/=<>&:+-*"


def _tokenize(text: str) -> list[Tok]:
    toks: list[Tok] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == '"':
            j = i + 1
            out = []
            while j < n and text[j] != '"':
                if text[j] == "\\" and j + 1 < n:
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}
                               .get(text[j + 1], text[j + 1]))
                    j += 2
                else:
                    out.append(text[j])
                    j += 1
            if j >= n:
                raise MachineError("unterminated string", line, col)
            toks.append(Tok("str", "".join(out), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if text[i:i + 2] in _PUNCT2:
            toks.append(Tok("punct", text[i:i + 2], line, col))
            i += 2
            col += 2
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Tok("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT1:
            toks.append(Tok("punct", ch, line, col))
            i += 1
            col += 1
            continue
        raise MachineError(f"unexpected character {ch!r}", line, col)
    toks.append(Tok("eof", "", line, col))
    return toks


_INFIX = {
    "=": ("eq", False), "neq": ("neq", False),
    "in": ("in", False), "nin": ("nin", False),
    "is": ("is", False),
    "=<": ("le", False), "<": ("lt", False),
    ">=": ("le", True), ">": ("lt", True),
}


# --- parser ------------------------------------------------------------------

class _MParser:
    def __init__(self, text: str):
        self.toks = _tokenize(text)
        self.i = 0
        self.mvars: dict[str, Optional[object]] = {}
        self.carriers: dict[str, Optional[tuple[str, ...]]] = {}
        self.scopes: list[set[str]] = []          # event params, binders
        self.frames: list[list[tuple[Constraint, tuple]]] = []
        self.binders: list[tuple[Term, Term]] = []
        self.occs: list[WDOcc] = []
        self.site = ""
        self.lift_vars: set[str] = set()
        self.m_counter = 0
        self.in_init = False

    # token helpers

    def peek(self, ahead: int = 0) -> Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, val: str) -> Tok:
        t = self.next()
        if t.val != val:
            raise MachineError(f"expected {val!r}, found {t.val!r}", t.line, t.col)
        return t

    def at(self, val: str) -> bool:
        return self.peek().val == val

    def err(self, msg: str) -> MachineError:
        t = self.peek()
        return MachineError(msg, t.line, t.col)

    def name_tok(self, what: str) -> Tok:
        t = self.next()
        if t.kind != "name":
            raise MachineError(f"expected {what}, found {t.val!r}", t.line, t.col)
        return t

    def declare(self, t: Tok, what: str) -> str:
        if t.val in _RESERVED:
            raise MachineError(f"{t.val!r} is reserved and cannot name a {what}",
                               t.line, t.col)
        if t.val.endswith("_"):
            raise MachineError("names ending in _ are reserved for next-state "
                               "variables", t.line, t.col)
        return t.val

    # scope

    def in_scope(self, name: str) -> bool:
        if name in self.mvars or name in self.carriers:
            return True
        return any(name in s for s in self.scopes)

    def resolve(self, t: Tok) -> Term:
        if t.val.endswith("_"):
            raise MachineError("names ending in _ are reserved for next-state "
                               "variables", t.line, t.col)
        if self.in_scope(t.val):
            return Var(t.val)
        return Atom(t.val)

    def fresh_m(self) -> str:
        while True:
            self.m_counter += 1
            name = f"m{self.m_counter}"
            if not self.in_scope(name):
                self.lift_vars.add(name)
                return name

    # --- machine structure ---------------------------------------------------

    def machine(self) -> Machine:
        self.expect("machine")
        name = self.declare(self.name_tok("a machine name"), "machine")
        carriers: list[Carrier] = []
        variables: list[MachineVar] = []
        invariants: list[Invariant] = []
        init: list[Action] = []
        events: list[Event] = []
        seen: set[str] = set()
        while self.peek().kind != "eof":
            t = self.peek()
            if t.val in ("context", "variables", "invariants", "init"):
                if t.val in seen:
                    raise MachineError(f"duplicate {t.val} block", t.line, t.col)
                seen.add(t.val)
            if self.at("context"):
                self.next()
                carriers.extend(self.context_block())
            elif self.at("variables"):
                self.next()
                variables.extend(self.variables_block())
            elif self.at("invariants"):
                if not variables:
                    raise self.err("invariants must follow the variables block")
                self.next()
                invariants.extend(self.invariants_block())
            elif self.at("init"):
                if not variables:
                    raise self.err("init must follow the variables block")
                self.next()
                init.extend(self.init_block())
            elif self.at("event"):
                if not variables:
                    raise self.err("events must follow the variables block")
                self.next()
                events.append(self.event_block({e.name for e in events}))
            else:
                raise self.err(f"unexpected {t.val!r} at machine level")
        if not variables:
            raise MachineError("machine has no variables block")
        if not init:
            raise MachineError("machine has no init block")
        assigned = {a.writes for a in init}
        missing = [v.name for v in variables if v.name not in assigned]
        if missing:
            raise MachineError(f"init does not assign {', '.join(missing)}")
        return Machine(name, tuple(carriers), tuple(variables),
                       tuple(invariants), tuple(init), tuple(events))

    def context_block(self) -> list[Carrier]:
        out: list[Carrier] = []
        while not self.at("end"):
            t = self.name_tok("a carrier name")
            name = self.declare(t, "carrier")
            if name in self.carriers or name in self.mvars:
                raise MachineError(f"duplicate name {name!r}", t.line, t.col)
            members: Optional[tuple[str, ...]] = None
            if self.at("="):
                self.next()
                self.expect("{")
                elems = [self.declare(self.name_tok("a member"), "member")]
                while self.at(","):
                    self.next()
                    elems.append(self.declare(self.name_tok("a member"), "member"))
                self.expect("}")
                if len(elems) < 2:
                    raise MachineError("a carrier needs at least two members",
                                       t.line, t.col)
                if len(set(elems)) != len(elems):
                    raise MachineError("carrier members must be distinct",
                                       t.line, t.col)
                members = tuple(elems)
            self.carriers[name] = members
            out.append(Carrier(name, members))
        self.expect("end")
        return out

    def variables_block(self) -> list[MachineVar]:
        out: list[MachineVar] = []
        while not self.at("end"):
            t = self.name_tok("a variable name")
            name = self.declare(t, "variable")
            if name in self.mvars or name in self.carriers:
                raise MachineError(f"duplicate name {name!r}", t.line, t.col)
            ty = None
            if self.at(":"):
                self.next()
                ty = self.type_expr()
            self.mvars[name] = ty
            out.append(MachineVar(name, ty))
        self.expect("end")
        return out

    def invariants_block(self) -> list[Invariant]:
        out: list[Invariant] = []
        labels: set[str] = set()
        while not self.at("end"):
            label = self.label(labels)
            f, _ = self.body(label)
            out.append(Invariant(label, f))
        self.expect("end")
        return out

    def init_block(self) -> list[Action]:
        out: list[Action] = []
        labels: set[str] = set()
        self.in_init = True
        try:
            while not self.at("end"):
                label = self.label(labels)
                out.append(self.action(label, primed=False))
        finally:
            self.in_init = False
        self.expect("end")
        seen: set[str] = set()
        for a in out:
            if a.writes in seen:
                raise MachineError(f"init assigns {a.writes} twice")
            seen.add(a.writes)
        return out

    def event_block(self, taken: set[str]) -> Event:
        t = self.name_tok("an event name")
        name = self.declare(t, "event")
        if name in taken:
            raise MachineError(f"duplicate event {name!r}", t.line, t.col)
        params: list[str] = []
        if self.at("any"):
            self.next()
            while True:
                p = self.name_tok("a parameter name")
                pname = self.declare(p, "parameter")
                if self.in_scope(pname) or pname in params:
                    raise MachineError(f"parameter {pname!r} shadows another name",
                                       p.line, p.col)
                params.append(pname)
                if self.at(","):
                    self.next()
                    continue
                break
        self.scopes.append(set(params))
        guards: list[Guard] = []
        actions: list[Action] = []
        labels: set[str] = set()
        try:
            if self.at("where"):
                self.next()
                while not self.at("then") and not self.at("end"):
                    label = self.label(labels)
                    f, wd = self.body(label)
                    guards.append(Guard(label, f, wd))
            if self.at("then"):
                self.next()
                while not self.at("end"):
                    label = self.label(labels)
                    actions.append(self.action(label, primed=True))
        finally:
            self.scopes.pop()
        self.expect("end")
        seen: set[str] = set()
        for a in actions:
            if a.writes in seen:
                raise MachineError(f"event {name} assigns {a.writes} twice")
            seen.add(a.writes)
        return Event(name, tuple(params), tuple(guards), tuple(actions))

    def label(self, taken: set[str]) -> str:
        t = self.name_tok("a label")
        if t.val in taken:
            raise MachineError(f"duplicate label {t.val!r}", t.line, t.col)
        if t.val in _KEYWORDS:
            raise MachineError(f"{t.val!r} cannot be a label", t.line, t.col)
        taken.add(t.val)
        self.expect(":")
        return t.val

    # --- types ----------------------------------------------------------------

    def type_expr(self):
        t = self.peek()
        if self.at("["):
            self.next()
            parts = [self.type_expr()]
            while self.at(","):
                self.next()
                parts.append(self.type_expr())
            self.expect("]")
            if len(parts) < 2:
                raise MachineError("product type needs at least two components",
                                   t.line, t.col)
            return TProd(tuple(parts))
        if t.kind != "name":
            raise self.err(f"expected a type, found {t.val!r}")
        self.next()
        if t.val == "int":
            return TInt()
        if t.val == "str":
            return TStr()
        if t.val == "stype":
            self.expect("(")
            inner = self.type_expr()
            self.expect(")")
            return TSet(inner)
        if t.val == "etype":
            self.expect("(")
            self.expect("[")
            members = [self.name_tok("an atom").val]
            while self.at(","):
                self.next()
                members.append(self.name_tok("an atom").val)
            self.expect("]")
            self.expect(")")
            if len(members) < 2:
                raise MachineError("etype needs at least two members", t.line, t.col)
            return TEnum(tuple(members))
        return TBasic(t.val)

    # --- guard and invariant bodies --------------------------------------------

    def body(self, site: str) -> tuple[Formula, tuple[WDOcc, ...]]:
        """Parse one labelled formula, draining lifted applications.

        The top level of the body is treated as a conjunction; application
        constraints generated while reading conjunct k are inserted before it
        and remember conjuncts 1..k-1 as their established context.
        """
        self.site = site
        self.frames.append([])
        self.occs = []
        items: list[Formula] = []
        parts: list[Formula] = []
        lifted: list[Formula] = []
        while True:
            pre = conj(list(items)) if items else TrueF()
            f = self.prim_formula()
            for (c, chain) in self.drain():
                self.occs.append(WDOcc(c, chain, pre, site))
                items.append(c)
                lifted.append(c)
            parts.append(f)
            items.append(f)
            if self.at("&"):
                self.next()
                continue
            break
        if self.at("or") or self.at("implies"):
            # The body is not a plain conjunction after all.  Applications
            # stay hoisted in front; the structure is rebuilt from the parts.
            left: Formula = conj(parts)
            while self.at("or"):
                self.next()
                g = self.and_formula()
                for (c, chain) in self.drain():
                    self.occs.append(WDOcc(c, chain, TrueF(), site))
                    lifted.append(c)
                left = disj([left, g])
            if self.at("implies"):
                self.next()
                rhs = self.formula()
                for (c, chain) in self.drain():
                    self.occs.append(WDOcc(c, chain, TrueF(), site))
                    lifted.append(c)
                left = Implies(left, rhs)
            final = conj(lifted + [left])
        else:
            final = conj(items)
        self.frames.pop()
        final = self.fold(final)
        return final, tuple(self.occs)

    def drain(self) -> list[tuple[Constraint, tuple]]:
        got = list(self.frames[-1])
        self.frames[-1].clear()
        return got

    def fold(self, f: Formula) -> Formula:
        """Merge ``applyTo(f, x, m) & m = t`` into ``applyTo(f, x, t)``.

        Only fires when m is a generated variable used exactly twice, both
        times as immediate conjuncts: the lift and a defining equality.
        """
        from .formulas import And

        if not isinstance(f, And):
            return f
        items = list(f.parts)

        def var_count(name: str) -> int:
            total = 0
            for g in items:
                total += _count_var(g, name)
            return total

        changed = True
        while changed:
            changed = False
            for i, g in enumerate(items):
                if not (isinstance(g, Constraint) and g.kind == "applyTo"):
                    continue
                out = g.args[2]
                if not (isinstance(out, Var) and out.name in self.lift_vars):
                    continue
                for j, h in enumerate(items):
                    if j == i or not (isinstance(h, Constraint) and h.kind == "eq"):
                        continue
                    a, b = h.args
                    other = None
                    if a == out and isinstance(b, Term) and out.name not in term_vars(b):
                        other = b
                    elif b == out and isinstance(a, Term) and out.name not in term_vars(a):
                        other = a
                    if other is None:
                        continue
                    if var_count(out.name) != 2:
                        continue
                    items[i] = Constraint("applyTo", (g.args[0], g.args[1], other))
                    del items[j]
                    changed = True
                    break
                if changed:
                    break
        return conj(items)

    # --- formulas ---------------------------------------------------------------

    def formula(self) -> Formula:
        left = self.or_formula()
        if self.at("implies"):
            self.next()
            return Implies(left, self.formula())
        return left

    def or_formula(self) -> Formula:
        parts = [self.and_formula()]
        while self.at("or"):
            self.next()
            parts.append(self.and_formula())
        return disj(parts)

    def and_formula(self) -> Formula:
        parts = [self.prim_formula()]
        while self.at("&"):
            self.next()
            parts.append(self.prim_formula())
        return conj(parts)

    def prim_formula(self) -> Formula:
        t = self.peek()
        if t.val == "true" and self.peek(1).val != "(":
            self.next()
            return TrueF()
        if t.val == "false" and self.peek(1).val != "(":
            self.next()
            return FalseF()
        if t.val == "neg" and self.peek(1).val == "(":
            self.next()
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return Neg(f)
        if t.val in ("foreach", "exists") and self.peek(1).val == "(":
            return self.quantifier()
        if self.at("("):
            # A parenthesis can open a formula or an integer expression.
            # Backtracking must also discard any applications lifted while
            # trying the formula reading.
            save = self.i
            save_frame = len(self.frames[-1])
            save_occs = len(self.occs)
            save_m = self.m_counter
            save_lv = set(self.lift_vars)
            try:
                self.next()
                f = self.formula()
                self.expect(")")
                if self.peek().val in _INFIX:
                    raise MachineError("backtrack", t.line, t.col)
                return f
            except ParseError:
                self.i = save
                del self.frames[-1][save_frame:]
                del self.occs[save_occs:]
                self.m_counter = save_m
                self.lift_vars = save_lv
                return self.infix_constraint()
        if t.kind == "name" and t.val in KINDS and not self.in_scope(t.val) \
                and self.peek(1).val == "(":
            if t.val in ("dec", "foplus"):
                raise MachineError(f"{t.val} cannot be used in a machine formula",
                                   t.line, t.col)
            self.next()
            self.expect("(")
            args = [self.expr()]
            while self.at(","):
                self.next()
                args.append(self.expr())
            self.expect(")")
            if ARITY.get(t.val) != len(args):
                raise MachineError(f"{t.val} takes {ARITY.get(t.val)} arguments",
                                   t.line, t.col)
            for x in args:
                if not isinstance(x, Term):
                    raise MachineError(f"{t.val} relates terms, not integer "
                                       "expressions", t.line, t.col)
            return Constraint(t.val, tuple(args))
        return self.infix_constraint()

    def infix_constraint(self) -> Formula:
        t = self.peek()
        a = self.expr()
        op = self.peek()
        if op.val not in _INFIX:
            raise MachineError(f"expected a constraint operator, found {op.val!r}",
                               op.line, op.col)
        self.next()
        b = self.expr()
        kind, swap = _INFIX[op.val]
        if swap:
            a, b = b, a
        if kind in ("eq", "neq", "in", "nin"):
            for x in (a, b):
                if not isinstance(x, Term):
                    raise MachineError(f"{kind} relates terms, not integer "
                                       "expressions", t.line, t.col)
        if kind == "is" and not isinstance(a, Term):
            raise MachineError("the left side of is must be a variable or number",
                               t.line, t.col)
        return Constraint(kind, (a, b))

    def quantifier(self) -> Formula:
        kw = self.next().val
        self.expect("(")
        names: list[str] = []
        if self.at("["):
            self.next()
            t1 = self.name_tok("a binder")
            self.expect(",")
            t2 = self.name_tok("a binder")
            self.expect("]")
            for t in (t1, t2):
                nm = self.declare(t, "binder")
                if self.in_scope(nm) or nm in names:
                    raise MachineError(f"binder {nm!r} shadows another name",
                                       t.line, t.col)
                names.append(nm)
            binder: Term = Pair(Var(names[0]), Var(names[1]))
        else:
            t1 = self.name_tok("a binder")
            nm = self.declare(t1, "binder")
            if self.in_scope(nm):
                raise MachineError(f"binder {nm!r} shadows another name",
                                   t1.line, t1.col)
            names.append(nm)
            binder = Var(nm)
        self.expect("in")
        dom = self.expr()
        if not isinstance(dom, Term):
            raise self.err("a quantifier domain must be a set-valued term")
        self.expect(",")
        self.scopes.append(set(names))
        self.frames.append([])
        self.binders.append((binder, dom))
        try:
            body = self.formula()
        finally:
            frame = self.frames.pop()
            self.scopes.pop()
            self.binders.pop()
        self.expect(")")
        locals_: list[str] = []
        funcs_parts: list[Formula] = []
        for (c, chain) in frame:
            out = c.args[2]
            assert isinstance(out, Var)
            locals_.append(out.name)
            funcs_parts.append(c)
            self.occs.append(WDOcc(c, chain, TrueF(), self.site))
        funcs = conj(funcs_parts) if funcs_parts else None
        return Constraint(kw, (), q=QPayload(binder, dom, tuple(locals_),
                                             body, funcs))

    # --- terms and expressions ---------------------------------------------------

    def expr(self):
        """An integer expression or a term; applications lift on the fly."""
        e = self.addsub()
        return e

    def addsub(self):
        e = self.muldiv()
        while self.at("+") or self.at("-"):
            op = self.next().val
            e = ABin(op, e, self.muldiv())
        return e

    def muldiv(self):
        e = self.unary()
        while self.at("*") or self.at("div") or self.at("mod"):
            op = self.next().val
            e = ABin(op, e, self.unary())
        return e

    def unary(self):
        if self.at("-"):
            nxt = self.peek(1)
            if nxt.kind == "int":
                self.next()
                self.next()
                return Int(-int(nxt.val))
            self.next()
            return ANeg(self.unary())
        if self.at("("):
            self.next()
            e = self.expr()
            self.expect(")")
            return e
        return self.term()

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return Int(int(t.val))
        if t.kind == "str":
            self.next()
            return Str(t.val)
        if self.at("["):
            self.next()
            a = self.term_full()
            self.expect(",")
            b = self.term_full()
            self.expect("]")
            return Pair(a, b)
        if self.at("{"):
            return self.set_term()
        if t.kind != "name":
            raise self.err(f"expected a term, found {t.val!r}")
        if t.val == "cp" and self.peek(1).val == "(" and not self.in_scope(t.val):
            self.next()
            self.expect("(")
            a = self.term_full()
            self.expect(",")
            b = self.term_full()
            self.expect(")")
            return CP(a, b)
        if t.val == "int" and self.peek(1).val == "(" and not self.in_scope(t.val):
            self.next()
            self.expect("(")
            a = self.term_full()
            self.expect(",")
            b = self.term_full()
            self.expect(")")
            if not isinstance(a, (Int, Var)) or not isinstance(b, (Int, Var)):
                raise MachineError("interval bounds must be integers or variables",
                                   t.line, t.col)
            return Interval(a, b)
        self.next()
        ref = self.resolve(t)
        if self.at("(") and isinstance(ref, Var):
            return self.application(ref, t)
        if self.at("("):
            raise MachineError(f"{t.val!r} is not a function or constraint",
                               t.line, t.col)
        return ref

    def application(self, fvar: Var, t: Tok) -> Var:
        if self.in_init:
            raise MachineError("the initialisation cannot read state through "
                               "function application", t.line, t.col)
        self.expect("(")
        arg = self.term_full()
        if self.at(","):
            raise MachineError("function application takes one argument; "
                               "apply to a pair instead", t.line, t.col)
        self.expect(")")
        m = Var(self.fresh_m())
        c = C("applyTo", fvar, arg, m)
        self.frames[-1].append((c, tuple(self.binders)))
        return m

    def term_full(self) -> Term:
        e = self.expr()
        if not isinstance(e, Term):
            raise self.err("expected a term, found an integer expression")
        return e

    def set_term(self) -> Term:
        self.expect("{")
        if self.at("}"):
            self.next()
            return EMPTY
        elems = [self.term_full()]
        while self.at(","):
            self.next()
            elems.append(self.term_full())
        tail: Term = EMPTY
        if self.at("/"):
            self.next()
            tail = self.term_full()
            if not isinstance(tail, (Var, ExtSet)) and tail != EMPTY:
                raise self.err("set tail must be a variable or a set")
        self.expect("}")
        return mkset(elems, tail)

    # --- actions --------------------------------------------------------------

    def action(self, label: str, primed: bool) -> Action:
        self.site = label
        self.frames.append([])
        self.occs = []
        t = self.name_tok("an assignment target")
        if t.val not in self.mvars:
            raise MachineError(f"{t.val!r} is not a state variable", t.line, t.col)
        target = t.val
        nxt = Var(target + "_") if primed else Var(target)
        lifted: list[Formula] = []

        def drain_all() -> None:
            for (c, chain) in self.drain():
                self.occs.append(WDOcc(c, chain, conj(list(lifted)) if lifted
                                       else TrueF(), label))
                lifted.append(c)

        if self.at("("):
            if not primed:
                raise self.err("the initialisation cannot use functional override")
            self.next()
            key_e = self.expr()
            self.expect(")")
            self.expect(":=")
            val_e = self.expr()
            drain_all()
            key = self.lowered(key_e, lifted)
            val = self.lowered(val_e, lifted)
            core: Formula = C("foplus", Var(target), key, val, nxt)
        else:
            self.expect(":=")
            e = self.expr()
            drain_all()
            if isinstance(e, Term):
                core = C("eq", nxt, e)
            else:
                core = Constraint("is", (nxt, e))
        self.frames.pop()
        f = self.fold(conj(lifted + [core]))
        return Action(label, target, f, tuple(self.occs))

    def lowered(self, e, lifted: list[Formula]) -> Term:
        """Name an integer expression so it can sit in a term position."""
        if isinstance(e, Term):
            return e
        m = Var(self.fresh_m())
        lifted.append(Constraint("is", (m, e)))
        return m


def _count_var(f: Formula, name: str) -> int:
    """Occurrences of a variable in a formula, counted syntactically."""
    from .formulas import And, PredCall

    def ct(t) -> int:
        if isinstance(t, Var):
            return 1 if t.name == name else 0
        if isinstance(t, Pair):
            return ct(t.first) + ct(t.second)
        if isinstance(t, ExtSet):
            return ct(t.head) + ct(t.tail)
        if isinstance(t, (CP, Interval)):
            return ct(t.left) + ct(t.right)
        if isinstance(t, ABin):
            return ct(t.left) + ct(t.right)
        if isinstance(t, ANeg):
            return ct(t.arg)
        return 0

    if isinstance(f, Constraint):
        total = sum(ct(a) for a in f.args if isinstance(a, (Term, ABin, ANeg)))
        if f.q is not None:
            total += ct(f.q.binder) + ct(f.q.domain)
            total += _count_var(f.q.body, name)
            if f.q.funcs is not None:
                total += _count_var(f.q.funcs, name)
        return total
    if isinstance(f, And):
        return sum(_count_var(g, name) for g in f.parts)
    if isinstance(f, Or):
        return sum(_count_var(g, name) for g in f.parts)
    if isinstance(f, Implies):
        return _count_var(f.left, name) + _count_var(f.right, name)
    if isinstance(f, Neg):
        return _count_var(f.body, name)
    if isinstance(f, PredCall):
        return sum(ct(a) for a in f.args if isinstance(a, (Term, ABin, ANeg)))
    return 0


def parse_machine(text: str) -> Machine:
    p = _MParser(text)
    m = p.machine()
    if p.peek().kind != "eof":
        raise p.err(f"trailing input {p.peek().val!r}")
    return m


# --- formula assembly ---------------------------------------------------------

def prime(f: Formula, names: set[str]) -> Formula:
    """Replace each state variable in ``names`` by its next-state variable."""
    from .formulas import subst_formula
    from .terms import VarGen

    sub = {n: Var(n + "_") for n in names}
    return subst_formula(sub, f, VarGen())


def init_formula(m: Machine) -> Formula:
    return conj([a.formula for a in m.init])


def guards_formula(ev: Event) -> Formula:
    return conj([g.formula for g in ev.guards])


def event_formula(m: Machine, ev: Event, frames: bool = False) -> Formula:
    """Guards and actions of one event; with ``frames``, unchanged variables
    are pinned to their old values (needed to compute successor states)."""
    parts: list[Formula] = [g.formula for g in ev.guards]
    parts += [a.formula for a in ev.actions]
    if frames:
        written = set(ev.writes())
        for v in m.var_names():
            if v not in written:
                parts.append(C("eq", Var(v + "_"), Var(v)))
    return conj(parts)


def carrier_equalities(m: Machine) -> Formula:
    """Pin every enumerated carrier to its member set."""
    parts: list[Formula] = []
    for c in m.carriers:
        if c.members is not None:
            parts.append(C("eq", Var(c.name), mkset([Atom(x) for x in c.members])))
    return conj(parts)


def machine_synonyms(m: Machine) -> dict[str, object]:
    """Type synonyms contributed by enumerated carriers."""
    out: dict[str, object] = {}
    for c in m.carriers:
        if c.members is not None:
            out[c.name] = TEnum(c.members)
    return out


def machine_var_types(m: Machine) -> dict[str, object]:
    """Declared types for state variables and carrier sets."""
    out: dict[str, object] = {}
    for c in m.carriers:
        out[c.name] = TSet(TBasic(c.name))
    for v in m.variables:
        if v.ty is not None:
            out[v.name] = v.ty
    return out
