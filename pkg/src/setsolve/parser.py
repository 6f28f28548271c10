"""Parser for formula/clause files (.slog).

Prolog-flavoured surface syntax: identifiers starting with an uppercase
letter or underscore are variables, everything else is an atom.  Clauses end
with a period, ``:-`` introduces directives and clause bodies, ``?-``
introduces queries, and ``%`` starts a line comment.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .arith import ABin, ANeg
from .formulas import (
    C, Clause, Constraint, FalseF, Formula, Implies, KINDS, Neg, Or, PredCall,
    Program, QPayload, TrueF, conj, disj,
)
from .terms import (
    CP, Atom, EMPTY, ExtSet, Int, Interval, Pair, Str, Term, Var, mkset,
)
from .typecheck import TBasic, TEnum, TInt, TNameVar, TProd, TSet, TStr


class ParseError(Exception):
    def __init__(self, msg: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {msg}" if line else msg)
        self.line, self.col = line, col


@dataclass
class Tok:
    kind: str   # atom|var|int|str|punct|eof
    val: str
    line: int
    col: int


_PUNCT2 = (":-", "?-", "=<", ">=")
_PUNCT1 = "()[]{},/=<>&.+-*?"


def tokenize(text: str) -> list[Tok]:
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
        if ch == "%":
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
                raise ParseError("unterminated string", line, col)
            toks.append(Tok("str", "".join(out), line, col))
            col += j + 1 - i
            i = j + 1
            continue
        two = text[i:i + 2]
        if two in _PUNCT2:
            toks.append(Tok("punct", two, line, col))
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
            word = text[i:j]
            kind = "var" if (ch == "_" or ch.isupper()) else "atom"
            toks.append(Tok(kind, word, line, col))
            col += j - i
            i = j
            continue
        if ch in _PUNCT1:
            toks.append(Tok("punct", ch, line, col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(Tok("eof", "", line, col))
    return toks


_INFIX = {
    "=": ("eq", False), "neq": ("neq", False),
    "in": ("in", False), "nin": ("nin", False),
    "is": ("is", False),
    "=<": ("le", False), "<": ("lt", False),
    ">=": ("le", True), ">": ("lt", True),
}


class Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    def peek(self, ahead: int = 0) -> Tok:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Tok:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def expect(self, val: str) -> Tok:
        t = self.next()
        if t.val != val or t.kind not in ("punct", "atom"):
            raise ParseError(f"expected {val!r}, found {t.val!r}", t.line, t.col)
        return t

    def at(self, val: str, kind: Optional[str] = None) -> bool:
        t = self.peek()
        return t.val == val and (kind is None or t.kind == kind)

    def err(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.col)

    # --- terms and integer expressions -------------------------------------

    def term(self) -> Term:
        t = self.peek()
        if t.kind == "var":
            self.next()
            return Var(t.val)
        if t.kind == "int":
            self.next()
            return Int(int(t.val))
        if t.kind == "str":
            self.next()
            return Str(t.val)
        if self.at("-"):
            self.next()
            u = self.next()
            if u.kind != "int":
                raise ParseError("expected a number after -", u.line, u.col)
            return Int(-int(u.val))
        if self.at("["):
            return self.pair()
        if self.at("{"):
            return self.set_term()
        if t.kind == "atom":
            if t.val == "cp" and self.peek(1).val == "(":
                self.next()
                self.expect("(")
                a = self.term()
                self.expect(",")
                b = self.term()
                self.expect(")")
                return CP(a, b)
            if t.val == "int" and self.peek(1).val == "(":
                self.next()
                self.expect("(")
                a = self.term()
                self.expect(",")
                b = self.term()
                self.expect(")")
                if not isinstance(a, (Int, Var)) or not isinstance(b, (Int, Var)):
                    raise ParseError("interval bounds must be integers or variables",
                                     t.line, t.col)
                return Interval(a, b)
            self.next()
            return Atom(t.val)
        raise self.err(f"expected a term, found {t.val!r}")

    def pair(self) -> Pair:
        self.expect("[")
        a = self.term()
        self.expect(",")
        b = self.term()
        self.expect("]")
        return Pair(a, b)

    def set_term(self) -> Term:
        self.expect("{")
        if self.at("}"):
            self.next()
            return EMPTY
        elems = [self.term()]
        while self.at(","):
            self.next()
            elems.append(self.term())
        tail: Term = EMPTY
        if self.at("/"):
            self.next()
            tail = self.term()
            if not isinstance(tail, (Var, ExtSet)) and tail != EMPTY:
                raise self.err("set tail must be a variable or a set")
        self.expect("}")
        return mkset(elems, tail)

    def aexpr(self):
        e = self.amul()
        while self.at("+") or self.at("-"):
            op = self.next().val
            e = ABin(op, e, self.amul())
        return e

    def amul(self):
        e = self.aunary()
        while self.at("*") or self.at("div", "atom") or self.at("mod", "atom"):
            op = self.next().val
            e = ABin(op, e, self.aunary())
        return e

    def aunary(self):
        if self.at("-"):
            nxt = self.peek(1)
            if nxt.kind == "int":
                self.next()
                self.next()
                return Int(-int(nxt.val))
            self.next()
            return ANeg(self.aunary())
        if self.at("("):
            self.next()
            e = self.aexpr()
            self.expect(")")
            return e
        return self.term()

    # --- types --------------------------------------------------------------

    def type_expr(self):
        t = self.peek()
        if t.kind == "var":
            self.next()
            return TNameVar(t.val)
        if self.at("["):
            self.next()
            parts = [self.type_expr()]
            while self.at(","):
                self.next()
                parts.append(self.type_expr())
            self.expect("]")
            if len(parts) < 2:
                raise ParseError("product type needs at least two components",
                                 t.line, t.col)
            return TProd(tuple(parts))
        if t.kind != "atom":
            raise self.err(f"expected a type, found {t.val!r}")
        self.next()
        if self.at("?"):
            raise ParseError("ur-element types are not supported", t.line, t.col)
        if t.val == "int":
            return TInt()
        if t.val == "str":
            return TStr()
        if t.val == "etype":
            self.expect("(")
            self.expect("[")
            members = [self._atom_name()]
            while self.at(","):
                self.next()
                members.append(self._atom_name())
            self.expect("]")
            self.expect(")")
            if len(members) < 2:
                raise ParseError("etype needs at least two members", t.line, t.col)
            return TEnum(tuple(members))
        if t.val == "stype":
            self.expect("(")
            inner = self.type_expr()
            self.expect(")")
            return TSet(inner)
        return TBasic(t.val)

    def _atom_name(self) -> str:
        t = self.next()
        if t.kind != "atom":
            raise ParseError(f"expected an atom, found {t.val!r}", t.line, t.col)
        return t.val

    # --- formulas -------------------------------------------------------------

    def formula(self) -> Formula:
        left = self.or_formula()
        if self.at("implies", "atom"):
            self.next()
            return Implies(left, self.formula())
        return left

    def or_formula(self) -> Formula:
        parts = [self.and_formula()]
        while self.at("or", "atom"):
            self.next()
            parts.append(self.and_formula())
        return disj(parts) if len(parts) > 1 else parts[0]

    def and_formula(self) -> Formula:
        parts = [self.prim_formula()]
        while self.at("&"):
            self.next()
            parts.append(self.prim_formula())
        return conj(parts) if len(parts) > 1 else parts[0]

    def prim_formula(self) -> Formula:
        t = self.peek()
        if t.kind == "atom" and t.val == "true" and self.peek(1).val != "(":
            self.next()
            return TrueF()
        if t.kind == "atom" and t.val == "false" and self.peek(1).val != "(":
            self.next()
            return FalseF()
        if t.kind == "atom" and t.val == "neg" and self.peek(1).val == "(":
            self.next()
            self.expect("(")
            f = self.formula()
            self.expect(")")
            return Neg(f)
        if t.kind == "atom" and t.val == "delay" and self.peek(1).val == "(":
            self.next()
            self.expect("(")
            f = self.prim_formula()
            self.expect(")")
            if not isinstance(f, Constraint) or f.q is not None:
                raise ParseError("delay applies to a single constraint", t.line, t.col)
            return Constraint(f.kind, f.args, delayed=True)
        if t.kind == "atom" and t.val in ("foreach", "exists") and self.peek(1).val == "(":
            return self.quantifier()
        if self.at("("):
            # A parenthesis can open a formula or an integer expression;
            # backtrack if the formula reading fails.
            save = self.i
            try:
                self.next()
                f = self.formula()
                self.expect(")")
                if self._at_infix():
                    raise ParseError("backtrack", t.line, t.col)
                return f
            except ParseError:
                self.i = save
                return self.infix_constraint()
        if t.kind == "atom" and t.val == "dec" and self.peek(1).val == "(":
            self.next()
            self.expect("(")
            v = self.term()
            self.expect(",")
            ty = self.type_expr()
            self.expect(")")
            if not isinstance(v, Var):
                raise ParseError("dec needs a variable", t.line, t.col)
            return Constraint("dec", (v, ty))
        if t.kind == "atom" and t.val not in ("cp", "int") and self.peek(1).val == "(":
            save = self.i
            name = self.next().val
            self.expect("(")
            args = [self.aexpr()]
            while self.at(","):
                self.next()
                args.append(self.aexpr())
            self.expect(")")
            if self._at_infix():
                # It was a term after all (no term functors exist, so the
                # only legal reading is an error further up).
                self.i = save
                return self.infix_constraint()
            if name in KINDS:
                from .formulas import ARITY

                if ARITY.get(name) != len(args):
                    raise ParseError(f"{name} takes {ARITY.get(name)} arguments",
                                     t.line, t.col)
                return Constraint(name, tuple(args))
            return PredCall(name, tuple(args))
        if t.kind == "atom" and self.peek(1).val not in ("(",) and \
                not self._tok_infix(self.peek(1)):
            self.next()
            return PredCall(t.val, ())
        return self.infix_constraint()

    def _tok_infix(self, t: Tok) -> bool:
        return t.val in _INFIX and t.kind in ("punct", "atom")

    def _at_infix(self) -> bool:
        return self._tok_infix(self.peek())

    def infix_constraint(self) -> Formula:
        t = self.peek()
        a = self.aexpr()
        op = self.peek()
        if not self._at_infix():
            raise ParseError(f"expected a constraint operator, found {op.val!r}",
                             op.line, op.col)
        self.next()
        b = self.aexpr()
        kind, swap = _INFIX[op.val]
        if swap:
            a, b = b, a
        if kind in ("eq", "neq", "in", "nin"):
            for x in (a, b):
                if not isinstance(x, Term):
                    raise ParseError(f"{kind} relates terms, not integer expressions",
                                     t.line, t.col)
        if kind == "is" and not isinstance(a, Term):
            raise ParseError("the left side of is must be a variable or number",
                             t.line, t.col)
        return Constraint(kind, (a, b))

    def quantifier(self) -> Formula:
        kw = self.next().val
        self.expect("(")
        if self.at("["):
            binder: Term = self.pair()
            if not (isinstance(binder, Pair) and isinstance(binder.first, Var)
                    and isinstance(binder.second, Var)):
                raise self.err("quantifier pattern must be a pair of variables")
        else:
            t = self.next()
            if t.kind != "var":
                raise ParseError("quantifier needs a variable", t.line, t.col)
            binder = Var(t.val)
        self.expect("in")
        dom = self.term()
        self.expect(",")
        locals_: tuple[str, ...] = ()
        funcs: Optional[Formula] = None
        if self.at("["):
            self.next()
            names = []
            if not self.at("]"):
                tok = self.next()
                if tok.kind != "var":
                    raise ParseError("locals must be variables", tok.line, tok.col)
                names.append(tok.val)
                while self.at(","):
                    self.next()
                    tok = self.next()
                    if tok.kind != "var":
                        raise ParseError("locals must be variables", tok.line, tok.col)
                    names.append(tok.val)
            self.expect("]")
            self.expect(",")
            locals_ = tuple(names)
            body = self.formula()
            self.expect(",")
            funcs = self.formula()
            if isinstance(funcs, TrueF):
                funcs = None
            self.expect(")")
        else:
            body = self.formula()
            self.expect(")")
        return Constraint(kw, (), q=QPayload(binder, dom, locals_, body, funcs))

    # --- statements ---------------------------------------------------------

    def program(self) -> Program:
        clauses: dict = {}
        pred_types: dict = {}
        type_defs: dict = {}
        queries: list[Formula] = []
        while self.peek().kind != "eof":
            t = self.peek()
            if self.at(":-"):
                self.next()
                self.directive(pred_types, type_defs)
                self.expect(".")
                continue
            if self.at("?-"):
                self.next()
                queries.append(self.formula())
                self.expect(".")
                continue
            cl = self.clause()
            key = (cl.name, len(cl.params))
            if key in clauses:
                raise ParseError(f"duplicate clause for {cl.name}/{len(cl.params)}",
                                 t.line, t.col)
            clauses[key] = cl
            self.expect(".")
        return Program(clauses, pred_types, type_defs, queries)

    def directive(self, pred_types: dict, type_defs: dict) -> None:
        t = self.next()
        if t.val == "dec_p_type" and t.kind == "atom":
            self.expect("(")
            name = self._atom_name()
            self.expect("(")
            sig = [self.type_expr()]
            while self.at(","):
                self.next()
                sig.append(self.type_expr())
            self.expect(")")
            self.expect(")")
            pred_types[name] = tuple(sig)
            return
        if t.val == "def_type" and t.kind == "atom":
            self.expect("(")
            name = self._atom_name()
            self.expect(",")
            ty = self.type_expr()
            self.expect(")")
            type_defs[name] = ty
            return
        raise ParseError(f"unknown directive {t.val!r}", t.line, t.col)

    def clause(self) -> Clause:
        t = self.next()
        if t.kind != "atom":
            raise ParseError(f"expected a clause head, found {t.val!r}", t.line, t.col)
        name = t.val
        params: list[str] = []
        if self.at("("):
            self.next()
            while True:
                p = self.next()
                if p.kind != "var":
                    raise ParseError("clause parameters must be distinct variables",
                                     p.line, p.col)
                if p.val in params:
                    raise ParseError(f"duplicate parameter {p.val}", p.line, p.col)
                params.append(p.val)
                if self.at(","):
                    self.next()
                    continue
                break
            self.expect(")")
        body: Formula = TrueF()
        if self.at(":-"):
            self.next()
            body = self.formula()
        return Clause(name, tuple(params), body)


def parse_formula(text: str) -> Formula:
    p = Parser(text)
    f = p.formula()
    if p.at("."):
        p.next()
    if p.peek().kind != "eof":
        raise p.err(f"trailing input {p.peek().val!r}")
    return f


def parse_program(text: str) -> Program:
    return Parser(text).program()


def parse_term(text: str) -> Term:
    p = Parser(text)
    t = p.term()
    if p.peek().kind != "eof":
        raise p.err(f"trailing input {p.peek().val!r}")
    return t
