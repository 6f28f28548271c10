"""Rewrite rules for the primitive constraints.

``rewrite`` maps a constraint (with the store's substitution already applied)
to one of:

* ``None``      -- irreducible: park it as a residual constraint,
* ``[]``        -- unsatisfiable: fail this branch,
* ``[b1, ...]`` -- nondeterministic branches, explored left to right.

Each branch is a list of emissions: constraints, whole sub-formulas (from
quantifier bodies), or ``Bind`` substitution deltas produced by unification.
Ground constraints short-circuit through the evaluator.  Rules follow a
case-split discipline: membership drives elements into variable sets,
negative constraints introduce fresh witnesses, and union-style constraints
peel one listed element per step so every chain of descendants shrinks.
"""
from __future__ import annotations

from dataclasses import dataclass

from . import arith, groundeval
from .formulas import C, Constraint, Formula
from .terms import (
    CP, Atom, EMPTY, EmptySet, ExtSet, Int, Interval, Pair, Str, Term, Var,
    is_ground, mkset, set_parts, subst_term, term_vars,
)
from .unify import concretize, unify


@dataclass(frozen=True)
class Bind:
    delta: tuple  # tuple of (name, term)


Branchs = list  # list of branches; branch = list of emissions


def _bind(delta: dict[str, Term]) -> Bind:
    return Bind(tuple(sorted(delta.items())))


def _arg_ground(a) -> bool:
    if isinstance(a, Term):
        return is_ground(a)
    if isinstance(a, arith.ABin):
        return _arg_ground(a.left) and _arg_ground(a.right)
    if isinstance(a, arith.ANeg):
        return _arg_ground(a.body)
    return False


def _sym_setlike(t: Term) -> bool:
    """A product/interval that cannot be expanded yet."""
    return isinstance(t, (CP, Interval)) and not is_ground(t)


def rewrite(c: Constraint, store):
    k = c.kind
    if k == "dec":
        return [[]]
    if k in ("foreach", "exists"):
        return _rule_quant(c, store)
    if k in ("is", "le", "lt"):
        return _rule_arith(c, store)
    if k == "eq":
        return _rule_eq(c, store)

    # Expand ground products/intervals in argument position.
    args = list(c.args)
    changed = False
    for i, a in enumerate(args):
        if isinstance(a, Term):
            g = concretize(a)
            if g is not None:
                args[i] = g
                changed = True
    if changed:
        return [[C(k, *args)]]

    if all(_arg_ground(a) for a in args):
        return [[]] if groundeval.eval_constraint(C(k, *args)) else []

    a = args
    fns = {
        "neq": _rule_neq, "in": _rule_in, "nin": _rule_nin,
        "un": _rule_un, "nun": _rule_nun,
        "disj": _rule_disj, "ndisj": _rule_ndisj,
        "subset": _rule_subset, "nsubset": _rule_nsubset,
        "pfun": _rule_pfun, "npfun": _rule_npfun,
        "dom": _rule_dom, "ndom": _rule_ndom,
        "ran": _rule_ran, "nran": _rule_nran,
        "inv": _rule_inv, "ninv": _rule_ninv,
        "id": _rule_id, "nid": _rule_nid,
        "comp": _rule_comp, "ncomp": _rule_ncomp,
        "applyTo": _rule_apply, "foplus": _rule_foplus,
        "npair": _rule_npair,
    }
    return fns[k](store, *a)


# --- equality / disequality ---------------------------------------------

def _rule_eq(c: Constraint, store):
    a, b = c.args
    if a == b:
        return [[]]
    # A product or interval equal to the empty set constrains its parts
    # directly; routing through subset would bounce back here.
    for x, y in ((a, b), (b, a)):
        if isinstance(y, EmptySet):
            if isinstance(x, CP):
                return [[C("eq", x.left, EMPTY)], [C("eq", x.right, EMPTY)]]
            if isinstance(x, Interval):
                return [[C("lt", x.hi, x.lo)]]
    # Symbolic product against an extensional set: decompose through mutual
    # inclusion; the subset rules take it from there.
    if (_sym_setlike(a) and isinstance(b, (ExtSet, EmptySet))) or \
       (_sym_setlike(b) and isinstance(a, (ExtSet, EmptySet))) or \
       (isinstance(a, CP) and isinstance(b, Interval)) or \
       (isinstance(a, Interval) and isinstance(b, CP)):
        return [[C("subset", a, b), C("subset", b, a)]]
    out = []
    for delta, deferred in unify(a, b, store.gen):
        branch: list = []
        if delta:
            branch.append(_bind(delta))
        branch.extend(deferred)
        out.append(branch)
    return out


def _definite_set(t: Term) -> bool:
    return isinstance(t, (ExtSet, EmptySet, CP, Interval))


def _rule_neq(store, a, b):
    if a == b:
        return []
    if isinstance(a, Pair) and isinstance(b, Pair):
        return [[C("neq", a.first, b.first)], [C("neq", a.second, b.second)]]
    if _definite_set(a) and _definite_set(b):
        n = store.gen.fresh()
        return [[C("in", n, a), C("nin", n, b)], [C("in", n, b), C("nin", n, a)]]
    scalars = (Atom, Int, Str, Pair)
    if (_definite_set(a) and isinstance(b, scalars)) or \
       (_definite_set(b) and isinstance(a, scalars)):
        return [[]]  # a set is never equal to an ur-element
    if isinstance(a, scalars) and isinstance(b, scalars) and type(a) is not type(b):
        return [[]]
    # At least one side is a variable.
    va = a.name if isinstance(a, Var) else None
    vb = b.name if isinstance(b, Var) else None
    other = b if va else a
    if _definite_set(other):
        n = store.gen.fresh()
        return [[C("in", n, a), C("nin", n, b)], [C("in", n, b), C("nin", n, a)]]
    set_sorted = store.set_sorted()
    if (va and va in set_sorted) or (vb and vb in set_sorted):
        n = store.gen.fresh()
        return [[C("in", n, a), C("nin", n, b)], [C("in", n, b), C("nin", n, a)]]
    int_sorted = store.int_sorted()
    if (va and va in int_sorted) or (vb and vb in int_sorted):
        if all(isinstance(t, (Var, Int)) for t in (a, b)):
            return [[C("lt", a, b)], [C("lt", b, a)]]
    return None


# --- membership -----------------------------------------------------------

def _rule_in(store, x, s):
    if isinstance(s, EmptySet):
        return []
    if isinstance(s, ExtSet):
        return [[C("eq", x, s.head)], [C("in", x, s.tail)]]
    if isinstance(s, Var):
        if s.name in term_vars(x):
            return []  # no well-founded solution
        return [[C("eq", s, ExtSet(x, store.gen.fresh()))]]
    if isinstance(s, CP):
        n1, n2 = store.gen.fresh(), store.gen.fresh()
        return [[C("eq", x, Pair(n1, n2)), C("in", n1, s.left), C("in", n2, s.right)]]
    if isinstance(s, Interval):
        if isinstance(x, (Var, Int)):
            return [[C("le", s.lo, x), C("le", x, s.hi)]]
        return []
    return []  # ur-elements have no members


def _rule_nin(store, x, s):
    if isinstance(s, EmptySet):
        return [[]]
    if isinstance(s, ExtSet):
        return [[C("neq", x, s.head), C("nin", x, s.tail)]]
    if isinstance(s, Var):
        return None
    if isinstance(s, CP):
        n1, n2 = store.gen.fresh(), store.gen.fresh()
        p = Pair(n1, n2)
        return [
            [C("npair", x)],
            [C("eq", x, p), C("nin", n1, s.left)],
            [C("eq", x, p), C("nin", n2, s.right)],
        ]
    if isinstance(s, Interval):
        if isinstance(x, (Var, Int)):
            return [[C("lt", x, s.lo)], [C("lt", s.hi, x)]]
        return [[]]
    return [[]]


def _rule_npair(store, x):
    if isinstance(x, Var):
        return None
    return [] if isinstance(x, Pair) else [[]]


# --- union / disjointness / inclusion -------------------------------------

def _rule_un(store, a, b, c):
    if a == b:
        return [[C("eq", a, c)]]
    if isinstance(a, EmptySet):
        return [[C("eq", b, c)]]
    if isinstance(b, EmptySet):
        return [[C("eq", a, c)]]
    if isinstance(c, EmptySet):
        return [[C("eq", a, EMPTY), C("eq", b, EMPTY)]]
    if a == c:
        return [[C("subset", b, a)]]
    if b == c:
        return [[C("subset", a, b)]]
    if isinstance(c, ExtSet):
        return _un_split_third(store, a, b, c)
    if isinstance(a, ExtSet):
        return _un_split_side(store, a, b, c, left=True)
    if isinstance(b, ExtSet):
        return _un_split_side(store, b, a, c, left=False)
    return None


def _un_split_third(store, a, b, c):
    t, c1 = c.head, c.tail
    out = []
    # The element t belongs to a, to b, or to both; in each case remove it
    # everywhere and unite what is left.
    for placement in ("a", "b", "ab"):
        for peeled in (False, True):
            g = store.gen
            n3 = g.fresh()
            branch: list = [C("nin", t, n3)]
            if placement in ("a", "ab"):
                n1 = g.fresh()
                branch += [C("eq", a, ExtSet(t, n1)), C("nin", t, n1)]
                left: Term = n1
            else:
                branch += [C("nin", t, a)]
                left = a
            if placement in ("b", "ab"):
                n2 = g.fresh()
                branch += [C("eq", b, ExtSet(t, n2)), C("nin", t, n2)]
                right: Term = n2
            else:
                branch += [C("nin", t, b)]
                right = b
            branch.append(C("un", left, right, n3))
            branch.append(C("eq", c1, ExtSet(t, n3) if peeled else n3))
            out.append(branch)
    return out


def _un_split_side(store, src, other, c, left: bool):
    """src is extensional: its head element must appear in c."""
    t, rest = src.head, src.tail
    out = []
    g = store.gen
    for src_more in (False, True):
        for other_has in (False, True):
            n3 = g.fresh()
            branch: list = [C("eq", c, ExtSet(t, n3)), C("nin", t, n3)]
            if src_more:
                n1 = g.fresh()
                branch += [C("eq", rest, ExtSet(t, n1)), C("nin", t, n1)]
                s_rest: Term = n1
            else:
                branch += [C("nin", t, rest)]
                s_rest = rest
            if other_has:
                n2 = g.fresh()
                branch += [C("eq", other, ExtSet(t, n2)), C("nin", t, n2)]
                o_rest: Term = n2
            else:
                branch += [C("nin", t, other)]
                o_rest = other
            if left:
                branch.append(C("un", s_rest, o_rest, n3))
            else:
                branch.append(C("un", o_rest, s_rest, n3))
            out.append(branch)
    return out


def _rule_nun(store, a, b, c):
    n = store.gen.fresh()
    return [
        [C("in", n, c), C("nin", n, a), C("nin", n, b)],
        [C("in", n, a), C("nin", n, c)],
        [C("in", n, b), C("nin", n, c)],
    ]


def _rule_disj(store, a, b):
    if isinstance(a, EmptySet) or isinstance(b, EmptySet):
        return [[]]
    if a == b:
        return [[C("eq", a, EMPTY)]]
    if isinstance(a, ExtSet):
        return [[C("nin", a.head, b), C("disj", a.tail, b)]]
    if isinstance(b, ExtSet):
        return [[C("nin", b.head, a), C("disj", a, b.tail)]]
    return None


def _rule_ndisj(store, a, b):
    n = store.gen.fresh()
    return [[C("in", n, a), C("in", n, b)]]


def _rule_subset(store, a, b):
    if isinstance(a, EmptySet) or a == b:
        return [[]]
    if isinstance(b, EmptySet):
        return [[C("eq", a, EMPTY)]]
    if isinstance(a, ExtSet):
        return [[C("in", a.head, b), C("subset", a.tail, b)]]
    return None


def _rule_nsubset(store, a, b):
    n = store.gen.fresh()
    return [[C("in", n, a), C("nin", n, b)]]


# --- partial functions and relational constraints --------------------------

def _pair_force(store, t: Term):
    """Branch prefix forcing t to be a pair, or None when impossible."""
    if isinstance(t, Pair):
        return []
    if isinstance(t, Var):
        return [C("eq", t, Pair(store.gen.fresh(), store.gen.fresh()))]
    return None


def _rule_pfun(store, f):
    if isinstance(f, EmptySet):
        return [[]]
    if isinstance(f, Var):
        return None
    if isinstance(f, ExtSet):
        t = f.head
        if isinstance(t, Pair):
            fst = t.first
            return [[C("pfun", f.tail), C("comp", mkset([Pair(fst, fst)]), f.tail, EMPTY)]]
        pre = _pair_force(store, t)
        if pre is None:
            return []
        return [pre + [C("pfun", f)]]
    if isinstance(f, CP):
        return [
            [C("eq", f.left, EMPTY)],
            [C("eq", f.right, EMPTY)],
            [C("eq", f.right, mkset([store.gen.fresh()]))],
        ]
    if isinstance(f, Interval):
        return [[C("lt", f.hi, f.lo)]]
    return []


def _rule_npfun(store, f):
    g = store.gen
    n1, n2, n3, n = g.fresh(), g.fresh(), g.fresh(), g.fresh()
    return [
        [C("in", Pair(n1, n2), f), C("in", Pair(n1, n3), f), C("neq", n2, n3)],
        [C("in", n, f), C("npair", n)],
    ]


def _store_asserts_pfun(store, f: Var) -> bool:
    """Whether pfun(f) is already asserted somewhere in the store."""
    name = f.name
    pools = [c for _, c in store.parked]
    for q in store.queues:
        pools.extend(q)
    for it in pools:
        if isinstance(it, Constraint) and it.kind == "pfun":
            a = subst_term(store.subst, it.args[0])
            if isinstance(a, Var) and a.name == name:
                return True
    return False


def _rule_dom(store, r, d):
    if isinstance(r, EmptySet):
        return [[C("eq", d, EMPTY)]]
    if isinstance(r, ExtSet):
        t = r.head
        if isinstance(t, Pair):
            m = store.gen.fresh()
            return [[C("dom", r.tail, m), C("eq", d, ExtSet(t.first, m))]]
        pre = _pair_force(store, t)
        if pre is None:
            return []
        return [pre + [C("dom", r, d)]]
    if isinstance(r, CP):
        n = store.gen.fresh()
        return [
            [C("eq", r.right, EMPTY), C("eq", d, EMPTY)],
            [C("eq", r.right, ExtSet(n, store.gen.fresh())), C("eq", d, r.left)],
        ]
    if isinstance(r, Var):
        if isinstance(d, EmptySet):
            return [[C("eq", r, EMPTY)]]
        if isinstance(d, ExtSet):
            g = store.gen
            elems, tail = set_parts(d)
            if (isinstance(tail, EmptySet)
                    and all(is_ground(e) for e in elems)
                    and _store_asserts_pfun(store, r)):
                # A function over a listed ground domain has exactly one
                # pair per element: peel deterministically instead of
                # re-deciding element multiplicity per step.
                h = elems[0]
                rest = [e for e in elems[1:] if e != h]
                n, r1 = g.fresh(), g.fresh()
                return [[
                    C("eq", r, ExtSet(Pair(h, n), r1)),
                    C("comp", mkset([Pair(h, h)]), r1, EMPTY),
                    C("dom", r1, mkset(rest)),
                ]]
            n, r1, m = g.fresh(), g.fresh(), g.fresh()
            return [[
                C("eq", r, ExtSet(Pair(d.head, n), r1)),
                C("dom", r1, m),
                C("eq", ExtSet(d.head, m), d),
            ]]
    return None


def _rule_ndom(store, r, d):
    g = store.gen
    n1, n2, n, m = g.fresh(), g.fresh(), g.fresh(), g.fresh()
    return [
        [C("in", Pair(n1, n2), r), C("nin", n1, d)],
        [C("in", m, d), C("comp", mkset([Pair(m, m)]), r, EMPTY)],
        [C("in", n, r), C("npair", n)],
    ]


def _rule_ran(store, r, t):
    if isinstance(r, EmptySet):
        return [[C("eq", t, EMPTY)]]
    if isinstance(r, ExtSet):
        h = r.head
        if isinstance(h, Pair):
            m = store.gen.fresh()
            return [[C("ran", r.tail, m), C("eq", t, ExtSet(h.second, m))]]
        pre = _pair_force(store, h)
        if pre is None:
            return []
        return [pre + [C("ran", r, t)]]
    if isinstance(r, CP):
        n = store.gen.fresh()
        return [
            [C("eq", r.left, EMPTY), C("eq", t, EMPTY)],
            [C("eq", r.left, ExtSet(n, store.gen.fresh())), C("eq", t, r.right)],
        ]
    if isinstance(r, Var):
        if isinstance(t, EmptySet):
            return [[C("eq", r, EMPTY)]]
        if isinstance(t, ExtSet):
            g = store.gen
            n, r1, m = g.fresh(), g.fresh(), g.fresh()
            return [[
                C("eq", r, ExtSet(Pair(n, t.head), r1)),
                C("ran", r1, m),
                C("eq", ExtSet(t.head, m), t),
            ]]
    return None


def _rule_nran(store, r, t):
    g = store.gen
    n1, n2, n, m = g.fresh(), g.fresh(), g.fresh(), g.fresh()
    return [
        [C("in", Pair(n1, n2), r), C("nin", n2, t)],
        [C("in", m, t), C("comp", r, mkset([Pair(m, m)]), EMPTY)],
        [C("in", n, r), C("npair", n)],
    ]


def _rule_inv(store, r, t):
    if isinstance(r, EmptySet):
        return [[C("eq", t, EMPTY)]]
    if isinstance(t, EmptySet):
        return [[C("eq", r, EMPTY)]]
    if isinstance(r, ExtSet):
        h = r.head
        if isinstance(h, Pair):
            m = store.gen.fresh()
            return [[C("inv", r.tail, m), C("eq", t, ExtSet(Pair(h.second, h.first), m))]]
        pre = _pair_force(store, h)
        if pre is None:
            return []
        return [pre + [C("inv", r, t)]]
    if isinstance(r, CP):
        return [[C("eq", t, CP(r.right, r.left))]]
    if isinstance(t, (ExtSet, CP)):
        return [[C("inv", t, r)]]  # converse is an involution
    return None


def _rule_ninv(store, r, t):
    g = store.gen
    n1, n2, n3, n4, n, m = (g.fresh() for _ in range(6))
    return [
        [C("in", Pair(n1, n2), r), C("nin", Pair(n2, n1), t)],
        [C("in", Pair(n3, n4), t), C("nin", Pair(n4, n3), r)],
        [C("in", n, r), C("npair", n)],
        [C("in", m, t), C("npair", m)],
    ]


def _rule_id(store, a, r):
    if isinstance(a, EmptySet):
        return [[C("eq", r, EMPTY)]]
    if isinstance(r, EmptySet):
        return [[C("eq", a, EMPTY)]]
    if isinstance(a, ExtSet):
        m = store.gen.fresh()
        x = a.head
        return [[C("id", a.tail, m), C("eq", r, ExtSet(Pair(x, x), m))]]
    if isinstance(r, ExtSet):
        g = store.gen
        n, a1, m = g.fresh(), g.fresh(), g.fresh()
        return [[
            C("eq", r.head, Pair(n, n)),
            C("eq", a, ExtSet(n, a1)),
            C("id", a1, m),
            C("eq", ExtSet(Pair(n, n), m), r),
        ]]
    return None


def _rule_nid(store, a, r):
    g = store.gen
    n, n1, n2, n3, n4, m = (g.fresh() for _ in range(6))
    return [
        [C("in", n, a), C("nin", Pair(n, n), r)],
        [C("in", Pair(n1, n2), r), C("neq", n1, n2)],
        [C("in", Pair(n3, n4), r), C("nin", n3, a)],
        [C("in", m, r), C("npair", m)],
    ]


def _rule_comp(store, r, s, t):
    if isinstance(r, EmptySet) or isinstance(s, EmptySet):
        return [[C("eq", t, EMPTY)]]
    if isinstance(r, Interval):
        return [[C("lt", r.hi, r.lo), C("eq", t, EMPTY)]]
    if isinstance(s, Interval):
        return [[C("lt", s.hi, s.lo), C("eq", t, EMPTY)]]
    if isinstance(r, ExtSet):
        h = r.head
        pre = _pair_force(store, h)
        if pre is None:
            return []
        if pre:
            return [pre + [C("comp", r, s, t)]]
        if not isinstance(r.tail, EmptySet):
            g = store.gen
            t1, t2 = g.fresh(), g.fresh()
            return [[
                C("comp", mkset([h]), s, t1),
                C("comp", r.tail, s, t2),
                C("un", t1, t2, t),
            ]]
        return _comp_single(store, h, s, t)
    if isinstance(r, CP):
        g = store.gen
        ib, bs, m = g.fresh(), g.fresh(), g.fresh()
        return [[
            C("id", r.right, ib),
            C("comp", ib, s, bs),
            C("ran", bs, m),
            C("eq", t, CP(r.left, m)),
        ]]
    # r is a variable from here on.
    if isinstance(s, ExtSet):
        h = s.head
        pre = _pair_force(store, h)
        if pre is None:
            return []
        if pre:
            return [pre + [C("comp", r, s, t)]]
        if not isinstance(s.tail, EmptySet):
            g = store.gen
            t1, t2 = g.fresh(), g.fresh()
            return [[
                C("comp", r, mkset([h]), t1),
                C("comp", r, s.tail, t2),
                C("un", t1, t2, t),
            ]]
        return None
    if isinstance(s, CP):
        g = store.gen
        ia, ra, m = g.fresh(), g.fresh(), g.fresh()
        return [[
            C("id", s.left, ia),
            C("comp", r, ia, ra),
            C("dom", ra, m),
            C("eq", t, CP(m, s.right)),
        ]]
    # r and s are variables: force listed elements of t into pair shape,
    # then leave the constraint for the residue.
    if isinstance(t, ExtSet):
        cur: Term = t
        while isinstance(cur, ExtSet):
            pre = _pair_force(store, cur.head)
            if pre is None:
                return []
            if pre:
                return [pre + [C("comp", r, s, t)]]
            cur = cur.tail
    return None


def _comp_single(store, p: Pair, s, t):
    """comp({[x,y]}, s, t) with s not empty/extensional-multi handled here."""
    x, y = p.first, p.second
    if isinstance(s, ExtSet):
        q = s.head
        pre = _pair_force(store, q)
        if pre is None:
            return []
        if pre:
            return [pre + [C("comp", mkset([p]), s, t)]]
        u, v = q.first, q.second
        t1 = store.gen.fresh()
        return [
            [C("eq", y, u), C("comp", mkset([p]), s.tail, t1),
             C("eq", t, ExtSet(Pair(x, v), t1))],
            [C("neq", y, u), C("comp", mkset([p]), s.tail, t)],
        ]
    if isinstance(s, CP):
        return [
            [C("nin", y, s.left), C("eq", t, EMPTY)],
            [C("in", y, s.left), C("eq", t, CP(mkset([x]), s.right))],
        ]
    return None  # s is a variable: x-in-domain questions stay residual


def _rule_ncomp(store, r, s, t):
    g = store.gen
    out = []
    n1, n2, n3 = g.fresh(), g.fresh(), g.fresh()
    out.append([C("in", Pair(n1, n2), r), C("in", Pair(n2, n3), s),
                C("nin", Pair(n1, n3), t)])
    m1, m3, k, m = g.fresh(), g.fresh(), g.fresh(), g.fresh()
    out.append([C("in", Pair(m1, m3), t),
                C("comp", mkset([Pair(m1, m1)]), r, k),
                C("comp", k, s, m),
                C("nin", Pair(m1, m3), m)])
    w1, w2, w3 = g.fresh(), g.fresh(), g.fresh()
    out.append([C("in", w1, t), C("npair", w1)])
    out.append([C("in", w2, r), C("npair", w2)])
    out.append([C("in", w3, s), C("npair", w3)])
    return out


def _rule_apply(store, f, x, y):
    if isinstance(f, CP):
        return [[C("in", x, f.left), C("eq", f.right, mkset([y]))]]
    if isinstance(f, Interval):
        return []
    g = store.gen.fresh()
    return [[
        C("eq", f, ExtSet(Pair(x, y), g)),
        C("nin", Pair(x, y), g),
        C("comp", mkset([Pair(x, x)]), g, EMPTY),
    ]]


def _rule_foplus(store, f, x, y, out):
    gen = store.gen
    z, h = gen.fresh(), gen.fresh()
    xx = mkset([Pair(x, x)])
    return [
        [C("eq", f, ExtSet(Pair(x, z), h)),
         C("nin", Pair(x, z), h),
         C("comp", xx, h, EMPTY),
         C("eq", out, ExtSet(Pair(x, y), h))],
        [C("comp", xx, f, EMPTY),
         C("eq", out, ExtSet(Pair(x, y), f))],
    ]


# --- arithmetic -------------------------------------------------------------

def _rule_arith(c: Constraint, store):
    k = c.kind
    a, b = c.args
    try:
        if _arg_ground(a) and _arg_ground(b):
            return [[]] if groundeval.eval_constraint(c) else []
        if k == "is" and isinstance(a, Var) and _arg_ground(b):
            return [[C("eq", a, Int(arith.eval_ground(b)))]]
        la = arith.lower(a)
        lb = arith.lower(b)
    except arith.NonLinear:
        return None  # park until enough operands are bound
    except (TypeError, ValueError):
        return []  # non-integer operand
    if k == "is":
        store.arith.assert_eq(la - lb)
    else:
        store.arith.assert_le(la - lb, strict=(k == "lt"))
    if store.arith.consistent(budget=512) is False:
        return []
    return None  # keep for the answer; bindings re-trigger it


# --- quantifiers -------------------------------------------------------------

def _rule_quant(c: Constraint, store):
    from .formulas import QPayload, binder_names, subst_formula

    q = c.q
    d = q.domain
    g = concretize(d)
    if g is not None:
        return [[Constraint(c.kind, (), q=QPayload(q.binder, g, q.locals, q.body, q.funcs),
                            delayed=c.delayed)]]
    foreach = c.kind == "foreach"
    gen = store.gen

    def instantiate(elem: Term):
        """Emissions binding the pattern to elem plus the body instance."""
        pre: list = []
        if isinstance(q.binder, Var):
            s = {q.binder.name: elem}
        else:
            names = binder_names(q.binder)
            n1, n2 = gen.fresh(), gen.fresh()
            if isinstance(elem, Pair):
                s = {names[0]: elem.first, names[1]: elem.second}
            else:
                pre.append(C("eq", elem, Pair(n1, n2)))
                s = {names[0]: n1, names[1]: n2}
        ren = {l: gen.fresh() for l in q.locals}
        s.update(ren)
        inner = q.body if q.funcs is None else _conj2(q.funcs, q.body)
        return pre + [subst_formula(s, inner, gen)]

    if isinstance(d, EmptySet):
        return [[]] if foreach else []
    if isinstance(d, ExtSet):
        rest = Constraint(c.kind, (), q=QPayload(q.binder, d.tail, q.locals, q.body, q.funcs),
                          delayed=c.delayed)
        if foreach:
            return [instantiate(d.head) + [rest]]
        return [instantiate(d.head), [rest]]
    if isinstance(d, Var):
        if foreach:
            return None
        w, d2 = gen.fresh(), gen.fresh()
        return [[C("eq", d, ExtSet(w, d2))] + instantiate(w)]
    if isinstance(d, CP):
        if foreach:
            return None
        n1, n2 = gen.fresh(), gen.fresh()
        return [[C("in", n1, d.left), C("in", n2, d.right)] + instantiate(Pair(n1, n2))]
    if isinstance(d, Interval):
        if foreach:
            return None
        n = gen.fresh()
        return [[C("le", d.lo, n), C("le", n, d.hi)] + instantiate(n)]
    return []  # quantifying over an ur-element


def _conj2(a: Formula, b: Formula) -> Formula:
    from .formulas import conj

    return conj([a, b])
