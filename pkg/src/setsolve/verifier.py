"""Proof obligations for machines, and their discharge by refutation.

Three kinds of obligation are generated:

  INIT  the initialisation establishes each invariant;
  INV   each event re-establishes each invariant that mentions a variable
        the event writes;
  WD    every function application occurring in a guard or action is
        defined: the point has exactly one image.

An obligation is discharged by refuting its negation: the solver runs on
``hypotheses & neg(goal)``.  An unsatisfiable query proves the obligation;
a satisfiable one is only reported as disproved when the witness can be
completed to a ground state on which the whole query evaluates to true.

Hypotheses start minimal: an INV obligation assumes only the invariant
being preserved and the event itself.  When that fails, further invariants
are pulled in one at a time, preferring those the candidate counterexample
violates, then those sharing variables with the goal.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

from .engine import ground_complete, solve
from .formulas import (
    C, Constraint, Formula, Neg, QPayload, conj, disj, formula_vars,
    subst_formula,
)
from .groundeval import NotGround, eval_formula, term_value, value_to_term
from .machines import (
    Machine, WDOcc, carrier_equalities, event_formula, guards_formula,
    init_formula, machine_synonyms, machine_var_types, prime,
)
from .printer import pp_formula, pp_term
from .terms import EMPTY, Atom, Pair, Term, Var, VarGen, is_ground, mkset
from .typecheck import TBasic, TEnum, TProd, TSet, TypeEnv, check_formula


@dataclass(frozen=True)
class PO:
    po_id: str
    kind: str                  # INIT | INV | WD
    machine: str
    event: Optional[str]
    target: str                # invariant label or application site
    fixed: Formula             # hypotheses that are always assumed
    goal: Formula              # what must follow
    neg_goal: Formula          # refutation query part (Neg(goal) or bespoke)
    pool: tuple[tuple[str, Formula], ...]  # candidate extra hypotheses
    decs: tuple[Constraint, ...]
    show_vars: tuple[str, ...]  # variables worth reporting in a counterexample


@dataclass
class POResult:
    po: PO
    status: str                # Proved | Disproved | Unknown
    hyps_used: tuple[str, ...]
    iterations: int
    time_ms: float
    counterexample: Optional[dict[str, Term]] = None
    note: str = ""


class VerifyError(Exception):
    pass


# --- obligation generation ----------------------------------------------------

def _decs(m: Machine, primed: set[str]) -> tuple[Constraint, ...]:
    tys = machine_var_types(m)
    out = [Constraint("dec", (Var(n), t)) for n, t in tys.items()]
    for n in sorted(primed):
        if n in tys:
            out.append(Constraint("dec", (Var(n + "_"), tys[n])))
    return tuple(out)


def _fresh_names(m: Machine, base: str, k: int) -> list[str]:
    taken = set(m.var_names()) | {c.name for c in m.carriers}
    for ev in m.events:
        taken |= set(ev.params)
    out: list[str] = []
    i = 0
    while len(out) < k:
        i += 1
        name = f"{base}{i}"
        if name not in taken:
            out.append(name)
    return out


def _wd_goal(m: Machine, occ: WDOcc) -> tuple[Formula, Formula]:
    """Positive goal and refutation formula for one application."""
    f, x = occ.apply.args[0], occ.apply.args[1]
    out, n1, n2 = _fresh_names(m, "w", 3)
    point = mkset([Pair(x, x)])
    goal: Formula = C("applyTo", f, x, Var(out))
    no_image: Formula = C("comp", point, f, mkset([]))
    two_images: Formula = conj([
        C("in", Pair(x, Var(n1)), f),
        C("in", Pair(x, Var(n2)), f),
        C("neq", Var(n1), Var(n2)),
    ])
    neg: Formula = disj([no_image, two_images])
    for binder, dom in reversed(occ.binders):
        goal = Constraint("foreach", (), q=QPayload(binder, dom, (), goal, None))
        neg = Constraint("exists", (), q=QPayload(binder, dom, (), neg, None))
    return goal, neg


def generate_pos(m: Machine, strict_wd: bool = False) -> list[PO]:
    pos: list[PO] = []
    carriers = tuple(c.name for c in m.carriers)
    statevars = m.var_names()
    # Carrier definitions from the context hold in every proof; pinning them
    # keeps function domains listed and the search finite.
    ctx = carrier_equalities(m)

    for inv in m.invariants:
        pos.append(PO(
            po_id=f"{m.name}/INIT/{inv.label}",
            kind="INIT", machine=m.name, event=None, target=inv.label,
            fixed=conj([ctx, init_formula(m)]),
            goal=inv.formula,
            neg_goal=Neg(inv.formula),
            pool=(),
            decs=_decs(m, set()),
            show_vars=statevars + carriers,
        ))

    for ev in m.events:
        written = set(ev.writes())
        show = statevars + tuple(v + "_" for v in statevars if v in written) \
            + carriers + ev.params
        for inv in m.invariants:
            if not (formula_vars(inv.formula) & written):
                continue
            goal = prime(inv.formula, written)
            pos.append(PO(
                po_id=f"{m.name}/{ev.name}/{inv.label}/INV",
                kind="INV", machine=m.name, event=ev.name, target=inv.label,
                fixed=conj([ctx, inv.formula, event_formula(m, ev, frames=False)]),
                goal=goal,
                neg_goal=Neg(goal),
                pool=tuple((o.label, o.formula) for o in m.invariants
                           if o.label != inv.label),
                decs=_decs(m, written),
                show_vars=show,
            ))

        occs: list[tuple[Formula, WDOcc]] = []
        done: list[Formula] = []
        for g in ev.guards:
            for occ in g.wd:
                occs.append((conj(done + [occ.pre]), occ))
            done.append(g.formula)
        all_guards = guards_formula(ev)
        for a in ev.actions:
            for occ in a.wd:
                occs.append((conj([all_guards, occ.pre]), occ))
        for k, (pre, occ) in enumerate(occs, start=1):
            goal, neg = _wd_goal(m, occ)
            if strict_wd:
                fn, x = occ.apply.args[0], occ.apply.args[1]
                neg = disj([C("comp", mkset([Pair(x, x)]), fn, mkset([])),
                            C("npfun", fn)])
            pos.append(PO(
                po_id=f"{m.name}/{ev.name}/{occ.site}/wd{k}/WD",
                kind="WD", machine=m.name, event=ev.name, target=occ.site,
                fixed=conj([ctx, pre]),
                goal=goal,
                neg_goal=neg,
                pool=tuple((o.label, o.formula) for o in m.invariants),
                decs=_decs(m, set()),
                show_vars=show,
            ))
    return pos


def typecheck_machine(m: Machine) -> list[str]:
    """Check every formula of the machine in one shared context."""
    env = TypeEnv()
    env.synonyms.update(machine_synonyms(m))
    parts: list[Formula] = list(_decs(m, set(m.var_names())))
    parts += [inv.formula for inv in m.invariants]
    parts += [a.formula for a in m.init]
    for ev in m.events:
        parts.append(event_formula(m, ev, frames=False))
    errors = check_formula(conj(parts), env)
    return [str(e) for e in errors]


# --- discharge -----------------------------------------------------------------

def _hints(m: Machine) -> dict[str, list[Term]]:
    """Candidate ground values for completing a witness.

    Carriers get their member set.  A variable typed as a subset of an
    enumerable type gets the full set and the empty set; one typed as a
    relation between enumerable types additionally gets each constant
    total function and the full product, so counterexamples involving
    function-valued state can be completed.  Primed copies share the
    candidates of their base variable.
    """
    syn = dict(machine_synonyms(m))
    syn.setdefault("bool", TEnum(("true", "false")))

    def members(ty) -> Optional[tuple[str, ...]]:
        while isinstance(ty, TBasic) and ty.name in syn:
            ty = syn[ty.name]
        return ty.members if isinstance(ty, TEnum) else None

    out: dict[str, list[Term]] = {}
    for c in m.carriers:
        if c.members is not None:
            out[c.name] = [mkset([Atom(x) for x in c.members])]
    for v in m.variables:
        if not isinstance(v.ty, TSet):
            continue
        cands: list[Term] = []
        elem = v.ty.elem
        if isinstance(elem, TProd) and len(elem.parts) == 2:
            dom = members(elem.parts[0])
            rng = members(elem.parts[1])
            if dom and rng:
                for y in rng:
                    cands.append(mkset([Pair(Atom(x), Atom(y)) for x in dom]))
                cands.append(mkset([Pair(Atom(x), Atom(y))
                                    for x in dom for y in rng]))
                cands.append(EMPTY)
        else:
            mem = members(elem)
            if mem:
                cands.append(mkset([Atom(x) for x in mem]))
                cands.append(EMPTY)
        if cands:
            out[v.name] = cands
            out[v.name + "_"] = list(cands)
    return out


def _rank_pool(po: PO, used: set[str]) -> list[tuple[str, Formula]]:
    target = formula_vars(po.goal) | formula_vars(po.fixed)
    scored = []
    for i, (label, f) in enumerate(po.pool):
        if label in used:
            continue
        scored.append((-len(formula_vars(f) & target), i, label, f))
    scored.sort()
    return [(label, f) for _, _, label, f in scored]


def _query(po: PO, hyps: list[Formula]) -> Formula:
    return conj(list(po.decs) + [po.fixed] + hyps + [po.neg_goal])


def _validate(po: PO, hyps: list[Formula], witness: dict[str, Term]) -> bool:
    """A counterexample must make the whole query true on the ground."""
    f = conj([po.fixed] + hyps + [po.neg_goal])
    g = subst_formula(witness, f, VarGen())
    try:
        return eval_formula(g)
    except NotGround:
        return False


def _violated(po: PO, used: set[str], witness: dict[str, Term]) -> list[str]:
    """Pool hypotheses the ground witness falsifies (when evaluable)."""
    out = []
    for label, f in po.pool:
        if label in used:
            continue
        g = subst_formula(witness, f, VarGen())
        try:
            if not eval_formula(g):
                out.append(label)
        except NotGround:
            pass
    return out


def discharge(po: PO, *, budget: int = 200_000, max_hyp: int = 5,
              auto: bool = True,
              hints: Optional[dict[str, list[Term]]] = None) -> POResult:
    t0 = time.perf_counter()
    used: list[str] = []
    by_label = dict(po.pool)
    note = ""
    iterations = 0

    def ms() -> float:
        return (time.perf_counter() - t0) * 1000.0

    while True:
        iterations += 1
        hyps = [by_label[l] for l in used]
        res = solve(_query(po, hyps), budget=budget, max_solutions=1)

        if res.unsat:
            return POResult(po, "Proved", tuple(used), iterations, ms())

        witness: Optional[dict[str, Term]] = None
        if res.solutions:
            witness = ground_complete(res.solutions[0], hints=hints)
            if witness is not None and not _validate(po, hyps, witness):
                witness = None
                note = "witness failed ground validation"

        if witness is not None:
            bad = _violated(po, set(used), witness)
            if not bad:
                shown = {v: witness[v] for v in po.show_vars if v in witness}
                return POResult(po, "Disproved", tuple(used), iterations, ms(),
                                counterexample=shown)
            if auto and len(used) < max_hyp:
                ranked = _rank_pool(po, set(used))
                pick = next((l for l, _ in ranked if l in bad), bad[0])
                used.append(pick)
                continue
            return POResult(
                po, "Unknown", tuple(used), iterations, ms(),
                note=f"witness violates unassumed invariant {bad[0]}")

        # No certified witness: either the budget ran out or the answer
        # cannot be grounded.  More hypotheses can still settle it.
        if auto and len(used) < max_hyp:
            ranked = _rank_pool(po, set(used))
            if ranked:
                used.append(ranked[0][0])
                continue
        if res.exhausted_budget:
            note = "search budget exhausted"
        elif res.solutions and not note:
            note = "answer could not be grounded"
        return POResult(po, "Unknown", tuple(used), iterations, ms(), note=note)


def _discharge_job(args) -> POResult:
    po, budget, max_hyp, auto, hints = args
    return discharge(po, budget=budget, max_hyp=max_hyp, auto=auto, hints=hints)


def verify_machine(m: Machine, *, budget: int = 200_000, max_hyp: int = 5,
                   auto: bool = True, strict_wd: bool = False,
                   jobs: int = 1, typed: bool = True) -> list[POResult]:
    if typed:
        errors = typecheck_machine(m)
        if errors:
            raise VerifyError("type errors:\n" + "\n".join(errors))
    pos = generate_pos(m, strict_wd=strict_wd)
    hints = _hints(m)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_discharge_job,
                               [(po, budget, max_hyp, auto, hints) for po in pos]))
    return [discharge(po, budget=budget, max_hyp=max_hyp, auto=auto, hints=hints)
            for po in pos]


def report_json(m: Machine, results: list[POResult]) -> dict:
    counts = {"Proved": 0, "Disproved": 0, "Unknown": 0}
    rows = []
    for r in results:
        counts[r.status] += 1
        row = {
            "id": r.po.po_id,
            "kind": r.po.kind,
            "status": r.status,
            "goal": pp_formula(r.po.goal),
            "hypotheses_used": list(r.hyps_used),
            "iterations": r.iterations,
            "time_ms": round(r.time_ms, 3),
        }
        if r.counterexample is not None:
            row["counterexample"] = {k: pp_term(v)
                                     for k, v in sorted(r.counterexample.items())}
        if r.note:
            row["note"] = r.note
        rows.append(row)
    return {
        "machine": m.name,
        "summary": {
            "total": len(results),
            "proved": counts["Proved"],
            "disproved": counts["Disproved"],
            "unknown": counts["Unknown"],
        },
        "pos": rows,
    }


# --- animation ------------------------------------------------------------------

class GuardNotSatisfied(Exception):
    pass


class NondeterministicEvent(Exception):
    def __init__(self, msg: str, states: list[dict]):
        super().__init__(msg)
        self.states = states


def _canon(t: Term) -> Term:
    return value_to_term(term_value(t))


def initial_state(m: Machine, *, budget: int = 200_000,
                  carriers: Optional[dict[str, Term]] = None) -> dict[str, Term]:
    carriers = carriers or {}
    for name in carriers:
        if name not in {c.name for c in m.carriers}:
            raise VerifyError(f"{m.name} has no carrier set {name}")
    pins: list[Formula] = [C("eq", Var(k), t) for k, t in carriers.items()]
    f = conj([carrier_equalities(m)] + pins + [init_formula(m)])
    res = solve(f, budget=budget, max_solutions=1)
    if not res.solutions:
        if res.unsat:
            raise VerifyError("the initialisation is unsatisfiable")
        raise VerifyError("no initial state found within the budget")
    g = ground_complete(res.solutions[0], hints=_hints(m))
    if g is None:
        raise VerifyError("the initial state could not be grounded")
    state: dict[str, Term] = {}
    for c in m.carriers:
        if c.name in carriers:
            state[c.name] = _canon(carriers[c.name])
        elif c.members is not None:
            state[c.name] = mkset([Atom(x) for x in c.members])
        elif c.name in g:
            state[c.name] = _canon(g[c.name])
    for v in m.var_names():
        if v not in g:
            raise VerifyError(f"initialisation leaves {v} unconstrained")
        state[v] = _canon(g[v])
    return state


def step(m: Machine, state: dict[str, Term], event_name: str,
         args: Optional[dict[str, Term]] = None, *,
         budget: int = 200_000, max_successors: int = 8) -> list[dict[str, Term]]:
    """All distinct successor states of one event, in search order.

    An empty guard yields GuardNotSatisfied; callers that expect determinism
    can reject a result longer than one.
    """
    ev = m.event(event_name)
    args = args or {}
    for k in args:
        if k not in ev.params:
            raise VerifyError(f"{event_name} has no parameter {k}")
    parts: list[Formula] = [C("eq", Var(k), t) for k, t in state.items()]
    parts += [C("eq", Var(k), t) for k, t in args.items()]
    parts.append(event_formula(m, ev, frames=True))
    res = solve(conj(parts), budget=budget, max_solutions=max_successors)
    if not res.solutions:
        if res.unsat:
            raise GuardNotSatisfied(f"{event_name} is not enabled in this state")
        raise VerifyError("no successor found within the budget")
    out: list[dict[str, Term]] = []
    seen = set()
    for sol in res.solutions:
        g = ground_complete(sol, hints=_hints(m))
        if g is None:
            continue
        nxt: dict[str, Term] = {}
        for c in m.carriers:
            if c.name in state:
                nxt[c.name] = state[c.name]
        ok = True
        for v in m.var_names():
            t = g.get(v + "_")
            if t is None or not is_ground(t):
                ok = False
                break
            nxt[v] = _canon(t)
        if not ok:
            continue
        key = tuple(sorted((k, pp_term(v)) for k, v in nxt.items()))
        if key not in seen:
            seen.add(key)
            out.append(nxt)
    if not out:
        raise VerifyError("successor states could not be grounded")
    return out
