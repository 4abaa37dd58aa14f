"""Defining formulas for "is simulated by this state".

For a distinctly typed state the constructed formula holds at a model point
exactly when the state's pattern embeds continuously below that point.  The
construction recurses on the rooted cluster structure:

    Sim(w) = /\\ type(root)
             & /\\_j <> Sim(daughter_j)
             & <>{ /\\ type(c) & /\\_j <> Sim(daughter_j)  :  c in root cluster }

with one daughter substate per immediate strictly-lower cluster of the root
cluster.  The tangle member set forces a single cluster in the model to host
matching points for every root-cluster world simultaneously, which is what
the back-and-forth unwinding of a simulation demands; plain closure diamonds
cannot express this.

The shipped formula is factored through indicator variables: the state is
retyped with one fresh variable per type in range, the construction runs on
that indicator state, and the indicators are substituted away by the type
conjunctions.  This keeps the defining property an instance of a purely
indicator-level fact and makes the factorization a syntactic identity.

Correctness is not assumed anywhere: the defining property is gated by an
exhaustive test over small states and models, and the construction can be
swapped behind ``sim_formula`` if a counterexample ever appears.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .semantics import DynModel, model_to_json
from .simulation import simulates
from .states import (
    State,
    StateError,
    _quotient,
    distinctly_typed,
    state_p,
    substate_at,
    substates,
    t_contains,
    type_key,
)
from .syntax import (
    Formula,
    Neg,
    Tangle,
    Var,
    conj,
    sub_pm,
    substitute,
    to_text,
)
from .util import bits

_RAW_CACHE: dict[tuple, Formula] = {}
_SIM_CACHE: dict[tuple, Formula] = {}


def _conj_set(parts: Iterable[Formula]) -> Formula:
    return conj(set(parts))


def raw_sim_formula(st: State) -> Formula:
    """The recursive construction applied to the state's own types."""
    key = st.canonical_key()
    cached = _RAW_CACHE.get(key)
    if cached is not None:
        return cached
    space = st.space
    ri = space.index[st.root]
    root_cluster = space.cluster_mask(ri)
    cms, below = _quotient(space)
    root_ci = next(ci for ci, c in enumerate(cms) if c == root_cluster)
    immediate = [
        d for d in below[root_ci]
        if not any(d in below[e] for e in below[root_ci])
    ]
    daughter_reps = []
    for d in immediate:
        rep = min(bits(cms[d]), key=lambda i: (type_key(st.types[i]), i))
        daughter_reps.append(space.worlds[rep])
    daughter_sims = [raw_sim_formula(substate_at(st, rep)) for rep in sorted(daughter_reps)]
    diamonds = [Tangle((s,)) for s in daughter_sims]
    members = []
    for c in bits(root_cluster):
        members.append(_conj_set([conj(st.types[c])] + diamonds))
    top = [conj(st.types[ri])] + diamonds + [Tangle(members)]
    out = _conj_set(top)
    _RAW_CACHE[key] = out
    return out


def _indicator_typed(st: State) -> bool:
    """One positive variable per type plus negations of all the others.

    Exactly the shape the indicator retyping produces; on such states the
    construction is its own factor, so the recursion bottoms out here.
    """
    positives: set[str] = set()
    for t in st.types:
        pos = [f for f in t if isinstance(f, Var)]
        if len(pos) != 1:
            return False
        if any(not (isinstance(f, Neg) and isinstance(f.sub, Var))
               for f in t if not isinstance(f, Var)):
            return False
        positives.add(pos[0].name)
    for t in st.types:
        mine = next(f for f in t if isinstance(f, Var)).name
        negs = {f.sub.name for f in t if isinstance(f, Neg)}
        if negs != positives - {mine}:
            return False
    return True


def sim_formula(st: State) -> Formula:
    """Formula defining "simulated by ``st``" on every finite model.

    Factored form: the indicator-state construction with indicators replaced
    by their type conjunctions.  Requires a distinctly typed state.
    """
    key = st.canonical_key()
    cached = _SIM_CACHE.get(key)
    if cached is not None:
        return cached
    verdict = distinctly_typed(st)
    if not verdict:
        raise StateError(f"state is not distinctly typed: {verdict.witness}")
    if any(not t for t in st.types):
        raise StateError("a world has an empty type; its conjunction has no formula form")
    if _indicator_typed(st):
        out = raw_sim_formula(st)
    else:
        pst, var_types = state_p(st)
        sigma = {name: conj(t) for name, t in var_types.items()}
        out = substitute(raw_sim_formula(pst), sigma)
    _SIM_CACHE[key] = out
    return out


# ---------------------------------------------------------------------------
# Property checks for simulation formulas over a model pool.

@dataclass
class ItemReport:
    checked: int = 0
    countermodel: dict | None = None

    @property
    def ok(self) -> bool:
        return self.countermodel is None


@dataclass
class PropsubReport:
    items: dict[int, ItemReport] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.items.values())


def _find_countermodel(pool: Sequence[DynModel], ant: Formula | None, cons: Formula) -> dict | None:
    for model in pool:
        if ant is None:
            am = model.space.full
        else:
            am = model.eval_mask(ant)
            if not am:
                continue
        bad = am & ~model.eval_mask(cons)
        if bad:
            w = model.space.worlds[next(bits(bad))]
            return {
                "model": model_to_json(model),
                "world": w,
                "antecedent": to_text(ant) if ant is not None else None,
                "consequent": to_text(cons),
            }
    return None


def _unsatisfiable_on(pool: Sequence[DynModel], f: Formula) -> dict | None:
    for model in pool:
        m = model.eval_mask(f)
        if m:
            return {
                "model": model_to_json(model),
                "world": model.space.worlds[next(bits(m))],
                "antecedent": to_text(f),
                "consequent": None,
            }
    return None


def _find_countermodel_disj(
    pool: Sequence[DynModel],
    ant: Formula,
    disjuncts: Sequence[Formula],
    through_next: bool = False,
) -> dict | None:
    """Implication into a large disjunction, checked disjunct by disjunct.

    Small disjuncts usually cover the antecedent within a few terms, so the
    disjunction is never materialized as one formula.  ``through_next``
    interposes the map preimage (the disjunction sits under a next).
    """
    ordered = sorted(disjuncts, key=lambda f: (len(to_text(f)), f.sort_key()))
    for model in pool:
        am = model.eval_mask(ant)
        if not am:
            continue
        bad = am
        for d in ordered:
            dm = model.eval_mask(d)
            if through_next:
                dm = model.preimage_mask(dm)
            bad &= ~dm
            if not bad:
                break
        if bad:
            return {
                "model": model_to_json(model),
                "world": model.space.worlds[next(bits(bad))],
                "antecedent": to_text(ant),
                "consequent": f"(lazy disjunction over {len(ordered)} terms"
                              f"{' under next' if through_next else ''})",
            }
    return None


def check_propsub(
    st: State,
    phi: Iterable[Formula],
    pool: Sequence[DynModel],
    i0_states: Sequence[State] | None = None,
    successor_states: Sequence[State] | None = None,
    items: Sequence[int] = (1, 2, 3, 4, 5),
) -> PropsubReport:
    """Check the five simulation-formula validities semantically over a pool.

    Item 4 needs the full list of norm-bounded states for ``phi`` (at least
    up to the pool's world count) and item 5 the state's small temporal
    successors; both are supplied by the caller so this module stays
    independent of the state-space machinery.
    """
    pool = list(pool)
    if not pool:
        raise ValueError("empty model pool")
    phi = tuple(phi)
    report = PropsubReport()
    sim_w = sim_formula(st)

    if 1 in items:
        rep = ItemReport()
        for psi in sorted(st.root_type(), key=Formula.sort_key):
            rep.checked += 1
            rep.countermodel = _find_countermodel(pool, sim_w, psi)
            if rep.countermodel:
                break
        report.items[1] = rep

    if 2 in items:
        rep = ItemReport()
        for v in _simulated_variants(st):
            rep.checked += 1
            rep.countermodel = _find_countermodel(pool, sim_w, sim_formula(v))
            if rep.countermodel:
                break
        report.items[2] = rep

    if 3 in items:
        rep = ItemReport()
        for v in substates(st):
            rep.checked += 1
            rep.countermodel = _find_countermodel(pool, sim_w, Tangle((sim_formula(v),)))
            if rep.countermodel:
                break
        report.items[3] = rep

    if 4 in items:
        if i0_states is None:
            raise ValueError("item 4 needs the norm-bounded state list")
        rep = ItemReport()
        for psi in sorted(sub_pm(phi), key=Formula.sort_key):
            rep.checked += 1
            disjuncts = [sim_formula(w) for w in i0_states if t_contains(w.root_type(), psi)]
            if disjuncts:
                rep.countermodel = _find_countermodel_disj(pool, psi, disjuncts)
            else:
                rep.countermodel = _unsatisfiable_on(pool, psi)
            if rep.countermodel:
                break
        report.items[4] = rep

    if 5 in items:
        if successor_states is None:
            raise ValueError("item 5 needs the small temporal successor list")
        rep = ItemReport()
        rep.checked = 1
        disjuncts = [sim_formula(v) for v in successor_states]
        if disjuncts:
            rep.countermodel = _find_countermodel_disj(
                pool, sim_w, disjuncts, through_next=True
            )
        else:
            rep.countermodel = _unsatisfiable_on(pool, sim_w)
        report.items[5] = rep

    return report


def _simulated_variants(st: State) -> list[State]:
    """Root-preserving restrictions of the state that it simulates."""
    space = st.space
    ri = space.index[st.root]
    rest = [i for i in range(len(space.worlds)) if i != ri]
    out = []
    for pick in range(1 << len(rest)):
        mask = 1 << ri
        for b in bits(pick):
            mask |= 1 << rest[b]
        v = State(st.base.restrict(mask), st.root)
        if simulates(v, st):
            out.append(v)
    return out
