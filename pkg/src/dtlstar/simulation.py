"""Simulations between typed preorders, between states, and into models.

A simulation is a continuous relation (back-down condition: anything below a
related source world must be matched below its target) whose pairs respect
types -- exact type equality between typed structures, satisfaction of the
source type when the target is a model.  The greatest simulation is computed
by fixpoint refinement from the full matching relation; it is the union of
all simulations, so root-relatedness in it decides the simulates-question.
"""

from __future__ import annotations

from dataclasses import dataclass

from .semantics import DynModel
from .states import State, TypedPreorder, type_key
from .util import Verdict, bits, fail


@dataclass(frozen=True)
class SimRelation:
    """Witnessing relation: pairs of (source world, target world)."""

    pairs: frozenset
    source_worlds: tuple
    target_worlds: tuple

    def related(self, w: str, v: str) -> bool:
        return (w, v) in self.pairs


def _refine(
    source: TypedPreorder,
    target_down: tuple[int, ...],
    initial: list[int],
) -> list[int]:
    """Shrink per-world target masks to the greatest continuous subrelation."""
    down = source.space.down
    n = len(initial)
    rel = list(initial)
    changed = True
    while changed:
        changed = False
        for w in range(n):
            m = rel[w]
            if not m:
                continue
            for v in bits(m):
                dv = target_down[v]
                ok = True
                for w2 in bits(down[w]):
                    if rel[w2] & dv == 0:
                        ok = False
                        break
                if not ok:
                    rel[w] &= ~(1 << v)
                    changed = True
    return rel


def greatest_simulation(a: TypedPreorder, b: TypedPreorder) -> SimRelation:
    """Largest type-preserving continuous relation between two typed preorders."""
    keys_b: dict[tuple, int] = {}
    for j, t in enumerate(b.types):
        keys_b.setdefault(type_key(t), 0)
        keys_b[type_key(t)] |= 1 << j
    initial = [keys_b.get(type_key(t), 0) for t in a.types]
    rel = _refine(a, b.space.down, initial)
    pairs = frozenset(
        (a.space.worlds[w], b.space.worlds[v])
        for w in range(len(rel))
        for v in bits(rel[w])
    )
    return SimRelation(pairs, a.space.worlds, b.space.worlds)


def simulates(w: State, v: State) -> Verdict:
    """Does the pattern of ``w`` embed into ``v`` from the roots?"""
    rel = greatest_simulation(w.base, v.base)
    if rel.related(w.root, v.root):
        return Verdict(True, "", rel)
    return fail("no simulation relates the roots", rel)


def simulated_points_mask(st: State, model: DynModel) -> int:
    """Mask of model points whose downset the state embeds into."""
    initial = []
    for t in st.types:
        m = model.space.full
        for f in t:
            m &= model.eval_mask(f)
            if not m:
                break
        initial.append(m)
    rel = _refine(st.base, model.space.down, initial)
    return rel[st.space.index[st.root]]


def simulates_in_model(st: State, model: DynModel, x: str) -> Verdict:
    """Continuous embedding of the state into the model at the point ``x``.

    Pairs must satisfy the source world's whole type at the target point.
    """
    initial = []
    for t in st.types:
        m = model.space.full
        for f in t:
            m &= model.eval_mask(f)
            if not m:
                break
        initial.append(m)
    rel = _refine(st.base, model.space.down, initial)
    pairs = frozenset(
        (st.space.worlds[w], model.space.worlds[v])
        for w in range(len(rel))
        for v in bits(rel[w])
    )
    witness = SimRelation(pairs, st.space.worlds, model.space.worlds)
    if rel[st.space.index[st.root]] >> model.space.index[x] & 1:
        return Verdict(True, "", witness)
    return fail("state does not embed at the point", witness)
