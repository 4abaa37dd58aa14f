"""Weak types, typed preorders, and rooted states.

A *type* here is a finite set of formulas subject to local closure laws
(no member together with its negation, conjunctions split, negated
conjunctions split negatively, henceforth members imply their body).  Type
members are stored with leading double negations stripped, and membership is
always tested modulo that normalization.

A *typed preorder* attaches a type to every world and must satisfy the two
tangle witness laws: a tangle member of a type needs a cluster below the
world covering all its members, and a negated tangle member forbids any such
cluster from jointly refuting it.  A *state* is a finite typed preorder with
a top point above everything; states are the local building blocks of the
satisfiability machinery, are kept duplicate-free inside clusters, and
compare equal exactly when isomorphic.
"""

from __future__ import annotations

import itertools
from typing import Iterable, Mapping, Sequence

from .preorder import Preorder
from .semantics import DynModel
from .syntax import (
    And,
    Formula,
    Hence,
    Neg,
    Next,
    Tangle,
    Var,
    negated,
    parse,
    strip_double_neg,
    sub_pm,
    subformulas,
    substitute,
    to_text,
    variables,
)
from .util import Verdict, OK, bits, fail

TypeSet = frozenset  # of Formula, normalized members


class StateError(ValueError):
    pass


def norm_type(formulas: Iterable[Formula]) -> TypeSet:
    return frozenset(strip_double_neg(f) for f in formulas)


def t_contains(t: TypeSet, f: Formula) -> bool:
    return strip_double_neg(f) in t


def type_key(t: TypeSet) -> tuple:
    return tuple(sorted(f.sort_key() for f in t))


def is_weak_type(t: Iterable[Formula]) -> Verdict:
    t = norm_type(t)
    for f in t:
        if negated(f) in t:
            return fail("member and its negation both present", f)
        if isinstance(f, And):
            if not t_contains(t, f.left) or not t_contains(t, f.right):
                return fail("conjunction member without both conjuncts", f)
        elif isinstance(f, Neg) and isinstance(f.sub, And):
            a = negated(strip_double_neg(f.sub.left))
            b = negated(strip_double_neg(f.sub.right))
            if a not in t and b not in t:
                return fail("negated conjunction without a negated conjunct", f)
        elif isinstance(f, Hence):
            if not t_contains(t, f.sub):
                return fail("henceforth member without its body", f)
    return OK


def is_phi_type(t: Iterable[Formula], phi: Iterable[Formula]) -> Verdict:
    """Weak type that decides every subformula of phi and stays inside sub±."""
    t = norm_type(t)
    weak = is_weak_type(t)
    if not weak:
        return weak
    allowed = sub_pm(phi)
    for f in t:
        if f not in allowed:
            return fail("member outside the signed subformula closure", f)
    for s in subformulas(phi):
        s = strip_double_neg(s)
        if s not in t and negated(s) not in t:
            return fail("undecided subformula", s)
    return OK


def phi_types(phi: Iterable[Formula]) -> list[TypeSet]:
    """All types over phi, deterministically ordered."""
    phi = tuple(phi)
    reps: set[Formula] = set()
    for s in subformulas(phi):
        s = strip_double_neg(s)
        reps.add(s.sub if isinstance(s, Neg) else s)
    ordered = sorted(reps, key=Formula.sort_key)
    out = []
    for signs in itertools.product((False, True), repeat=len(ordered)):
        t = frozenset(negated(r) if s else r for r, s in zip(ordered, signs))
        if is_weak_type(t):
            out.append(t)
    out.sort(key=type_key)
    return out


class TypedPreorder:
    """A preorder with a type attached to each world."""

    __slots__ = ("space", "types")

    def __init__(self, space: Preorder, types: Mapping[str, Iterable[Formula]] | Sequence[Iterable[Formula]]):
        self.space = space
        if isinstance(types, Mapping):
            missing = [w for w in space.worlds if w not in types]
            if missing:
                raise StateError(f"missing types for worlds {missing}")
            self.types: tuple[TypeSet, ...] = tuple(norm_type(types[w]) for w in space.worlds)
        else:
            if len(types) != len(space.worlds):
                raise StateError("one type per world required")
            self.types = tuple(norm_type(t) for t in types)

    def type_of(self, w: str) -> TypeSet:
        return self.types[self.space.index[w]]

    def cluster_union(self, mask: int) -> TypeSet:
        out: set[Formula] = set()
        for i in bits(mask):
            out |= self.types[i]
        return frozenset(out)

    def restrict(self, mask: int) -> "TypedPreorder":
        keep = [i for i in bits(mask)]
        names = [self.space.worlds[i] for i in keep]
        pairs = [
            (self.space.worlds[j], self.space.worlds[i])
            for i in keep
            for j in bits(self.space.down[i] & mask)
            if j != i
        ]
        space = Preorder(names, pairs)
        return TypedPreorder(space, {self.space.worlds[i]: self.types[i] for i in keep})

    def __repr__(self) -> str:
        return f"TypedPreorder({len(self.space.worlds)} worlds)"


def validate_typing(tp: TypedPreorder) -> Verdict:
    """Both tangle witness laws, for every world and tangle-shaped member.

    Failure witness is ``(world, formula)`` for the offending obligation.
    """
    space = tp.space
    cluster_of_rep = {c: tp.cluster_union(c) for c in space.cluster_masks()}
    cluster_inter: dict[int, TypeSet] = {}
    for c in space.cluster_masks():
        members = [tp.types[i] for i in bits(c)]
        inter = set(members[0])
        for t in members[1:]:
            inter &= t
        cluster_inter[c] = frozenset(inter)
    for w in range(len(space.worlds)):
        clusters_below = {c for c in space.cluster_masks() if c & space.down[w]}
        for f in tp.types[w]:
            if isinstance(f, Tangle):
                if not any(
                    all(t_contains(cluster_of_rep[c], g) for g in f.members)
                    for c in clusters_below
                ):
                    return fail("tangle member lacks a witnessing cluster",
                                (space.worlds[w], f))
            elif isinstance(f, Neg) and isinstance(f.sub, Tangle):
                for c in clusters_below:
                    if not any(
                        negated(strip_double_neg(g)) in cluster_inter[c]
                        for g in f.sub.members
                    ):
                        return fail("negated tangle member refuted by a cluster below",
                                    (space.worlds[w], f))
    return OK


class State:
    """Finite rooted typed preorder, duplicate-free inside each cluster.

    Equality and hashing are up to isomorphism (type- and root-preserving
    relabeling), via a cached canonical form.
    """

    __slots__ = ("base", "root", "_canon")

    def __init__(self, base: TypedPreorder, root: str):
        self.base = base
        if root not in base.space.index:
            raise StateError(f"unknown root {root!r}")
        self.root = root
        space = base.space
        ri = space.index[root]
        if space.down[ri] != space.full:
            raise StateError("not every world lies below the root")
        for c in space.cluster_masks():
            seen: set[TypeSet] = set()
            for i in bits(c):
                if base.types[i] in seen:
                    raise StateError(
                        f"two equivalent worlds share a type in cluster {sorted(space.ids_of(c))}"
                    )
                seen.add(base.types[i])
        self._canon: tuple | None = None

    @property
    def space(self) -> Preorder:
        return self.base.space

    @property
    def types(self) -> tuple[TypeSet, ...]:
        return self.base.types

    def root_type(self) -> TypeSet:
        return self.base.type_of(self.root)

    def type_of(self, w: str) -> TypeSet:
        return self.base.type_of(w)

    def __len__(self) -> int:
        return len(self.space.worlds)

    def __repr__(self) -> str:
        return f"State({len(self)} worlds, root={self.root!r})"

    def canonical_key(self) -> tuple:
        if self._canon is None:
            self._canon = _canonical_state_key(self)
        return self._canon

    def __eq__(self, other: object) -> bool:
        return isinstance(other, State) and self.canonical_key() == other.canonical_key()

    def __hash__(self) -> int:
        return hash(self.canonical_key())


def _canonical_state_key(st: State) -> tuple:
    space = st.space
    n = len(space.worlds)
    ri = space.index[st.root]
    type_ranks = {k: r for r, k in enumerate(sorted({type_key(t) for t in st.types}))}
    color = [(i == ri, type_ranks[type_key(st.types[i])]) for i in range(n)]
    while True:
        ranked = {c: r for r, c in enumerate(sorted(set(color)))}
        cur = [ranked[c] for c in color]
        refined = [
            (
                cur[i],
                tuple(sorted(cur[j] for j in bits(space.down[i]))),
                tuple(sorted(cur[j] for j in bits(space.up[i]))),
            )
            for i in range(n)
        ]
        ranked2 = {c: r for r, c in enumerate(sorted(set(refined)))}
        nxt = [ranked2[c] for c in refined]
        if nxt == cur:
            color = nxt
            break
        color = refined
    order = sorted(range(n), key=lambda i: (color[i], i))
    groups: list[list[int]] = []
    for i in order:
        if groups and color[groups[-1][0]] == color[i]:
            groups[-1].append(i)
        else:
            groups.append([i])
    best: tuple | None = None
    for arrangement in itertools.product(*(itertools.permutations(g) for g in groups)):
        flat = [i for g in arrangement for i in g]
        pos = {old: new for new, old in enumerate(flat)}
        downs = [0] * n
        for old in range(n):
            m = 0
            for j in bits(space.down[old]):
                m |= 1 << pos[j]
            downs[pos[old]] = m
        cand = (
            tuple(type_key(st.types[old]) for old in flat),
            tuple(downs),
            pos[ri],
        )
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best


# ---------------------------------------------------------------------------
# Bridges from models.

def type_of_world(model: DynModel, phi: Iterable[Formula], w: str) -> TypeSet:
    """The signed subformulas of phi true at w."""
    return frozenset(f for f in sub_pm(phi) if model.satisfies(w, f))


def typed_preorder_of_model(model: DynModel, phi: Iterable[Formula]) -> TypedPreorder:
    phi = tuple(phi)
    spm = sorted(sub_pm(phi), key=Formula.sort_key)
    types = []
    for w in model.space.worlds:
        types.append(frozenset(f for f in spm if model.satisfies(w, f)))
    return TypedPreorder(model.space, types)


def state_of_model_point(model: DynModel, phi: Iterable[Formula], x: str) -> State:
    """The state carved out of the downset of ``x``, with semantic types.

    Worlds that are equivalent and carry the same type are merged, so the
    output always satisfies the duplicate-free state invariant.  The point
    ``x`` survives the merge as the root.
    """
    space = model.space
    xi = space.index[x]
    tp = typed_preorder_of_model(model, phi)
    reps: dict[tuple[int, tuple], int] = {}
    for i in bits(space.down[xi]):
        key = (space.cluster_mask(i), type_key(tp.types[i]))
        if key not in reps or i == xi:
            reps[key] = i
    keep = 0
    for i in reps.values():
        keep |= 1 << i
    return State(tp.restrict(keep), x)


# ---------------------------------------------------------------------------
# Norms.

def _quotient(space: Preorder) -> tuple[tuple[int, ...], list[list[int]]]:
    """Cluster masks plus, per cluster, the list of strictly lower clusters."""
    cms = space.cluster_masks()
    below: list[list[int]] = []
    for ci, c in enumerate(cms):
        rep = next(bits(c))
        lower = []
        for dj, d in enumerate(cms):
            if dj == ci:
                continue
            drep = next(bits(d))
            if space.down[rep] >> drep & 1:
                lower.append(dj)
        below.append(lower)
    return cms, below


def norm(st: State) -> tuple[int, int, int]:
    """Height, width, and their maximum.

    Height counts distinct worlds along a maximal comparability chain, so a
    cluster contributes its whole size; bounding height and width therefore
    bounds the state's world count on its own.  (Counting only strict steps
    is refuted by experiment: the small-successor norm budget it yields is
    too tight for cluster states to discharge their eventualities, breaking
    the successor-disjunction validity that the acceptance suite gates.)
    Width is the largest number of immediate strictly-lower daughter
    clusters any single world has.
    """
    space = st.space
    cms, below = _quotient(space)
    k = len(cms)
    hgt_memo = [0] * k
    remaining = set(range(k))
    while remaining:
        progressed = False
        for ci in sorted(remaining):
            if all(d not in remaining for d in below[ci]):
                size = len(list(bits(cms[ci])))
                hgt_memo[ci] = size + max((hgt_memo[d] for d in below[ci]), default=0)
                remaining.discard(ci)
                progressed = True
        if not progressed:  # pragma: no cover - quotient of a preorder is acyclic
            raise StateError("cyclic quotient")
    hgt = max(hgt_memo)
    wdt = 0
    for ci in range(k):
        immediate = [
            d for d in below[ci]
            if not any(d in below[e] for e in below[ci])
        ]
        wdt = max(wdt, len(immediate))
    return hgt, wdt, max(hgt, wdt)


def sub_dia_count(st: State) -> int:
    """Distinct tangle-shaped subformulas occurring in any type of the state."""
    tangles: set[Formula] = set()
    for t in st.types:
        for f in subformulas(t):
            if isinstance(f, Tangle):
                tangles.add(f)
    return len(tangles)


# ---------------------------------------------------------------------------
# Substates and state transforms.

def substate_at(st: State, v: str) -> State:
    vi = st.space.index[v]
    return State(st.base.restrict(st.space.down[vi]), v)


def substates(st: State) -> list[State]:
    """One generated substate per world, the state itself at the root."""
    return [substate_at(st, v) for v in st.space.worlds]


def distinctly_typed(st: State) -> Verdict:
    distinct = sorted({type_key(t): t for t in st.types}.items())
    tys = [t for _, t in distinct]
    for a, b in itertools.combinations(tys, 2):
        if not any(negated(f) in b for f in a) and not any(negated(f) in a for f in b):
            return fail("two types differ without an explicit conflict",
                        (sorted(map(to_text, a)), sorted(map(to_text, b))))
    return OK


def state_p(st: State) -> tuple[State, dict[str, TypeSet]]:
    """Retype each world by indicator variables, one per type in range.

    The world's own indicator is asserted and every other range type's
    indicator is denied.  Returns the retyped state and the variable-to-type
    map needed to substitute the indicators away again.
    """
    rng = sorted({type_key(t): t for t in st.types}.items())
    used = set()
    for t in st.types:
        used |= variables(t)
    # Zero-padded so later batches of fresh names sort the same way; keeps
    # the indicator construction stable under repeated application.
    gen = (f"pt{i:03d}" for i in itertools.count())
    fresh = (nm for nm in gen if nm not in used)
    names = [next(fresh) for _ in rng]
    name_of = {k: nm for (k, _), nm in zip(rng, names)}
    new_types = []
    for t in st.types:
        mine = name_of[type_key(t)]
        members = [Var(mine)]
        members.extend(Neg(Var(nm)) for nm in names if nm != mine)
        new_types.append(frozenset(members))
    base = TypedPreorder(st.space, new_types)
    return State(base, st.root), {nm: t for (_, t), nm in zip(rng, names)}


def state_plus(st: State, phi: Iterable[Formula], range_over_types: bool = False) -> State:
    """Close every type under the next-step consequences of its temporal members.

    For each henceforth formula (drawn from ``phi`` itself, or from the type
    when ``range_over_types`` is set) the type gains its next-shifted copy;
    each unrealized eventuality gains its next-shifted copy too.
    """
    phi = tuple(phi)
    hence_pool = [f for f in phi if isinstance(f, Hence)]
    new_types = []
    for t in st.types:
        add: set[Formula] = set(t)
        pool = [f for f in t if isinstance(f, Hence)] if range_over_types else hence_pool
        for f in pool:
            add.add(Next(f))
        for f in t:
            if isinstance(f, Neg) and isinstance(f.sub, Hence):
                body = negated(strip_double_neg(f.sub.sub))
                if body not in t:
                    add.add(Next(f))
        new_types.append(frozenset(add))
    return State(TypedPreorder(st.space, new_types), st.root)


def state_subst(st: State, sigma: Mapping[str, Formula]) -> State:
    """Map every type member through a substitution; may collapse types.

    Raises if the substitution makes two equivalent worlds indistinguishable.
    """
    new_types = [norm_type(substitute(f, sigma) for f in t) for t in st.types]
    try:
        return State(TypedPreorder(st.space, new_types), st.root)
    except StateError as e:
        raise StateError(f"substitution collapses equivalent worlds: {e}") from None


# ---------------------------------------------------------------------------
# JSON.

def state_from_json(data: Mapping) -> State:
    space = Preorder(data["worlds"], [tuple(p) for p in data.get("order", [])])
    types = {w: [parse(s) for s in ts] for w, ts in data["types"].items()}
    return State(TypedPreorder(space, types), data["root"])


def state_to_json(st: State) -> dict:
    space = st.space
    order = []
    for i, d in enumerate(space.down):
        for j in bits(d):
            if j != i:
                order.append([space.worlds[j], space.worlds[i]])
    return {
        "worlds": list(space.worlds),
        "order": order,
        "root": st.root,
        "types": {
            w: sorted(to_text(f) for f in st.type_of(w)) for w in space.worlds
        },
    }
