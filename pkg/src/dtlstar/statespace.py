"""The universal state space, temporal successors, efficiency, reachability,
canonical structures over a consistency oracle, and bounded satisfiability.

States with a shared formula signature are related two ways: the substate
embedding (their order) and the temporal successor relation (a serial,
continuous, pairwise-sensible relation over their underlying worlds relating
the roots).  A successor is *small* when its norm stays within the source's
norm plus the number of tangle subformulas in play; efficient paths use only
small steps and forbid any earlier state that the path later simulates,
which keeps the search space finite.

Consistency of a state means its simulation formula cannot be refuted.
That is undecidable, so it is oracle-mediated here: a model-search oracle
(a finite model of the simulation formula proves consistency), a
proof-witness oracle (a checked derivation of the negated simulation formula
proves inconsistency), and a trusting oracle (everything consistent).
Unknown verdicts are reported, never silently dropped: a failed check on an
oracle-filtered structure distinguishes genuine violations from oracle gaps.

The ``satisfy`` pipeline is sound-only: a satisfiable verdict always carries
independently re-checkable witnesses (a model with a point, and, when the
reachable fragment certifies as a quasimodel, the fragment plus a realizing
lasso); exhausted caps yield "no witness found", never "unsatisfiable".
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Sequence

from .preorder import Preorder, enumerate_preorders
from .semantics import DynModel, enumerate_models, model_to_json
from .simformula import sim_formula
from .simulation import simulates
from .states import (
    State,
    StateError,
    TypedPreorder,
    norm,
    phi_types,
    state_of_model_point,
    state_to_json,
    sub_dia_count,
    substates,
    t_contains,
    type_key,
    validate_typing,
)
from .quasimodel import (
    Quasimodel,
    eventualities_of,
    is_sensible_pair,
    quasimodel_to_json,
    realizing_lasso,
    validate_quasimodel,
)
from .syntax import Formula, formula_length, to_text, variables
from .util import Verdict, bits, fail

# simulation's refinement loop drives the successor search as well
from .simulation import _refine, simulated_points_mask


@dataclass(frozen=True)
class Caps:
    """Engineering truncations; every cap hit is recorded in the output."""

    max_worlds: int = 6          # world cap for full state-space enumeration
    max_states: int = 2000
    state_worlds: int = 3        # world cap for states inside satisfy
    oracle_worlds: int = 3       # model size cap for the search oracle
    oracle_budget: int = 50_000
    fragment_states: int = 80
    path_steps: int = 50_000


class SpaceError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Temporal successors.

_SENSIBLE_MEMO: dict[tuple, bool] = {}


def _sensible_types(t1, t2) -> bool:
    key = (type_key(t1), type_key(t2))
    hit = _SENSIBLE_MEMO.get(key)
    if hit is None:
        hit = bool(is_sensible_pair(t1, t2))
        _SENSIBLE_MEMO[key] = hit
    return hit


def temporal_successor(w: State, v: State) -> Verdict:
    """Is there a serial continuous pairwise-sensible relation w -> v joining
    the roots?  Computed by refining the all-sensible-pairs relation; the
    greatest continuous subrelation decides both conditions at once."""
    nv = len(v.space.worlds)
    initial = []
    for t in w.types:
        m = 0
        for j in range(nv):
            if _sensible_types(t, v.types[j]):
                m |= 1 << j
        initial.append(m)
    rel = _refine(w.base, v.space.down, initial)
    ri = w.space.index[w.root]
    rj = v.space.index[v.root]
    if not rel[ri] >> rj & 1:
        return fail("no sensible continuous relation joins the roots")
    if any(m == 0 for m in rel):
        i = next(i for i, m in enumerate(rel) if m == 0)
        return fail("relation cannot be serial", w.space.worlds[i])
    pairs = frozenset(
        (w.space.worlds[i], v.space.worlds[j])
        for i in range(len(rel))
        for j in bits(rel[i])
    )
    return Verdict(True, "", pairs)


def is_small_successor(w: State, v: State) -> bool:
    """Norm bound for successors: target norm at most source norm plus the
    count of tangle subformulas appearing in the source's types."""
    return norm(v)[2] <= norm(w)[2] + sub_dia_count(w)


def small_temporal_successor(w: State, v: State) -> Verdict:
    t = temporal_successor(w, v)
    if not t:
        return t
    if not is_small_successor(w, v):
        return fail("successor exceeds the small norm bound", (norm(w), norm(v)))
    return t


# ---------------------------------------------------------------------------
# State enumeration.

@dataclass
class StateSpace:
    phi: tuple[Formula, ...]
    k: int
    norm_bound: int
    states: list[State]
    substate_pairs: set[tuple[int, int]]   # (substate, superstate)
    step_pairs: set[tuple[int, int]]
    small_pairs: set[tuple[int, int]]
    complete: bool
    notes: list[str] = field(default_factory=list)

    def index_of(self, st: State) -> int | None:
        key = st.canonical_key()
        for i, s in enumerate(self.states):
            if s.canonical_key() == key:
                return i
        return None

    def __len__(self) -> int:
        return len(self.states)


def _rooted_shapes(n: int) -> Iterator[tuple[Preorder, list[str]]]:
    for p in enumerate_preorders(n):
        tops = [w for w in p.worlds if p.down[p.index[w]] == p.full]
        if tops:
            yield p, tops


def enumerate_phi_states(
    phi: Iterable[Formula], k: int = 0, caps: Caps = Caps()
) -> tuple[list[State], bool, list[str]]:
    """All states over phi within the norm bound and the world cap.

    Returns (states, complete, notes); ``complete`` is False when a cap
    truncated the enumeration.
    """
    phi = tuple(phi)
    # an empty signature still admits the one-world state with the empty type
    bound = max(1, (k + 1) * formula_length(phi))
    types = phi_types(phi)
    notes: list[str] = []
    seen: set[tuple] = set()
    out: list[State] = []
    complete = True
    # a state within the norm bound has at most bound^bound clusters of at
    # most min(#types, 2^len) worlds each; never enumerate shapes past that
    max_cluster = min(len(types), 2 ** formula_length(phi))
    max_clusters = sum(max(1, bound) ** i for i in range(max(1, bound)))
    hard_world_cap = min(caps.max_worlds, max_cluster * max_clusters)
    for n in range(1, hard_world_cap + 1):
        for shape, tops in _rooted_shapes(n):
            shape_norm = _shape_norm(shape)
            if shape_norm > bound:
                continue
            cluster_list = shape.cluster_masks()
            for assign in _type_assignments(shape, cluster_list, types):
                tp = TypedPreorder(shape, list(assign))
                if not validate_typing(tp):
                    continue
                for root in tops:
                    st = State(tp, root)
                    key = st.canonical_key()
                    if key in seen:
                        continue
                    seen.add(key)
                    out.append(st)
                    if len(out) >= caps.max_states:
                        notes.append(f"state cap {caps.max_states} reached")
                        return out, False, notes
    if hard_world_cap < max_cluster * max_clusters:
        complete = False
        notes.append(f"world cap {hard_world_cap} below the norm-bound maximum")
    return out, complete, notes


def _shape_norm(p: Preorder) -> int:
    from .states import _quotient

    cms, below = _quotient(p)
    k = len(cms)
    memo = [0] * k
    remaining = set(range(k))
    while remaining:
        for ci in sorted(remaining):
            if all(d not in remaining for d in below[ci]):
                size = len(list(bits(cms[ci])))
                memo[ci] = size + max((memo[d] for d in below[ci]), default=0)
                remaining.discard(ci)
    hgt = max(memo)
    wdt = 0
    for ci in range(k):
        immediate = [d for d in below[ci] if not any(d in below[e] for e in below[ci])]
        wdt = max(wdt, len(immediate))
    return max(hgt, wdt)


def _type_assignments(shape: Preorder, clusters: Sequence[int], types: Sequence) -> Iterator[tuple]:
    """Assign a type per world, distinct within each cluster."""
    n = len(shape.worlds)
    cluster_of = [0] * n
    for ci, c in enumerate(clusters):
        for i in bits(c):
            cluster_of[i] = ci
    chosen: list = [None] * n

    def extend(i: int) -> Iterator[tuple]:
        if i == n:
            yield tuple(chosen)
            return
        for t in types:
            ok = True
            for j in range(i):
                if cluster_of[j] == cluster_of[i] and chosen[j] == t:
                    ok = False
                    break
            if ok:
                chosen[i] = t
                yield from extend(i + 1)
        chosen[i] = None

    yield from extend(0)


def enumerate_states(phi: Iterable[Formula], k: int = 0, caps: Caps = Caps()) -> StateSpace:
    """Materialize the state space with its substate and successor relations."""
    phi = tuple(phi)
    states, complete, notes = enumerate_phi_states(phi, k, caps)
    space = StateSpace(
        phi=phi,
        k=k,
        norm_bound=max(1, (k + 1) * formula_length(phi)),
        states=states,
        substate_pairs=set(),
        step_pairs=set(),
        small_pairs=set(),
        complete=complete,
        notes=notes,
    )
    key_index = {st.canonical_key(): i for i, st in enumerate(states)}
    for i, st in enumerate(states):
        for sub in substates(st):
            j = key_index.get(sub.canonical_key())
            if j is not None:
                space.substate_pairs.add((j, i))
            else:
                space.notes.append(f"substate of state {i} missing (cap)")
    for i, a in enumerate(states):
        for j, b in enumerate(states):
            if not _sensible_types(a.root_type(), b.root_type()):
                continue
            t = temporal_successor(a, b)
            if t:
                space.step_pairs.add((i, j))
                if is_small_successor(a, b):
                    space.small_pairs.add((i, j))
    return space


# ---------------------------------------------------------------------------
# Reduction into the base norm bound.

def reduce_state(
    st: State, phi: Iterable[Formula], extra_candidates: Sequence[State] = ()
) -> State | None:
    """Find a norm-bounded state that simulates the given one.

    Searches root-preserving restrictions first (dropping worlds preserves
    the root type and can only shrink the norm), then any supplied
    candidates.  Returns None
    when the capped search fails; callers treat that as unknown.
    """
    phi = tuple(phi)
    bound = max(1, formula_length(phi))
    if norm(st)[2] <= bound:
        return st
    space = st.space
    ri = space.index[st.root]
    rest = [i for i in range(len(space.worlds)) if i != ri]
    for size in range(len(rest) + 1):
        for combo in itertools.combinations(rest, size):
            mask = 1 << ri
            for i in combo:
                mask |= 1 << i
            try:
                cand = State(st.base.restrict(mask), st.root)
            except StateError:
                continue
            if norm(cand)[2] > bound:
                continue
            if not validate_typing(cand.base):
                continue
            if simulates(cand, st):
                return cand
    for cand in extra_candidates:
        if norm(cand)[2] <= bound and simulates(cand, st):
            return cand
    return None


# ---------------------------------------------------------------------------
# Efficiency and reachability.

@dataclass
class EfficientPaths:
    paths: list[tuple[int, ...]]
    prunes: list[tuple[tuple[int, ...], int, int]]  # (attempted path, m1, m2)
    truncated: bool


class _SimMemo:
    def __init__(self, states: Sequence[State]):
        self.states = states
        self.memo: dict[tuple[int, int], bool] = {}

    def __call__(self, i: int, j: int) -> bool:
        key = (i, j)
        hit = self.memo.get(key)
        if hit is None:
            hit = bool(simulates(self.states[i], self.states[j]))
            self.memo[key] = hit
        return hit


def efficient_paths(
    start: State | int, space: StateSpace, caps: Caps = Caps()
) -> EfficientPaths:
    """All maximal small-step paths from the start with no earlier state
    simulating a later one.  Any repeat is already inefficient, so only
    finitely many such paths exist; the step cap is a guard that flags
    truncation instead of hanging."""
    i0 = start if isinstance(start, int) else space.index_of(start)
    if i0 is None:
        raise SpaceError("start state not in the space")
    succ: dict[int, list[int]] = {}
    for a, b in sorted(space.small_pairs):
        succ.setdefault(a, []).append(b)
    sim = _SimMemo(space.states)
    result = EfficientPaths([], [], False)
    budget = caps.path_steps

    def walk(path: list[int]) -> None:
        nonlocal budget
        if budget <= 0:
            result.truncated = True
            return
        budget -= 1
        extended = False
        for nxt in succ.get(path[-1], []):
            bad = None
            for m1, old in enumerate(path):
                if sim(old, nxt):
                    bad = (tuple(path) + (nxt,), m1, len(path))
                    break
            if bad is not None:
                result.prunes.append(bad)
                continue
            extended = True
            path.append(nxt)
            walk(path)
            path.pop()
        if not extended:
            result.paths.append(tuple(path))

    walk([i0])
    return result


@dataclass(frozen=True)
class ConsistencyVerdict:
    status: str  # "consistent" | "inconsistent" | "unknown"
    witness: Any = None
    note: str = ""

    @property
    def consistent(self) -> bool:
        return self.status == "consistent"


class TrustingOracle:
    """Marks every state consistent; reproduces the unrestricted space."""

    name = "trusting"

    def judge(self, st: State) -> ConsistencyVerdict:
        return ConsistencyVerdict("consistent", None, "assumed")


class ModelSearchOracle:
    """Bounded search for a finite model of the state's simulation formula.

    A hit proves consistency (the axioms are sound); exhaustion leaves the
    state unknown, never inconsistent.
    """

    name = "model-search"

    def __init__(self, max_worlds: int = 3, budget: int = 50_000,
                 hint_models: Sequence[DynModel] = ()):
        self.max_worlds = max_worlds
        self.budget = budget
        self.hint_models = list(hint_models)
        self._cache: dict[tuple, ConsistencyVerdict] = {}

    def judge(self, st: State) -> ConsistencyVerdict:
        key = st.canonical_key()
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        f = sim_formula(st)
        out = None
        for model in self.hint_models:
            m = model.eval_mask(f)
            if m:
                x = model.space.worlds[next(bits(m))]
                out = ConsistencyVerdict(
                    "consistent", {"model": model_to_json(model), "point": x}, "hint model"
                )
                break
        if out is None:
            examined = 0
            vars_ = sorted(variables(f))
            for model in enumerate_models(self.max_worlds, vars_):
                examined += 1
                if examined > self.budget:
                    out = ConsistencyVerdict("unknown", None, f"budget {self.budget} exhausted")
                    break
                m = model.eval_mask(f)
                if m:
                    x = model.space.worlds[next(bits(m))]
                    out = ConsistencyVerdict(
                        "consistent", {"model": model_to_json(model), "point": x},
                        f"model found after {examined}"
                    )
                    break
            else:
                out = ConsistencyVerdict(
                    "unknown", None,
                    f"no model with at most {self.max_worlds} worlds ({examined} searched)"
                )
        self._cache[key] = out
        return out


class ProofWitnessOracle:
    """Accepts user-supplied derivations of the negated simulation formula."""

    name = "proof-witness"

    def __init__(self, proofs: Sequence = ()):
        self.proofs = list(proofs)

    def judge(self, st: State) -> ConsistencyVerdict:
        from .proofkit import check_proof
        from .syntax import Neg

        goal = Neg(sim_formula(st))
        for proof in self.proofs:
            if proof.steps and proof.steps[-1].formula == goal and check_proof(proof):
                return ConsistencyVerdict("inconsistent", proof, "derivation of the negation")
        return ConsistencyVerdict("unknown", None, "no matching derivation")


def make_oracle(name: str, caps: Caps = Caps(), **kw) -> Any:
    if name == "trusting":
        return TrustingOracle()
    if name == "model-search":
        return ModelSearchOracle(caps.oracle_worlds, caps.oracle_budget, **kw)
    raise SpaceError(f"unknown oracle {name!r}")


@dataclass
class ReachResult:
    reachable: set[int]
    excluded_unknown: set[int]
    truncated: bool


def reachable(
    start: State | int,
    space: StateSpace,
    oracle,
    caps: Caps = Caps(),
    unknown_policy: str = "exclude",
) -> ReachResult:
    """Endpoints of efficient small-step paths through consistent states.

    Unknown states are excluded by default (and recorded); with policy
    "include" they are treated as consistent.
    """
    i0 = start if isinstance(start, int) else space.index_of(start)
    if i0 is None:
        raise SpaceError("start state not in the space")
    verdicts = [oracle.judge(st) for st in space.states]

    def allowed(i: int) -> bool:
        if verdicts[i].consistent:
            return True
        return unknown_policy == "include" and verdicts[i].status == "unknown"

    excluded = {i for i, v in enumerate(verdicts) if v.status == "unknown"}
    if not allowed(i0):
        return ReachResult(set(), excluded, False)
    succ: dict[int, list[int]] = {}
    for a, b in sorted(space.small_pairs):
        if allowed(a) and allowed(b):
            succ.setdefault(a, []).append(b)
    sim = _SimMemo(space.states)
    out: set[int] = set()
    truncated = False
    budget = caps.path_steps

    def walk(path: list[int]) -> None:
        nonlocal budget, truncated
        if budget <= 0:
            truncated = True
            return
        budget -= 1
        out.add(path[-1])
        for nxt in succ.get(path[-1], []):
            if any(sim(old, nxt) for old in path):
                continue
            path.append(nxt)
            walk(path)
            path.pop()

    walk([i0])
    return ReachResult(out, excluded, truncated)


# ---------------------------------------------------------------------------
# Canonical structures.

@dataclass
class CanonicalResult:
    structure: Quasimodel | None
    state_names: dict[str, int]
    verdicts: list[ConsistencyVerdict]
    openness: list[dict]
    seriality: list[dict]
    eventuality: list[dict]
    quasimodel_verdict: Verdict | None
    regular: bool

    def check_summary(self) -> dict:
        return {
            "openness_issues": self.openness,
            "seriality_issues": self.seriality,
            "eventuality_issues": self.eventuality,
            "quasimodel": None if self.quasimodel_verdict is None
            else {"ok": bool(self.quasimodel_verdict),
                  "reason": self.quasimodel_verdict.reason},
            "regular": self.regular,
        }


def canonical_structure(
    phi: Iterable[Formula], space: StateSpace, oracle, caps: Caps = Caps()
) -> CanonicalResult:
    """Restrict the space to oracle-consistent states and run the structure
    checks: substate-closure of consistency, small-step seriality, and
    realization of every eventuality within reach.  A structure passing all
    checks and the quasimodel laws is certified regular."""
    verdicts = [oracle.judge(st) for st in space.states]
    cons = [i for i, v in enumerate(verdicts) if v.consistent]
    cons_set = set(cons)
    kind = lambda i: "violation" if verdicts[i].status == "inconsistent" else "oracle-gap"

    openness: list[dict] = []
    for (sub, sup) in sorted(space.substate_pairs):
        if sup in cons_set and sub not in cons_set:
            openness.append({"state": sup, "substate": sub, "kind": kind(sub)})

    seriality: list[dict] = []
    for i in cons:
        if not any((i, j) in space.small_pairs and j in cons_set for j in range(len(space.states))):
            gap = any((i, j) in space.small_pairs for j in range(len(space.states)))
            seriality.append({
                "state": i,
                "kind": "oracle-gap" if gap or not space.complete else "violation",
            })

    eventuality: list[dict] = []
    for i in cons:
        evs = eventualities_of(space.states[i].root_type())
        if not evs:
            continue
        rho = reachable(i, space, oracle, caps).reachable
        for ev, target in evs:
            if not any(t_contains(space.states[j].root_type(), target) for j in rho):
                eventuality.append({
                    "state": i,
                    "eventuality": to_text(ev),
                    "kind": "violation" if space.complete else "oracle-gap",
                })

    structure = None
    qverdict = None
    names: dict[str, int] = {}
    if cons:
        names = {f"s{pos}": i for pos, i in enumerate(cons)}
        rev = {i: nm for nm, i in names.items()}
        worlds = sorted(names)
        order = [
            (rev[sub], rev[sup])
            for (sub, sup) in space.substate_pairs
            if sub in cons_set and sup in cons_set
        ]
        types = {rev[i]: space.states[i].root_type() for i in cons}
        step = [
            (rev[a], rev[b])
            for (a, b) in space.step_pairs
            if a in cons_set and b in cons_set
        ]
        try:
            structure = Quasimodel(
                TypedPreorder(Preorder(worlds, order), types), step
            )
            qverdict = validate_quasimodel(structure)
        except (StateError, ValueError) as e:
            qverdict = fail(f"structure not well formed: {e}")
    regular = (
        not openness
        and not seriality
        and not eventuality
        and qverdict is not None
        and bool(qverdict)
    )
    return CanonicalResult(
        structure, names, verdicts, openness, seriality, eventuality, qverdict, regular
    )


# ---------------------------------------------------------------------------
# Satisfiability.

@dataclass
class SatReport:
    verdict: str  # "satisfiable" | "no-witness-found"
    formula: str
    witness_model: dict | None = None
    witness_state: dict | None = None
    quasimodel: dict | None = None
    quasimodel_states: dict | None = None
    lasso: dict | None = None
    checks: dict | None = None
    info: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "formula": self.formula,
            "witness_model": self.witness_model,
            "witness_state": self.witness_state,
            "quasimodel": self.quasimodel,
            "quasimodel_states": self.quasimodel_states,
            "lasso": self.lasso,
            "checks": self.checks,
            "info": self.info,
        }


def _fragment_from_model(
    model: DynModel, phi: tuple[Formula, ...], x: str, caps: Caps
) -> tuple[list[State], dict[int, str], list[tuple[int, int]], list[str]]:
    """Orbit-closed family of model-derived states with step edges.

    Nodes are the point-states of every world in the forward closure of the
    downset of ``x``; each node is anchored at a model point witnessing its
    consistency, and steps follow the map on anchors.
    """
    space = model.space
    points: set[int] = set(bits(space.down[space.index[x]]))
    frontier = list(points)
    while frontier:
        i = frontier.pop()
        j = model.f[i]
        if j not in points:
            points.add(j)
            frontier.append(j)
        for d in bits(space.down[j]):
            if d not in points:
                points.add(d)
                frontier.append(d)
    notes: list[str] = []
    nodes: list[State] = []
    anchor: dict[int, str] = {}
    key_of: dict[tuple, int] = {}
    point_node: dict[int, int] = {}
    for i in sorted(points):
        st = state_of_model_point(model, phi, space.worlds[i])
        key = st.canonical_key()
        if key not in key_of:
            if len(nodes) >= caps.fragment_states:
                notes.append(f"fragment cap {caps.fragment_states} reached")
                break
            key_of[key] = len(nodes)
            nodes.append(st)
            anchor[key_of[key]] = space.worlds[i]
        point_node[i] = key_of[key]
    edges: set[tuple[int, int]] = set()
    for i in sorted(points):
        if i in point_node and model.f[i] in point_node:
            edges.add((point_node[i], point_node[model.f[i]]))
    return nodes, anchor, sorted(edges), notes


def satisfy(
    formula: Formula,
    caps: Caps = Caps(),
    oracle: str = "model-search",
    seed: int = 0,
) -> SatReport:
    """Witness-producing bounded satisfiability.

    With the model-search oracle: look for a finite model of the formula
    within caps; on a hit, carve the witness state out of the satisfying
    point, build the reachable model-derived fragment, re-verify every step
    edge, run the structure checks on it, and emit all witnesses.  With the
    trusting oracle: pure state search.  Never answers "unsatisfiable".
    """
    if oracle not in ("model-search", "trusting"):
        raise SpaceError(f"unknown oracle {oracle!r}")
    phi = (formula,)
    info: dict[str, Any] = {
        "caps": {
            "max_worlds": caps.max_worlds,
            "oracle_worlds": caps.oracle_worlds,
            "oracle_budget": caps.oracle_budget,
            "fragment_states": caps.fragment_states,
        },
        "oracle": oracle,
        "seed": seed,
    }
    witness_types = [t for t in phi_types(phi) if t_contains(t, formula)]
    if not witness_types:
        info["reason"] = "no type contains the formula"
        return SatReport("no-witness-found", to_text(formula), info=info)

    if oracle == "trusting":
        return _satisfy_trusting(formula, caps, info)

    vars_ = sorted(variables(formula))
    examined = 0
    hit: tuple[DynModel, str] | None = None
    for model in enumerate_models(caps.oracle_worlds, vars_):
        examined += 1
        if examined > caps.oracle_budget:
            break
        m = model.eval_mask(formula)
        if m:
            hit = (model, model.space.worlds[next(bits(m))])
            break
    info["models_examined"] = examined
    if hit is None:
        info["reason"] = "no model within caps"
        return SatReport("no-witness-found", to_text(formula), info=info)

    model, x = hit
    w_star = state_of_model_point(model, phi, x)
    orbit_key = w_star.canonical_key()
    reduced = reduce_state(w_star, phi)
    if reduced is None:
        info["witness_state_in_base_norm"] = False
    else:
        info["witness_state_in_base_norm"] = True
        w_star = reduced

    nodes, anchors, edges, notes = _fragment_from_model(model, phi, x, caps)
    info["fragment_notes"] = notes
    # independent re-verification of every edge and of node consistency
    verified_edges = []
    for (a, b) in edges:
        if temporal_successor(nodes[a], nodes[b]):
            verified_edges.append((a, b))
        else:
            notes.append(f"edge ({a},{b}) failed re-verification")
    small_edges = [
        (a, b) for (a, b) in verified_edges if is_small_successor(nodes[a], nodes[b])
    ]
    consistency = []
    for i, st in enumerate(nodes):
        m = simulated_points_mask(st, model)
        if m:
            consistency.append(
                ConsistencyVerdict("consistent",
                                   {"point": model.space.worlds[next(bits(m))]},
                                   "witness model")
            )
        else:  # pragma: no cover - construction guarantees a point
            consistency.append(ConsistencyVerdict("unknown", None, "no point in witness model"))

    names = {i: f"s{i}" for i in range(len(nodes))}
    key_index = {st.canonical_key(): i for i, st in enumerate(nodes)}
    sub_pairs = set()
    for i, st in enumerate(nodes):
        for sub in substates(st):
            j = key_index.get(sub.canonical_key())
            if j is not None:
                sub_pairs.add((j, i))
    openness = [
        {"state": i, "substate": None, "kind": "oracle-gap"}
        for i, st in enumerate(nodes)
        if any(sub.canonical_key() not in key_index for sub in substates(st))
    ]
    seriality = [
        {"state": i, "kind": "oracle-gap"}
        for i in range(len(nodes))
        if not any(a == i for (a, b) in small_edges)
    ]

    structure = None
    qverdict: Verdict | None = None
    lasso_json = None
    # the lasso starts at the orbit node carved from the satisfying point;
    # its root type matches the reported witness state's root type
    start_idx = key_index.get(orbit_key)
    try:
        structure = Quasimodel(
            TypedPreorder(
                Preorder([names[i] for i in range(len(nodes))],
                         [(names[a], names[b]) for (a, b) in sub_pairs]),
                {names[i]: nodes[i].root_type() for i in range(len(nodes))},
            ),
            [(names[a], names[b]) for (a, b) in verified_edges],
        )
        qverdict = validate_quasimodel(structure)
        if qverdict and start_idx is not None:
            lasso = realizing_lasso(structure, names[start_idx])
            lasso_json = {"worlds": list(lasso.worlds), "loop": lasso.loop}
    except (StateError, ValueError) as e:
        qverdict = fail(f"fragment not well formed: {e}")

    checks = {
        "edge_count": len(verified_edges),
        "small_edge_count": len(small_edges),
        "openness_issues": openness,
        "seriality_issues": seriality,
        "quasimodel": None if qverdict is None else {
            "ok": bool(qverdict), "reason": qverdict.reason
        },
        "consistency": [
            {"state": names[i], "status": v.status, "note": v.note}
            for i, v in enumerate(consistency)
        ],
    }
    report = SatReport(
        "satisfiable",
        to_text(formula),
        witness_model={"model": model_to_json(model), "point": x},
        witness_state=state_to_json(w_star),
        checks=checks,
        info=info,
    )
    if structure is not None and qverdict:
        report.quasimodel = quasimodel_to_json(structure)
        report.quasimodel_states = {
            names[i]: state_to_json(st) for i, st in enumerate(nodes)
        }
        report.lasso = lasso_json
    return report


def _satisfy_trusting(formula: Formula, caps: Caps, info: dict) -> SatReport:
    """State-search pipeline under the trusting oracle.

    Satisfiable only when the restricted space certifies as a quasimodel and
    carries the formula; otherwise honestly inconclusive.
    """
    phi = (formula,)
    space = enumerate_states(
        phi, 0,
        Caps(max_worlds=caps.state_worlds, max_states=caps.max_states,
             path_steps=caps.path_steps),
    )
    info["space_states"] = len(space.states)
    info["space_complete"] = space.complete
    oracle = TrustingOracle()
    result = canonical_structure(phi, space, oracle, caps)
    start = next(
        (i for i, st in enumerate(space.states) if t_contains(st.root_type(), formula)),
        None,
    )
    checks = result.check_summary()
    if (
        start is not None
        and result.structure is not None
        and result.quasimodel_verdict
    ):
        name = next(nm for nm, i in result.state_names.items() if i == start)
        lasso = realizing_lasso(result.structure, name)
        return SatReport(
            "satisfiable",
            to_text(formula),
            witness_state=state_to_json(space.states[start]),
            quasimodel=quasimodel_to_json(result.structure),
            quasimodel_states={
                nm: state_to_json(space.states[i]) for nm, i in result.state_names.items()
            },
            lasso={"worlds": list(lasso.worlds), "loop": lasso.loop},
            checks=checks,
            info=info,
        )
    info["reason"] = "restricted space did not certify as a quasimodel" \
        if start is not None else "no enumerated state carries the formula"
    return SatReport("no-witness-found", to_text(formula), checks=checks, info=info)
