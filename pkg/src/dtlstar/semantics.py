"""Finite dynamic preorder models and full evaluation of the language.

A model is a finite preorder (read as a down-set topology), a continuous --
i.e. monotone -- self-map, and a valuation.  Evaluation follows the clause
set: Boolean set algebra, ``X`` as preimage under the map, ``G`` as the
greatest fixpoint of ``H = [[f]] & preimage(H)`` (which on a finite space
equals the intersection of all iterated preimages), and the tangle diamond
via the tangled closure.

The tangled closure of a family S of sets is computed two independent ways:

* ``tangled_gfp`` -- the production path: greatest fixpoint of the pruning
  map ``E -> {x in E : every A in S meets the downset of x inside E}``.
* ``tangled_cluster`` -- the oracle: a point qualifies iff some cluster in
  its downset contains a representative of every member of S.

The two must agree on every finite model; the test suite checks this
exhaustively on small spaces.
"""

from __future__ import annotations

import itertools
import random
from typing import Iterable, Iterator, Mapping, Sequence

from .preorder import Preorder, enumerate_preorders, is_continuous_map, monotone_maps
from .syntax import And, Formula, Hence, Neg, Next, Tangle, Var, parse
from .util import bits


class ModelError(ValueError):
    pass


class DynModel:
    """Immutable finite dynamic preorder model."""

    __slots__ = ("space", "f", "val", "strict", "_preimage", "_cache")

    def __init__(
        self,
        space: Preorder,
        f: Mapping[str, str],
        val: Mapping[str, Iterable[str] | int],
        strict: bool = False,
    ):
        self.space = space
        verdict = is_continuous_map(space, f)
        if not verdict:
            raise ModelError(f"map is not continuous: witness {verdict.witness}")
        self.f: tuple[int, ...] = tuple(space.index[f[w]] for w in space.worlds)
        masks: dict[str, int] = {}
        for var, ws in val.items():
            masks[var] = ws if isinstance(ws, int) else space.mask_of(ws)
        self.val = masks
        self.strict = strict
        pre = [0] * len(space.worlds)
        for x, y in enumerate(self.f):
            pre[y] |= 1 << x
        self._preimage: tuple[int, ...] = tuple(pre)
        self._cache: dict[Formula, int] = {}

    def __repr__(self) -> str:
        return f"DynModel({len(self.space.worlds)} worlds, {sorted(self.val)})"

    def map_of(self, w: str) -> str:
        return self.space.worlds[self.f[self.space.index[w]]]

    def preimage_mask(self, mask: int) -> int:
        out = 0
        for j in bits(mask):
            out |= self._preimage[j]
        return out

    def eval_mask(self, f: Formula) -> int:
        cached = self._cache.get(f)
        if cached is not None:
            return cached
        if isinstance(f, Var):
            if self.strict and f.name not in self.val:
                raise ModelError(f"valuation missing variable {f.name!r}")
            out = self.val.get(f.name, 0)
        elif isinstance(f, Neg):
            out = self.space.full ^ self.eval_mask(f.sub)
        elif isinstance(f, And):
            out = self.eval_mask(f.left) & self.eval_mask(f.right)
        elif isinstance(f, Next):
            out = self.preimage_mask(self.eval_mask(f.sub))
        elif isinstance(f, Hence):
            base = self.eval_mask(f.sub)
            out = base
            while True:
                nxt = base & self.preimage_mask(out)
                if nxt == out:
                    break
                out = nxt
        elif isinstance(f, Tangle):
            out = tangled_gfp_mask(self.space, [self.eval_mask(m) for m in f.members])
        else:
            raise TypeError(f"not a formula: {f!r}")
        self._cache[f] = out
        return out

    def clear_cache(self) -> None:
        """Drop memoized extensions; useful in long sweeps over one pool."""
        self._cache.clear()

    def eval(self, f: Formula) -> frozenset[str]:
        return self.space.ids_of(self.eval_mask(f))

    def satisfies(self, w: str, f: Formula) -> bool:
        return bool(self.eval_mask(f) >> self.space.index[w] & 1)

    def is_valid(self, f: Formula) -> bool:
        return self.eval_mask(f) == self.space.full


def eval_formula(model: DynModel, f: Formula) -> frozenset[str]:
    return model.eval(f)


# ---------------------------------------------------------------------------
# Tangled closure, two ways.

def tangled_gfp_mask(space: Preorder, sets: Sequence[int]) -> int:
    """Greatest fixpoint of the pruning map, starting from the whole space."""
    e = space.full
    down = space.down
    n = len(down)
    changed = True
    while changed:
        changed = False
        for i in range(n):
            if not e >> i & 1:
                continue
            de = down[i] & e
            for a in sets:
                if not de & a:
                    e ^= 1 << i
                    changed = True
                    break
    return e


def tangled_cluster_mask(space: Preorder, sets: Sequence[int]) -> int:
    """Oracle form: union of closures of clusters meeting every member."""
    out = 0
    for c in space.cluster_masks():
        if all(c & a for a in sets):
            out |= space.closure_mask(c)
    return out


def _space_of(model: DynModel | Preorder) -> Preorder:
    return model.space if isinstance(model, DynModel) else model


def _set_masks(space: Preorder, sets: Iterable[Iterable[str] | int]) -> list[int]:
    return [s if isinstance(s, int) else space.mask_of(s) for s in sets]


def tangled_gfp(model: DynModel | Preorder, sets: Iterable[Iterable[str] | int]) -> frozenset[str]:
    space = _space_of(model)
    return space.ids_of(tangled_gfp_mask(space, _set_masks(space, sets)))


def tangled_cluster(model: DynModel | Preorder, sets: Iterable[Iterable[str] | int]) -> frozenset[str]:
    space = _space_of(model)
    return space.ids_of(tangled_cluster_mask(space, _set_masks(space, sets)))


# ---------------------------------------------------------------------------
# Model JSON.

def model_from_json(data: Mapping) -> DynModel:
    try:
        worlds = data["worlds"]
        order = data.get("order", [])
        fmap = data["f"]
        val = data.get("val", {})
    except KeyError as e:
        raise ModelError(f"model JSON missing key {e}") from None
    space = Preorder(worlds, [tuple(p) for p in order])
    missing = [w for w in space.worlds if w not in fmap]
    if missing:
        raise ModelError(f"map not total: missing {missing}")
    return DynModel(space, fmap, {v: list(ws) for v, ws in val.items()},
                    strict=bool(data.get("strict", False)))


def model_to_json(model: DynModel) -> dict:
    space = model.space
    order = []
    for i, d in enumerate(space.down):
        for j in bits(d):
            if j != i:
                order.append([space.worlds[j], space.worlds[i]])
    return {
        "worlds": list(space.worlds),
        "order": order,
        "f": {w: model.map_of(w) for w in space.worlds},
        "val": {v: sorted(space.ids_of(m)) for v, m in sorted(model.val.items())},
    }


# ---------------------------------------------------------------------------
# Model enumeration.

EXHAUSTIVE_CAP = 5


def enumerate_models(
    n_max: int,
    vars: Sequence[str] = (),
    exhaustive: bool = True,
    seed: int | None = None,
    cap: int = EXHAUSTIVE_CAP,
) -> Iterator[DynModel]:
    """Stream finite models over the given variables.

    Exhaustive mode yields every preorder on at most ``n_max`` worlds up to
    isomorphism, every monotone self-map on it, and every valuation of the
    variables; the default cap guards against accidental blow-ups.  Random
    mode is an endless reproducible stream (uniform over labeled structures,
    not isomorphism classes) driven by ``seed``.
    """
    if exhaustive:
        if n_max > cap:
            raise ModelError(f"exhaustive enumeration capped at {cap} worlds (asked {n_max})")
        for n in range(1, n_max + 1):
            for space in enumerate_preorders(n):
                for fmap in monotone_maps(space):
                    for val in _all_valuations(space, vars):
                        yield DynModel(space, fmap, val)
        return
    rng = random.Random(seed)
    while True:
        yield random_model(rng, n_max, vars)


def _all_valuations(space: Preorder, vars: Sequence[str]) -> Iterator[dict[str, int]]:
    n = len(space.worlds)
    if not vars:
        yield {}
        return
    for combo in itertools.product(range(1 << n), repeat=len(vars)):
        yield {v: m for v, m in zip(vars, combo)}


def random_model(rng: random.Random, n_max: int, vars: Sequence[str]) -> DynModel:
    n = rng.randint(1, n_max)
    names = tuple(f"w{i}" for i in range(n))
    pairs = []
    for i in range(n):
        for j in range(n):
            if i != j and rng.random() < 0.35:
                pairs.append((names[i], names[j]))
    space = Preorder(names, pairs)
    fmap = _random_monotone_map(rng, space)
    val = {v: rng.randrange(1 << n) for v in vars}
    return DynModel(space, fmap, val)


def _random_monotone_map(rng: random.Random, space: Preorder, tries: int = 200) -> dict[str, str]:
    n = len(space.worlds)
    for _ in range(tries):
        f = {w: space.worlds[rng.randrange(n)] for w in space.worlds}
        if is_continuous_map(space, f):
            return f
    return {w: w for w in space.worlds}


def enumerate_static_models(
    n_max: int, vars: Sequence[str]
) -> Iterator[DynModel]:
    """Identity-map models, deduplicated up to isomorphism including valuation.

    Useful when evaluating map-free formulas: the map is irrelevant there, so
    one identity-map representative per (preorder, valuation) class covers
    every model.  Valuations are deduplicated through each preorder's
    automorphism group.
    """
    for n in range(1, n_max + 1):
        for space in enumerate_preorders(n):
            auts = space.automorphisms()
            ident = {w: w for w in space.worlds}
            seen: set[tuple[int, ...]] = set()
            for val in _all_valuations(space, vars):
                combo = tuple(val[v] for v in vars)
                canon = min(tuple(_permute_mask(m, perm) for m in combo) for perm in auts) \
                    if vars else ()
                if canon in seen:
                    continue
                seen.add(canon)
                yield DynModel(space, ident, val)


def _permute_mask(mask: int, perm: tuple[int, ...]) -> int:
    out = 0
    for i in bits(mask):
        out |= 1 << perm[i]
    return out


def parse_and_eval(model: DynModel, text: str) -> frozenset[str]:
    return model.eval(parse(text))


def format_worlds(ws: Iterable[str]) -> list[str]:
    return sorted(ws)
