"""Finite preorders viewed as topological spaces.

A finite preorder determines a topology whose open sets are exactly the
down-closed sets; the sets ``downset(w)`` form a basis.  Closure, interior,
cluster decomposition, and the continuity tests for maps and relations all
reduce to bitmask arithmetic over world indices, which is what this module
does throughout.  World identifiers are stable strings and every set-valued
result is reported in sorted id order.
"""

from __future__ import annotations

import itertools
from typing import Callable, Iterable, Iterator, Mapping

from .util import Verdict, OK, bits, fail


class PreorderError(ValueError):
    pass


class Preorder:
    """Worlds with a reflexive-transitive ``below`` relation.

    Input pairs ``(v, w)`` mean ``v`` lies below ``w`` (v is in the downset
    of w); the constructor closes them reflexively and transitively, so model
    authors may write Hasse-style edges.
    """

    __slots__ = ("worlds", "index", "down", "up", "full", "_cluster_masks", "_canon", "_auts")

    def __init__(self, worlds: Iterable[str], pairs: Iterable[tuple[str, str]] = ()):
        self.worlds: tuple[str, ...] = tuple(sorted(set(worlds)))
        if not self.worlds:
            raise PreorderError("a preorder needs at least one world")
        self.index: dict[str, int] = {w: i for i, w in enumerate(self.worlds)}
        n = len(self.worlds)
        down = [1 << i for i in range(n)]
        for v, w in pairs:
            if v not in self.index or w not in self.index:
                raise PreorderError(f"unknown world in order pair ({v!r}, {w!r})")
            down[self.index[w]] |= 1 << self.index[v]
        for k in range(n):
            bit = 1 << k
            for i in range(n):
                if down[i] & bit:
                    down[i] |= down[k]
        self.down: tuple[int, ...] = tuple(down)
        up = [0] * n
        for j in range(n):
            dj = down[j]
            for i in bits(dj):
                up[i] |= 1 << j
        self.up: tuple[int, ...] = tuple(up)
        self.full: int = (1 << n) - 1
        self._cluster_masks: tuple[int, ...] | None = None
        self._canon: tuple[tuple[int, ...], int] | None = None
        self._auts: tuple[tuple[int, ...], ...] | None = None

    def __len__(self) -> int:
        return len(self.worlds)

    def __repr__(self) -> str:
        return f"Preorder({len(self.worlds)} worlds)"

    # -- mask/id conversions ------------------------------------------------

    def mask_of(self, worlds: Iterable[str]) -> int:
        m = 0
        for w in worlds:
            try:
                m |= 1 << self.index[w]
            except KeyError:
                raise PreorderError(f"unknown world {w!r}") from None
        return m

    def ids_of(self, mask: int) -> frozenset[str]:
        return frozenset(self.worlds[i] for i in bits(mask))

    def le(self, v: str, w: str) -> bool:
        """v below w."""
        return bool(self.down[self.index[w]] >> self.index[v] & 1)

    # -- topology -----------------------------------------------------------

    def downset(self, w: str) -> frozenset[str]:
        if w not in self.index:
            raise PreorderError(f"unknown world {w!r}")
        return self.ids_of(self.down[self.index[w]])

    def closure_mask(self, mask: int) -> int:
        out = 0
        for i, d in enumerate(self.down):
            if d & mask:
                out |= 1 << i
        return out

    def interior_mask(self, mask: int) -> int:
        return self.full ^ self.closure_mask(self.full ^ mask)

    def closure(self, worlds: Iterable[str]) -> frozenset[str]:
        return self.ids_of(self.closure_mask(self.mask_of(worlds)))

    def interior(self, worlds: Iterable[str]) -> frozenset[str]:
        return self.ids_of(self.interior_mask(self.mask_of(worlds)))

    def is_open_mask(self, mask: int) -> bool:
        return all(self.down[i] & ~mask == 0 for i in bits(mask))

    def is_open(self, worlds: Iterable[str]) -> bool:
        return self.is_open_mask(self.mask_of(worlds))

    # -- clusters -----------------------------------------------------------

    def cluster_mask(self, i: int) -> int:
        return self.down[i] & self.up[i]

    def cluster_masks(self) -> tuple[int, ...]:
        """Distinct clusters, ordered by least member index."""
        if self._cluster_masks is None:
            seen: list[int] = []
            placed = 0
            for i in range(len(self.worlds)):
                if placed >> i & 1:
                    continue
                c = self.cluster_mask(i)
                seen.append(c)
                placed |= c
            self._cluster_masks = tuple(seen)
        return self._cluster_masks

    def cluster(self, w: str) -> frozenset[str]:
        return self.ids_of(self.cluster_mask(self.index[w]))

    # -- isomorphism --------------------------------------------------------

    def canonical_form(self) -> tuple[tuple[int, ...], int]:
        """Lexicographically least down-vector over all relabelings."""
        if self._canon is None:
            n = len(self.worlds)
            best: tuple[int, ...] | None = None
            for perm in itertools.permutations(range(n)):
                cand = _permute_down(self.down, perm)
                if best is None or cand < best:
                    best = cand
            assert best is not None
            self._canon = (best, n)
        return self._canon

    def automorphisms(self) -> tuple[tuple[int, ...], ...]:
        """All permutations of world indices preserving the order."""
        if self._auts is None:
            n = len(self.worlds)
            down = self.down
            auts = [perm for perm in itertools.permutations(range(n))
                    if _permute_down(down, perm) == down]
            self._auts = tuple(auts)
        return self._auts


def _permute_down(down: tuple[int, ...] | list[int], perm: tuple[int, ...]) -> tuple[int, ...]:
    n = len(down)
    out = [0] * n
    for i in range(n):
        m = 0
        d = down[i]
        for j in bits(d):
            m |= 1 << perm[j]
        out[perm[i]] = m
    return tuple(out)


def _resolve_map(p: Preorder, f: Mapping[str, str] | Callable[[str], str]) -> list[int]:
    get = f.__getitem__ if isinstance(f, Mapping) else f
    out = []
    for w in p.worlds:
        try:
            tgt = get(w)
        except KeyError:
            raise PreorderError(f"map undefined on world {w!r}") from None
        if tgt not in p.index:
            raise PreorderError(f"map sends {w!r} to unknown world {tgt!r}")
        out.append(p.index[tgt])
    return out


def is_continuous_map(p: Preorder, f: Mapping[str, str] | Callable[[str], str]) -> Verdict:
    """Continuity of a self-map; on a down-set topology this is monotonicity.

    On failure the witness is a pair ``(v, w)`` with v below w but f(v) not
    below f(w).
    """
    fi = _resolve_map(p, f)
    for w in range(len(p.worlds)):
        fw_down = p.down[fi[w]]
        for v in bits(p.down[w]):
            if not fw_down >> fi[v] & 1:
                return fail("map is not monotone", (p.worlds[v], p.worlds[w]))
    return OK


def is_continuous_relation(
    p: Preorder, q: Preorder, rel: Iterable[tuple[str, str]]
) -> Verdict:
    """Preimage-of-open-is-open test for a relation between two preorders.

    Equivalent back-down form: whenever ``w R v`` and ``w'`` is below ``w``,
    some ``v'`` below ``v`` has ``w' R v'``.  Witness on failure is
    ``(w', w, v)``: the pair (w, v) whose obligation at w' has no image.
    """
    images = [0] * len(p.worlds)
    for w, v in rel:
        if w not in p.index:
            raise PreorderError(f"unknown world {w!r} on the left of the relation")
        if v not in q.index:
            raise PreorderError(f"unknown world {v!r} on the right of the relation")
        images[p.index[w]] |= 1 << q.index[v]
    for w in range(len(p.worlds)):
        for v in bits(images[w]):
            dv = q.down[v]
            for w2 in bits(p.down[w]):
                if images[w2] & dv == 0:
                    return fail(
                        "relation is not continuous",
                        (p.worlds[w2], p.worlds[w], q.worlds[v]),
                    )
    return OK


# ---------------------------------------------------------------------------
# Enumeration.

def _down_vectors(n: int) -> Iterator[tuple[int, ...]]:
    """All reflexive-transitive down-vectors on n labeled points.

    A vector is valid iff membership nests: j in down[i] implies
    down[j] subset of down[i].
    """
    masks_with = [[m for m in range(1 << n) if m >> i & 1] for i in range(n)]
    chosen: list[int] = []

    def extend(i: int) -> Iterator[tuple[int, ...]]:
        if i == n:
            yield tuple(chosen)
            return
        for m in masks_with[i]:
            ok = True
            for j in range(i):
                dj = chosen[j]
                if m >> j & 1 and dj & ~m:
                    ok = False
                    break
                if dj >> i & 1 and m & ~dj:
                    ok = False
                    break
            if ok:
                chosen.append(m)
                yield from extend(i + 1)
                chosen.pop()

    yield from extend(0)


def enumerate_preorders(n: int, up_to_iso: bool = True) -> Iterator[Preorder]:
    """All preorders on exactly n worlds named w0..w{n-1}.

    With ``up_to_iso`` only one representative per isomorphism class is
    produced (canonical representative, deterministic order).
    """
    names = tuple(f"w{i}" for i in range(n))
    if not up_to_iso:
        for down in _down_vectors(n):
            yield _from_down(names, down)
        return
    seen: set[tuple[int, ...]] = set()
    reps: list[tuple[int, ...]] = []
    perms = list(itertools.permutations(range(n)))
    for down in _down_vectors(n):
        canon = min(_permute_down(down, perm) for perm in perms)
        if canon not in seen:
            seen.add(canon)
            reps.append(canon)
    for down in sorted(reps):
        yield _from_down(names, down)


def _from_down(names: tuple[str, ...], down: tuple[int, ...]) -> Preorder:
    pairs = []
    for i, d in enumerate(down):
        for j in bits(d):
            if j != i:
                pairs.append((names[j], names[i]))
    return Preorder(names, pairs)


def monotone_maps(p: Preorder) -> Iterator[dict[str, str]]:
    """All order-preserving self-maps, in deterministic order."""
    n = len(p.worlds)
    chosen: list[int] = []

    def extend(i: int) -> Iterator[dict[str, str]]:
        if i == n:
            yield {p.worlds[k]: p.worlds[chosen[k]] for k in range(n)}
            return
        for t in range(n):
            ok = True
            for j in range(i):
                if p.down[i] >> j & 1 and not p.down[t] >> chosen[j] & 1:
                    ok = False
                    break
                if p.down[j] >> i & 1 and not p.down[chosen[j]] >> t & 1:
                    ok = False
                    break
            if ok:
                chosen.append(t)
                yield from extend(i + 1)
                chosen.pop()

    yield from extend(0)
