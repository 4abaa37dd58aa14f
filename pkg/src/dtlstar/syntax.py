"""Formula AST and concrete syntax for the tangled dynamic modal language.

Primitive connectives: propositional variables, negation ``~``, conjunction
``&``, next ``X``, henceforth ``G``, and a polyadic tangle diamond ``<>{...}``
acting on a finite set of formulas.  Everything else is an abbreviation that
is expanded while parsing and never appears in the AST:

    a | b    ==  ~(~a & ~b)
    a -> b   ==  ~(a & ~b)
    a <-> b  ==  (a -> b) & (b -> a)
    <>a      ==  <>{a}          (singleton tangle = ordinary closure diamond)
    []a      ==  ~<>{~a}
    F a      ==  ~G~a           ("eventually")

Tangle members are kept as a duplicate-free, canonically sorted tuple, so
structural equality on ``Tangle`` nodes is set equality of the members.  The
empty tangle ``<>{}`` is admitted and evaluates to the whole space.
"""

from __future__ import annotations

import re
from typing import Callable, Iterable, Iterator, Mapping


class ParseError(ValueError):
    """Raised on malformed concrete syntax; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class Formula:
    """Base class; all nodes are immutable with cached structural keys."""

    __slots__ = ("_key", "_hash")

    _key: tuple
    _hash: int

    def sort_key(self) -> tuple:
        return self._key

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return isinstance(other, Formula) and self._key == other._key

    def __repr__(self) -> str:
        return f"Formula({to_text(self)!r})"

    def __str__(self) -> str:
        return to_text(self)


class Var(Formula):
    __slots__ = ("name",)

    def __init__(self, name: str):
        self.name = name
        self._key = (0, name)
        self._hash = hash(self._key)


class Neg(Formula):
    __slots__ = ("sub",)

    def __init__(self, sub: Formula):
        self.sub = sub
        self._key = (1, sub._key)
        self._hash = hash(self._key)


class And(Formula):
    __slots__ = ("left", "right")

    def __init__(self, left: Formula, right: Formula):
        self.left = left
        self.right = right
        self._key = (2, left._key, right._key)
        self._hash = hash(self._key)


class Next(Formula):
    __slots__ = ("sub",)

    def __init__(self, sub: Formula):
        self.sub = sub
        self._key = (3, sub._key)
        self._hash = hash(self._key)


class Hence(Formula):
    __slots__ = ("sub",)

    def __init__(self, sub: Formula):
        self.sub = sub
        self._key = (4, sub._key)
        self._hash = hash(self._key)


class Tangle(Formula):
    """Polyadic diamond over a finite set of member formulas."""

    __slots__ = ("members",)

    def __init__(self, members: Iterable[Formula]):
        seen: dict[tuple, Formula] = {}
        for m in members:
            seen[m._key] = m
        self.members = tuple(seen[k] for k in sorted(seen))
        self._key = (5, tuple(m._key for m in self.members))
        self._hash = hash(self._key)


# Abbreviation builders.  These expand to primitive nodes.

def or_(a: Formula, b: Formula) -> Formula:
    return Neg(And(Neg(a), Neg(b)))


def implies(a: Formula, b: Formula) -> Formula:
    return Neg(And(a, Neg(b)))


def iff(a: Formula, b: Formula) -> Formula:
    return And(implies(a, b), implies(b, a))


def diamond(a: Formula) -> Formula:
    return Tangle((a,))


def box(a: Formula) -> Formula:
    return Neg(Tangle((Neg(a),)))


def eventually(a: Formula) -> Formula:
    return Neg(Hence(Neg(a)))


def negated(a: Formula) -> Formula:
    """Canonical negation: strips one leading negation instead of stacking."""
    return a.sub if isinstance(a, Neg) else Neg(a)


def strip_double_neg(a: Formula) -> Formula:
    """Remove leading ~~ pairs; the normal form used for type membership."""
    while isinstance(a, Neg) and isinstance(a.sub, Neg):
        a = a.sub.sub
    return a


def sorted_formulas(formulas: Iterable[Formula]) -> list[Formula]:
    return sorted(formulas, key=Formula.sort_key)


def conj(formulas: Iterable[Formula]) -> Formula:
    """Left fold of ``&`` over the canonically sorted members; injective on sets."""
    ordered = sorted_formulas(set(formulas))
    if not ordered:
        raise ValueError("conjunction of an empty formula set is undefined")
    acc = ordered[0]
    for f in ordered[1:]:
        acc = And(acc, f)
    return acc


def disj(formulas: Iterable[Formula]) -> Formula:
    ordered = sorted_formulas(set(formulas))
    if not ordered:
        raise ValueError("disjunction of an empty formula set is undefined")
    acc = ordered[0]
    for f in ordered[1:]:
        acc = or_(acc, f)
    return acc


# ---------------------------------------------------------------------------
# Subformulas, substitution, and the henceforth-elimination transform.

def _as_formulas(obj: Formula | Iterable[Formula]) -> tuple[Formula, ...]:
    if isinstance(obj, Formula):
        return (obj,)
    return tuple(obj)


def subformulas(obj: Formula | Iterable[Formula]) -> frozenset[Formula]:
    """All subformulas, each formula counting as its own subformula.

    Members of a tangle set are subformulas of the tangle.
    """
    out: set[Formula] = set()
    stack = list(_as_formulas(obj))
    while stack:
        f = stack.pop()
        if f in out:
            continue
        out.add(f)
        if isinstance(f, (Neg, Next, Hence)):
            stack.append(f.sub)
        elif isinstance(f, And):
            stack.append(f.left)
            stack.append(f.right)
        elif isinstance(f, Tangle):
            stack.extend(f.members)
    return frozenset(out)


def formula_length(obj: Formula | Iterable[Formula]) -> int:
    """Number of distinct subformulas."""
    return len(subformulas(obj))


def sub_pm(obj: Formula | Iterable[Formula]) -> frozenset[Formula]:
    """Subformulas closed under negation, with ~~ collapsed away.

    Members are kept in stripped normal form so that membership tests have
    the intended "identify a formula with its double negation" behaviour.
    """
    out: set[Formula] = set()
    for f in subformulas(obj):
        g = strip_double_neg(f)
        out.add(g)
        out.add(negated(g))
    return frozenset(out)


def pm_contains(formulas: Iterable[Formula] | frozenset[Formula], f: Formula) -> bool:
    """Membership modulo ~~ collapse."""
    f = strip_double_neg(f)
    if isinstance(formulas, (set, frozenset)):
        return f in formulas or any(strip_double_neg(g) == f for g in formulas)
    return any(strip_double_neg(g) == f for g in formulas)


def variables(obj: Formula | Iterable[Formula]) -> frozenset[str]:
    return frozenset(f.name for f in subformulas(obj) if isinstance(f, Var))


def substitute(f: Formula, sigma: Mapping[str, Formula]) -> Formula:
    """Simultaneous replacement of variables by formulas."""
    if isinstance(f, Var):
        return sigma.get(f.name, f)
    if isinstance(f, Neg):
        return Neg(substitute(f.sub, sigma))
    if isinstance(f, And):
        return And(substitute(f.left, sigma), substitute(f.right, sigma))
    if isinstance(f, Next):
        return Next(substitute(f.sub, sigma))
    if isinstance(f, Hence):
        return Hence(substitute(f.sub, sigma))
    if isinstance(f, Tangle):
        return Tangle(substitute(m, sigma) for m in f.members)
    raise TypeError(f"not a formula: {f!r}")


def fresh_names(used: Iterable[str], prefix: str = "q") -> Iterator[str]:
    taken = set(used)
    i = 0
    while True:
        name = f"{prefix}{i}"
        if name not in taken:
            yield name
        i += 1


def q_transform(
    f: Formula, fresh: Callable[[int, Formula], str] | None = None
) -> tuple[Formula, dict[str, Formula]]:
    """Replace each outermost henceforth subterm ``G d`` by a fresh variable.

    Identical bodies share one variable.  Returns the transformed formula and
    the inverse substitution (variable name back to the replaced ``G d``),
    so that substituting back recovers the input exactly.
    """
    bodies: list[Formula] = []

    def collect(g: Formula) -> None:
        if isinstance(g, Hence):
            if g.sub not in bodies:
                bodies.append(g.sub)
            return
        if isinstance(g, Neg):
            collect(g.sub)
        elif isinstance(g, And):
            collect(g.left)
            collect(g.right)
        elif isinstance(g, Next):
            collect(g.sub)
        elif isinstance(g, Tangle):
            for m in g.members:
                collect(m)

    collect(f)
    bodies.sort(key=Formula.sort_key)
    if fresh is None:
        gen = fresh_names(variables(f))
        names = [next(gen) for _ in bodies]
    else:
        names = [fresh(i, d) for i, d in enumerate(bodies)]
        if len(set(names)) != len(names):
            raise ValueError("fresh allocator returned duplicate names")
    name_of = {d: n for d, n in zip(bodies, names)}

    def rewrite(g: Formula) -> Formula:
        if isinstance(g, Hence):
            return Var(name_of[g.sub])
        if isinstance(g, Var):
            return g
        if isinstance(g, Neg):
            return Neg(rewrite(g.sub))
        if isinstance(g, And):
            return And(rewrite(g.left), rewrite(g.right))
        if isinstance(g, Next):
            return Next(rewrite(g.sub))
        if isinstance(g, Tangle):
            return Tangle(rewrite(m) for m in g.members)
        raise TypeError(f"not a formula: {g!r}")

    inverse = {name_of[d]: Hence(d) for d in bodies}
    return rewrite(f), inverse


# ---------------------------------------------------------------------------
# Concrete syntax.

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<iff><->)|(?P<imp>->)|(?P<dia><>)|(?P<box>\[\])"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[&|~(){},]))"
)

_KEYWORDS = {"X", "G", "F"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens: list[tuple[str, str, int]] = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos:].lstrip()[0]!r}",
                             len(text) - len(text[pos:].lstrip()))
        pos = m.end()
        start = m.start(m.lastgroup)  # type: ignore[arg-type]
        if m.lastgroup == "ident":
            name = m.group("ident")
            if name in _KEYWORDS:
                tokens.append((name, name, start))
            else:
                tokens.append(("ident", name, start))
        elif m.lastgroup == "punct":
            tokens.append((m.group("punct"), m.group("punct"), start))
        else:
            tokens.append((m.lastgroup, m.group(m.lastgroup), start))  # type: ignore[arg-type]
    tokens.append(("eof", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def next(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind: str) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        if tok[0] != kind:
            raise ParseError(f"expected {kind!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.i += 1
        return tok

    def formula(self) -> Formula:
        a = self.imp()
        while self.peek() == "iff":
            self.next()
            a = iff(a, self.imp())
        return a

    def imp(self) -> Formula:
        a = self.or_()
        if self.peek() == "imp":
            self.next()
            return implies(a, self.imp())
        return a

    def or_(self) -> Formula:
        a = self.and_()
        while self.peek() == "|":
            self.next()
            a = or_(a, self.and_())
        return a

    def and_(self) -> Formula:
        a = self.unary()
        while self.peek() == "&":
            self.next()
            a = And(a, self.unary())
        return a

    def unary(self) -> Formula:
        kind, value, pos = self.next()
        if kind == "~":
            return Neg(self.unary())
        if kind == "X":
            return Next(self.unary())
        if kind == "G":
            return Hence(self.unary())
        if kind == "F":
            return eventually(self.unary())
        if kind == "box":
            return box(self.unary())
        if kind == "dia":
            if self.peek() == "{":
                self.next()
                members: list[Formula] = []
                if self.peek() == "}":
                    self.next()
                    return Tangle(())
                members.append(self.formula())
                while self.peek() == ",":
                    self.next()
                    members.append(self.formula())
                self.expect("}")
                return Tangle(members)
            return Tangle((self.unary(),))
        if kind == "(":
            a = self.formula()
            self.expect(")")
            return a
        if kind == "ident":
            return Var(value)
        raise ParseError(f"unexpected token {value or 'end of input'!r}", pos)


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    p.expect("eof")
    return f


def _wrap_unary(f: Formula) -> str:
    text = to_text(f)
    return f"({text})" if isinstance(f, And) else text


def to_text(f: Formula) -> str:
    """Canonical concrete syntax; parsing the output reproduces the AST."""
    if isinstance(f, Var):
        return f.name
    if isinstance(f, Neg):
        return "~" + _wrap_unary(f.sub)
    if isinstance(f, Next):
        return "X " + _wrap_unary(f.sub)
    if isinstance(f, Hence):
        return "G " + _wrap_unary(f.sub)
    if isinstance(f, And):
        left = to_text(f.left) if isinstance(f.left, And) else _wrap_unary(f.left)
        right = _wrap_unary(f.right)
        return f"{left} & {right}"
    if isinstance(f, Tangle):
        if len(f.members) == 1:
            return "<>" + _wrap_unary(f.members[0])
        return "<>{" + ", ".join(to_text(m) for m in f.members) + "}"
    raise TypeError(f"not a formula: {f!r}")
