"""Hilbert-style proof objects: axiom schemata, a step checker, and a
randomized soundness harness.

Schemata (ASCII names used in proof JSON):

    Taut      any propositional tautology over its modal-atom skeleton
    K         [](p -> q) -> ([]p -> []q)
    T         /\\ G -> <>G
    4         <><>G -> <>G
    FixDia    <>G -> /\\_{g in G} <>(g & <>G)
    IndDia    [](p -> /\\_{g in G} <>(p & g)) -> (p -> <>G)
    NegNext   ~X p <-> X ~p
    AndNext   X(p & q) <-> (X p & X q)
    FixHence  G p -> p & X G p
    IndHence  G(p -> X p) -> (p -> G p)
    TCont     <>{X g : g in G} -> X <>G

Rules: modus ponens (refs = [implication step, premise step]), substitution
into any earlier step, and necessitation for box, next, and henceforth.
Tautology steps are decided by a truth table over the step's maximal
non-Boolean subterms treated as atoms.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .semantics import model_to_json, random_model
from .syntax import (
    And,
    Formula,
    Hence,
    Neg,
    Next,
    Tangle,
    Var,
    box,
    conj,
    diamond,
    iff,
    implies,
    parse,
    substitute,
    to_text,
)
from .util import Verdict, OK, fail


class ProofError(ValueError):
    pass


AXIOM_NAMES = (
    "Taut", "K", "T", "4", "FixDia", "IndDia",
    "NegNext", "AndNext", "FixHence", "IndHence", "TCont",
)

RULE_NAMES = ("Axiom", "MP", "Subs", "NecBox", "NecNext", "NecHence")


def _need(inst: Mapping, key: str, kind: str) -> object:
    if key not in inst:
        raise ProofError(f"instantiation missing {key!r} ({kind})")
    return inst[key]


def _need_formula(inst: Mapping, key: str) -> Formula:
    v = _need(inst, key, "formula")
    if not isinstance(v, Formula):
        raise ProofError(f"instantiation entry {key!r} is not a formula")
    return v


def _need_gamma(inst: Mapping) -> tuple[Formula, ...]:
    v = _need(inst, "Gamma", "formula set")
    members = tuple(v)
    if not members:
        raise ProofError("empty Gamma: the conjunction over it has no formula form")
    if not all(isinstance(m, Formula) for m in members):
        raise ProofError("Gamma entries must be formulas")
    return members


def axiom_instance(name: str, inst: Mapping) -> Formula:
    """Build the named schema instance; rejects malformed instantiations."""
    if name == "Taut":
        f = _need_formula(inst, "formula")
        if not is_tautology(f):
            raise ProofError(f"not a propositional tautology: {to_text(f)}")
        return f
    if name == "K":
        p, q = _need_formula(inst, "p"), _need_formula(inst, "q")
        return implies(box(implies(p, q)), implies(box(p), box(q)))
    if name == "T":
        g = _need_gamma(inst)
        return implies(conj(g), Tangle(g))
    if name == "4":
        g = _need_gamma(inst)
        return implies(diamond(Tangle(g)), Tangle(g))
    if name == "FixDia":
        g = _need_gamma(inst)
        tg = Tangle(g)
        return implies(tg, conj(diamond(And(m, tg)) for m in g))
    if name == "IndDia":
        p = _need_formula(inst, "p")
        g = _need_gamma(inst)
        body = conj(diamond(And(p, m)) for m in g)
        return implies(box(implies(p, body)), implies(p, Tangle(g)))
    if name == "NegNext":
        p = _need_formula(inst, "p")
        return iff(Neg(Next(p)), Next(Neg(p)))
    if name == "AndNext":
        p, q = _need_formula(inst, "p"), _need_formula(inst, "q")
        return iff(Next(And(p, q)), And(Next(p), Next(q)))
    if name == "FixHence":
        p = _need_formula(inst, "p")
        return implies(Hence(p), And(p, Next(Hence(p))))
    if name == "IndHence":
        p = _need_formula(inst, "p")
        return implies(Hence(implies(p, Next(p))), implies(p, Hence(p)))
    if name == "TCont":
        g = _need_gamma(inst)
        return implies(Tangle(Next(m) for m in g), Next(Tangle(g)))
    raise ProofError(f"unknown axiom schema {name!r}")


def _boolean_atoms(f: Formula, atoms: list[Formula]) -> None:
    if isinstance(f, Neg):
        _boolean_atoms(f.sub, atoms)
    elif isinstance(f, And):
        _boolean_atoms(f.left, atoms)
        _boolean_atoms(f.right, atoms)
    else:
        if f not in atoms:
            atoms.append(f)


def is_tautology(f: Formula, atom_cap: int = 20) -> bool:
    """Truth-table over maximal non-Boolean subterms treated as atoms."""
    atoms: list[Formula] = []
    _boolean_atoms(f, atoms)
    if len(atoms) > atom_cap:
        raise ProofError(f"too many atoms for a truth table ({len(atoms)})")
    index = {a: i for i, a in enumerate(atoms)}

    def value(g: Formula, row: int) -> bool:
        if isinstance(g, Neg):
            return not value(g.sub, row)
        if isinstance(g, And):
            return value(g.left, row) and value(g.right, row)
        return bool(row >> index[g] & 1)

    return all(value(f, row) for row in range(1 << len(atoms)))


# ---------------------------------------------------------------------------
# Proof objects.

@dataclass
class ProofStep:
    formula: Formula
    rule: str
    name: str | None = None                 # axiom schema for rule == "Axiom"
    inst: dict = field(default_factory=dict)
    refs: tuple[int, ...] = ()              # 1-based earlier step indices
    subst: dict[str, Formula] = field(default_factory=dict)


@dataclass
class ProofObject:
    steps: list[ProofStep]

    def conclusion(self) -> Formula:
        if not self.steps:
            raise ProofError("empty proof")
        return self.steps[-1].formula


def check_proof(proof: ProofObject) -> Verdict:
    """Verify every step; the witness of a failure is the 1-based step index."""
    for k, step in enumerate(proof.steps, start=1):
        v = _check_step(proof, k, step)
        if not v:
            return Verdict(False, f"step {k}: {v.reason}", k)
    if not proof.steps:
        return fail("empty proof", 0)
    return OK


def _check_step(proof: ProofObject, k: int, step: ProofStep) -> Verdict:
    if step.rule not in RULE_NAMES:
        return fail(f"unknown rule {step.rule!r}")
    for r in step.refs:
        if not 1 <= r < k:
            return fail(f"reference {r} does not precede the step")
    try:
        if step.rule == "Axiom":
            if step.name is None:
                return fail("axiom step without a schema name")
            if step.name == "Taut":
                expected = axiom_instance("Taut", {"formula": step.formula})
            else:
                expected = axiom_instance(step.name, step.inst)
            if expected != step.formula:
                return fail(
                    f"schema {step.name} instance mismatch: expected {to_text(expected)}"
                )
            return OK
        if step.rule == "MP":
            if len(step.refs) != 2:
                return fail("modus ponens needs [implication, premise] references")
            imp = proof.steps[step.refs[0] - 1].formula
            prem = proof.steps[step.refs[1] - 1].formula
            # an implication a -> b is the primitive ~(a & ~b)
            if not (isinstance(imp, Neg) and isinstance(imp.sub, And)
                    and isinstance(imp.sub.right, Neg)):
                return fail("first reference is not an implication")
            if imp.sub.left != prem:
                return fail("premise does not match the implication antecedent")
            if imp.sub.right.sub != step.formula:
                return fail("conclusion does not match the implication consequent")
            return OK
        if step.rule == "Subs":
            if len(step.refs) != 1:
                return fail("substitution needs one reference")
            base = proof.steps[step.refs[0] - 1].formula
            if substitute(base, step.subst) != step.formula:
                return fail("formula is not the stated substitution instance")
            return OK
        if step.rule in ("NecBox", "NecNext", "NecHence"):
            if len(step.refs) != 1:
                return fail("necessitation needs one reference")
            base = proof.steps[step.refs[0] - 1].formula
            expected = {"NecBox": box, "NecNext": Next, "NecHence": Hence}[step.rule](base)
            if expected != step.formula:
                return fail(f"formula is not {step.rule} of the referenced step")
            return OK
    except ProofError as e:
        return fail(str(e))
    return fail("unhandled rule")  # pragma: no cover


# ---------------------------------------------------------------------------
# Proof JSON.

def proof_from_json(data: Mapping) -> ProofObject:
    steps = []
    for raw in data["steps"]:
        inst = {}
        for key, v in raw.get("inst", {}).items():
            if key == "Gamma":
                inst[key] = tuple(parse(s) for s in v)
            else:
                inst[key] = parse(v)
        steps.append(ProofStep(
            formula=parse(raw["formula"]),
            rule=raw["rule"],
            name=raw.get("name"),
            inst=inst,
            refs=tuple(raw.get("refs", ())),
            subst={k: parse(v) for k, v in raw.get("subst", {}).items()},
        ))
    return ProofObject(steps)


def proof_to_json(proof: ProofObject) -> dict:
    out = []
    for step in proof.steps:
        raw: dict = {"formula": to_text(step.formula), "rule": step.rule}
        if step.name:
            raw["name"] = step.name
        if step.inst:
            raw["inst"] = {
                k: [to_text(m) for m in v] if k == "Gamma" else to_text(v)
                for k, v in step.inst.items()
            }
        if step.refs:
            raw["refs"] = list(step.refs)
        if step.subst:
            raw["subst"] = {k: to_text(v) for k, v in step.subst.items()}
        out.append(raw)
    return {"steps": out}


# ---------------------------------------------------------------------------
# Soundness harness.

_TAUT_TEMPLATES = (
    "p -> p",
    "p -> (q -> p)",
    "(p -> q) -> ((q -> r) -> (p -> r))",
    "p & q -> p",
    "p | ~p",
    "~(p & ~p)",
)


def random_formula(rng: random.Random, vars: Sequence[str], depth: int) -> Formula:
    if depth <= 0 or rng.random() < 0.25:
        return Var(rng.choice(list(vars)))
    kind = rng.randrange(6)
    if kind == 0:
        return Neg(random_formula(rng, vars, depth - 1))
    if kind == 1:
        return And(random_formula(rng, vars, depth - 1), random_formula(rng, vars, depth - 1))
    if kind == 2:
        return Next(random_formula(rng, vars, depth - 1))
    if kind == 3:
        return Hence(random_formula(rng, vars, depth - 1))
    if kind == 4:
        return Tangle(
            random_formula(rng, vars, depth - 1)
            for _ in range(rng.randint(1, 3))
        )
    return Neg(Hence(Neg(random_formula(rng, vars, depth - 1))))


def random_axiom_instance(
    rng: random.Random, vars: Sequence[str] = ("p", "q", "r"),
    depth: int = 4, gamma_max: int = 3,
) -> tuple[str, Formula]:
    name = rng.choice(AXIOM_NAMES)
    if name == "Taut":
        template = parse(rng.choice(_TAUT_TEMPLATES))
        sigma = {v: random_formula(rng, vars, depth - 2) for v in ("p", "q", "r")}
        return name, axiom_instance("Taut", {"formula": substitute(template, sigma)})
    inst: dict = {}
    if name in ("K", "NegNext", "AndNext", "FixHence", "IndHence", "IndDia"):
        inst["p"] = random_formula(rng, vars, depth - 1)
        inst["q"] = random_formula(rng, vars, depth - 1)
    if name in ("T", "4", "FixDia", "IndDia", "TCont"):
        inst["Gamma"] = tuple(
            random_formula(rng, vars, depth - 1)
            for _ in range(rng.randint(1, gamma_max))
        )
    return name, axiom_instance(name, inst)


def _harness_trial(seed: int, trial: int, max_worlds: int, depth: int,
                   gamma_max: int, vars: Sequence[str]) -> dict | None:
    trial_rng = random.Random((seed, trial).__hash__())
    model = random_model(trial_rng, max_worlds, vars)
    name, instance = random_axiom_instance(trial_rng, vars, depth, gamma_max)
    if not model.is_valid(instance):
        return {
            "trial": trial, "kind": "axiom", "schema": name,
            "formula": to_text(instance), "model": model_to_json(model),
        }
    # rule-level check: necessitation preserves per-model validity
    for wrap, rule in ((box, "NecBox"), (Next, "NecNext"), (Hence, "NecHence")):
        wrapped = wrap(instance)
        if not model.is_valid(wrapped):
            return {
                "trial": trial, "kind": "rule", "rule": rule,
                "formula": to_text(wrapped), "model": model_to_json(model),
            }
    return None


def _harness_chunk(args: tuple) -> list[dict]:
    seed, lo, hi, max_worlds, depth, gamma_max, vars = args
    out = []
    for trial in range(lo, hi):
        v = _harness_trial(seed, trial, max_worlds, depth, gamma_max, vars)
        if v is not None:
            out.append(v)
    return out


def soundness_harness(
    trials: int,
    seed: int = 0,
    max_worlds: int = 6,
    depth: int = 4,
    gamma_max: int = 3,
    vars: Sequence[str] = ("p", "q", "r"),
    jobs: int = 1,
) -> dict:
    """Random axiom instances and rule applications over random models.

    Every instance must be valid on every sampled model, and necessitation
    of a formula valid on a model must stay valid on that model.  Violations
    ship the countermodel; a clean report is the expected outcome.  Trials
    derive their randomness from (seed, trial index), so the report does not
    depend on ``jobs``.
    """
    violations: list[dict] = []
    if jobs > 1 and trials > 1:
        from concurrent.futures import ProcessPoolExecutor

        step = max(1, -(-trials // jobs))
        chunks = [(seed, lo, min(lo + step, trials), max_worlds, depth,
                   gamma_max, tuple(vars)) for lo in range(0, trials, step)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for found in pool.map(_harness_chunk, chunks):
                violations.extend(found)
    else:
        for trial in range(trials):
            v = _harness_trial(seed, trial, max_worlds, depth, gamma_max, vars)
            if v is not None:
                violations.append(v)
    violations.sort(key=lambda v: v["trial"])
    return {
        "trials": trials,
        "seed": seed,
        "checked": trials,
        "violations": violations,
        "ok": not violations,
    }


def schema_sweep_instances(gamma_max: int = 2) -> list[tuple[str, Formula]]:
    """Every schema instantiated over the variables p, q with small Gamma."""
    p, q = Var("p"), Var("q")
    gammas = [g for size in range(1, gamma_max + 1)
              for g in itertools.combinations((p, q), size)]
    out: list[tuple[str, Formula]] = []
    for t in _TAUT_TEMPLATES:
        out.append(("Taut", axiom_instance("Taut", {"formula": parse(t.replace("r", "q"))})))
    for a, b in ((p, q), (q, p)):
        out.append(("K", axiom_instance("K", {"p": a, "q": b})))
        out.append(("NegNext", axiom_instance("NegNext", {"p": a})))
        out.append(("AndNext", axiom_instance("AndNext", {"p": a, "q": b})))
        out.append(("FixHence", axiom_instance("FixHence", {"p": a})))
        out.append(("IndHence", axiom_instance("IndHence", {"p": a})))
    for g in gammas:
        out.append(("T", axiom_instance("T", {"Gamma": g})))
        out.append(("4", axiom_instance("4", {"Gamma": g})))
        out.append(("FixDia", axiom_instance("FixDia", {"Gamma": g})))
        out.append(("TCont", axiom_instance("TCont", {"Gamma": g})))
        for a in (p, q):
            out.append(("IndDia", axiom_instance("IndDia", {"p": a, "Gamma": g})))
    return out
