"""Reasoning workbench for dynamic topological logic with a polyadic tangle
modality: finite preorder models, simulation formulas, quasimodels, a
Hilbert-style proof checker, and bounded witness-producing satisfiability."""

__version__ = "0.1.0"

from .syntax import Formula, ParseError, parse, to_text
from .preorder import Preorder, PreorderError
from .semantics import DynModel, ModelError, model_from_json, model_to_json
from .states import State, StateError, TypedPreorder, state_from_json, state_to_json
from .quasimodel import Path, Quasimodel, quasimodel_from_json, quasimodel_to_json
from .proofkit import ProofObject, ProofStep, check_proof, proof_from_json, proof_to_json
from .statespace import Caps, SatReport, satisfy

__all__ = [
    "Formula", "ParseError", "parse", "to_text",
    "Preorder", "PreorderError",
    "DynModel", "ModelError", "model_from_json", "model_to_json",
    "State", "StateError", "TypedPreorder", "state_from_json", "state_to_json",
    "Path", "Quasimodel", "quasimodel_from_json", "quasimodel_to_json",
    "ProofObject", "ProofStep", "check_proof", "proof_from_json", "proof_to_json",
    "Caps", "SatReport", "satisfy",
    "__version__",
]
