"""
Theories over learned constraints and the natural-deduction prover that queries them
"""

from .fitch import Proof, Rule, Step
from .prover import ProofResult, Theory, build_theory, check_proof, entails, prove
from .store import TheoryDocument, load_theory, save_theory

__all__ = [
    "Proof",
    "ProofResult",
    "Rule",
    "Step",
    "Theory",
    "TheoryDocument",
    "build_theory",
    "check_proof",
    "entails",
    "load_theory",
    "prove",
    "save_theory",
]
