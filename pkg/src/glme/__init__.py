"""Linear open quantum system dynamics with cross-damping.

Covariance-level simulation of bosonic and fermionic modes whose density
matrix evolution couples decoherence channels through a full decoherence
matrix, with dense brute-force oracles for validation.
"""

from . import bosonic, entanglement, fermionic, io, lyapunov, model, oracle, reservoir
from .model import (
    BOSONIC,
    FERMIONIC,
    GeneralizedLindbladModel,
    StandardForm,
    ValidationReport,
    ladder_to_canonical,
    canonical_to_ladder,
    split_non_hermitian,
    symplectic_form,
    to_standard_form,
    validate_model,
)

__all__ = [
    "BOSONIC",
    "FERMIONIC",
    "GeneralizedLindbladModel",
    "StandardForm",
    "ValidationReport",
    "bosonic",
    "canonical_to_ladder",
    "entanglement",
    "fermionic",
    "io",
    "ladder_to_canonical",
    "lyapunov",
    "model",
    "oracle",
    "reservoir",
    "split_non_hermitian",
    "symplectic_form",
    "to_standard_form",
    "validate_model",
]

__version__ = "0.1.0"
