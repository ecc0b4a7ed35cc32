"""Model container, validation, and basis conversions for linear open systems.

A model pairs a quadratic Hamiltonian matrix with a set of linear decoherence
channels. The channels are rows of a coefficient matrix ``f`` expressed in the
canonical basis (quadratures for bosons, Majorana operators for fermions), and
a decoherence matrix ``gamma`` weights products of channels: diagonal entries
are ordinary independent damping, off-diagonal entries are cross-damping
mediated by a common reservoir. Complete positivity of the induced dynamics
requires ``gamma`` to be Hermitian positive semidefinite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import max_abs, require_matrix, require_square
from .errors import PositivityError, StructuralError

BOSONIC = "bosonic"
FERMIONIC = "fermionic"
FLAVORS = (BOSONIC, FERMIONIC)

DEFAULT_TOL = 1e-10


def symplectic_form(n_modes: int) -> np.ndarray:
    """Block-diagonal symplectic form in the interleaved (q1, p1, ...) ordering.

    Each mode contributes a [[0, 1], [-1, 0]] block, so the output is
    antisymmetric and squares to minus the identity.
    """
    if n_modes < 1:
        raise StructuralError("n_modes must be at least 1")
    omega = np.zeros((2 * n_modes, 2 * n_modes))
    for j in range(n_modes):
        omega[2 * j, 2 * j + 1] = 1.0
        omega[2 * j + 1, 2 * j] = -1.0
    return omega


@dataclass(frozen=True)
class ValidationReport:
    """Numeric defects of a model against its positivity and symmetry invariants."""

    hermitian_defect: float
    min_gamma_eigenvalue: float
    hamiltonian_symmetry_defect: float
    is_valid: bool


@dataclass(frozen=True)
class StandardForm:
    """Diagonalized decoherence data.

    ``rates`` are nonnegative reals and ``operator_rows[l]`` holds the
    canonical-basis coefficients of the decoherence operator attached to
    ``rates[l]``. Rows are ordered by descending rate, ties broken by
    lexicographic order of the rows.
    """

    rates: np.ndarray
    operator_rows: np.ndarray


@dataclass(frozen=True)
class GeneralizedLindbladModel:
    """Linear open-system model data.

    Attributes
    ----------
    flavor:
        "bosonic" or "fermionic".
    n_modes:
        Number of modes N; canonical vectors have length 2N.
    hamiltonian:
        Real 2N x 2N quadratic-form matrix: symmetric for bosons,
        antisymmetric for fermions.
    f:
        Complex M x 2N channel coefficient matrix, canonical basis.
    gamma:
        Complex M x M decoherence matrix.
    """

    flavor: str
    n_modes: int
    hamiltonian: np.ndarray
    f: np.ndarray
    gamma: np.ndarray

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise StructuralError(f"unknown flavor {self.flavor!r}, expected one of {FLAVORS}")
        if int(self.n_modes) < 1:
            raise StructuralError("n_modes must be at least 1")
        n2 = 2 * int(self.n_modes)
        ham = require_matrix(self.hamiltonian, "hamiltonian", (n2, n2), dtype=float)
        f = np.asarray(self.f, dtype=complex)
        if f.ndim != 2 or f.shape[1] != n2:
            raise StructuralError(f"F must have {n2} columns for {self.n_modes} modes, got shape {f.shape}")
        gamma = require_square(self.gamma, "Gamma")
        if gamma.shape[0] != f.shape[0]:
            raise StructuralError(
                f"Gamma is {gamma.shape[0]}x{gamma.shape[0]} but F has {f.shape[0]} rows"
            )
        object.__setattr__(self, "n_modes", int(self.n_modes))
        object.__setattr__(self, "hamiltonian", ham)
        object.__setattr__(self, "f", require_matrix(f, "F"))
        object.__setattr__(self, "gamma", gamma)

    @property
    def n_channels(self) -> int:
        return self.f.shape[0]


def validate_model(model: GeneralizedLindbladModel, tol: float = DEFAULT_TOL) -> ValidationReport:
    """Check the decoherence-matrix and Hamiltonian-matrix invariants.

    Tolerances are relative to the largest entry of the matrix under test
    (floored at 1), so a zero matrix validates cleanly.
    """
    gamma = model.gamma
    gamma_scale = max(1.0, max_abs(gamma))
    hermitian_defect = max_abs(gamma - gamma.conj().T)
    if gamma.shape[0] > 0:
        min_eig = float(np.min(np.linalg.eigvalsh(0.5 * (gamma + gamma.conj().T))))
    else:
        min_eig = 0.0

    ham = model.hamiltonian
    ham_scale = max(1.0, max_abs(ham))
    if model.flavor == BOSONIC:
        ham_defect = max_abs(ham - ham.T)
    else:
        ham_defect = max_abs(ham + ham.T)

    is_valid = (
        hermitian_defect <= tol * gamma_scale
        and min_eig >= -tol * gamma_scale
        and ham_defect <= tol * ham_scale
    )
    return ValidationReport(
        hermitian_defect=hermitian_defect,
        min_gamma_eigenvalue=min_eig,
        hamiltonian_symmetry_defect=ham_defect,
        is_valid=is_valid,
    )


def split_non_hermitian(gamma) -> tuple[np.ndarray, np.ndarray]:
    """Split a square matrix into its Hermitian and anti-Hermitian parts.

    The parts sum back to the input (to a rounding unit at worst). Callers
    with a non-Hermitian decoherence matrix can fold the anti-Hermitian part
    into their Hamiltonian themselves; the dynamics builders only accept the
    Hermitian part.
    """
    gamma = require_square(gamma, "Gamma")
    dag = gamma.conj().T
    return 0.5 * (gamma + dag), 0.5 * (gamma - dag)


def to_standard_form(gamma, f, tol: float = DEFAULT_TOL) -> StandardForm:
    """Unitarily diagonalize the decoherence matrix into independent channels.

    With gamma = U diag(rates) U^dag, the returned operator rows are U^T f,
    so that the weighted sum of pair dissipators over (gamma, f) equals the
    sum of ordinary dissipators over the returned (rate, row) list.
    Eigenvalues in [-tol, 0) scaled by the matrix magnitude are clamped to
    zero; anything lower raises.
    """
    gamma = require_square(gamma, "Gamma")
    f = np.asarray(f, dtype=complex)
    if f.ndim != 2 or f.shape[0] != gamma.shape[0]:
        raise StructuralError(
            f"F must have one row per Gamma row ({gamma.shape[0]}), got shape {f.shape}"
        )
    scale = max(1.0, max_abs(gamma))
    defect = max_abs(gamma - gamma.conj().T)
    if defect > tol * scale:
        raise PositivityError(
            f"decoherence matrix is not Hermitian (defect {defect:.3e}); "
            "use split_non_hermitian and fold the anti-Hermitian part into the Hamiltonian"
        )
    evals, vecs = np.linalg.eigh(0.5 * (gamma + gamma.conj().T))
    if np.min(evals) < -tol * scale:
        raise PositivityError(
            f"decoherence matrix has negative eigenvalue {np.min(evals):.3e}"
        )
    rates = np.clip(evals, 0.0, None)
    rows = vecs.T @ f

    order = _standard_form_order(rates, rows)
    return StandardForm(rates=rates[order], operator_rows=rows[order])


def _standard_form_order(rates: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # np.lexsort sorts by the last key first; feed row components in reverse
    # significance so ties in rate fall back to lexicographic row order.
    keys = []
    for col in reversed(range(rows.shape[1])):
        keys.append(rows[:, col].imag)
        keys.append(rows[:, col].real)
    keys.append(-rates)
    return np.lexsort(keys)


def ladder_transform(n_modes: int, flavor: str) -> np.ndarray:
    """Unitary T expressing ladder operators in the canonical basis.

    Row j holds the canonical coefficients of the j-th lowering operator and
    row N+j those of the j-th raising operator, using a = (q + ip)/sqrt(2)
    for bosons and c = (w1 - i w2)/sqrt(2) per mode for fermions.
    """
    if flavor not in FLAVORS:
        raise StructuralError(f"unknown flavor {flavor!r}")
    if n_modes < 1:
        raise StructuralError("n_modes must be at least 1")
    t = np.zeros((2 * n_modes, 2 * n_modes), dtype=complex)
    s = 1.0 / np.sqrt(2.0)
    sign = 1.0 if flavor == BOSONIC else -1.0
    for j in range(n_modes):
        c1, c2 = 2 * j, 2 * j + 1
        t[j, c1] = s
        t[j, c2] = sign * 1j * s
        t[n_modes + j, c1] = s
        t[n_modes + j, c2] = -sign * 1j * s
    return t


def ladder_to_canonical(rows, flavor: str) -> np.ndarray:
    """Convert channel rows from the ladder basis (a1..aN, a1+..aN+) to canonical."""
    rows = np.asarray(rows, dtype=complex)
    if rows.ndim != 2 or rows.shape[1] % 2 != 0 or rows.shape[1] == 0:
        raise StructuralError(f"ladder rows must have a positive even column count, got shape {rows.shape}")
    t = ladder_transform(rows.shape[1] // 2, flavor)
    return rows @ t


def canonical_to_ladder(rows, flavor: str) -> np.ndarray:
    """Inverse of :func:`ladder_to_canonical`."""
    rows = np.asarray(rows, dtype=complex)
    if rows.ndim != 2 or rows.shape[1] % 2 != 0 or rows.shape[1] == 0:
        raise StructuralError(f"canonical rows must have a positive even column count, got shape {rows.shape}")
    t = ladder_transform(rows.shape[1] // 2, flavor)
    return rows @ t.conj().T
