"""Bosonic covariance dynamics: drift/diffusion, propagation, steady states.

Covariance convention: V[j, k] is the expectation of the anticommutator of
the centered quadratures, so the vacuum covariance is the identity and the
purity of a Gaussian state is 1/sqrt(det V).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from . import lyapunov
from ._util import max_abs, require_matrix, require_square, require_vector, symmetrize
from .errors import DomainError, NumericalError, PositivityError, StabilityError, StructuralError
from .model import (
    BOSONIC,
    DEFAULT_TOL,
    GeneralizedLindbladModel,
    symplectic_form,
    validate_model,
)


@dataclass(frozen=True)
class GaussianState:
    """First and second quadrature moments of a bosonic state."""

    mean: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        v = require_square(self.v, "V", dtype=float)
        if v.shape[0] % 2 != 0 or v.shape[0] == 0:
            raise StructuralError(f"V must be 2N x 2N, got shape {v.shape}")
        mean = require_vector(self.mean, "mean", length=v.shape[0])
        defect = max_abs(v - v.T)
        if defect > 1e-10 * max(1.0, max_abs(v)):
            raise StructuralError(f"V must be symmetric (defect {defect:.3e})")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "v", v)

    @property
    def n_modes(self) -> int:
        return self.v.shape[0] // 2


@dataclass(frozen=True)
class BosonicDriftDiffusion:
    """Drift matrix ``a`` and diffusion matrix ``d`` of the moment dynamics."""

    a: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        a = require_square(self.a, "A", dtype=float)
        d = require_matrix(self.d, "D", shape=a.shape, dtype=float)
        if max_abs(d - d.T) > 1e-12 * max(1.0, max_abs(d)):
            raise StructuralError("D must be symmetric")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "d", d)

    @property
    def n_modes(self) -> int:
        return self.a.shape[0] // 2


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list[GaussianState] = field(repr=False)

    def __post_init__(self):
        times = lyapunov.validate_times(self.times)
        if len(self.states) != times.size:
            raise StructuralError("times and states must have equal length")
        object.__setattr__(self, "times", times)


def build_drift_diffusion(model: GeneralizedLindbladModel,
                          tol: float = DEFAULT_TOL) -> BosonicDriftDiffusion:
    """Assemble (A, D) from a validated bosonic model.

    A = Omega (H + Im(F^dag Gamma^T F)) and D = 2 Omega Re(F^dag Gamma^T F)
    Omega^T, which requires a Hermitian decoherence matrix for the covariance
    to stay real.
    """
    if model.flavor != BOSONIC:
        raise StructuralError(f"expected a bosonic model, got {model.flavor!r}")
    report = validate_model(model, tol)
    gamma_scale = max(1.0, max_abs(model.gamma))
    if report.hermitian_defect > tol * gamma_scale:
        raise PositivityError(
            f"decoherence matrix is not Hermitian (defect {report.hermitian_defect:.3e}); "
            "split it with model.split_non_hermitian and fold the anti-Hermitian "
            "part into the Hamiltonian before building dynamics"
        )
    if report.min_gamma_eigenvalue < -tol * gamma_scale:
        raise PositivityError(
            f"decoherence matrix has negative eigenvalue {report.min_gamma_eigenvalue:.3e}"
        )
    if report.hamiltonian_symmetry_defect > tol * max(1.0, max_abs(model.hamiltonian)):
        raise StructuralError(
            f"bosonic hamiltonian matrix must be symmetric "
            f"(defect {report.hamiltonian_symmetry_defect:.3e})"
        )
    omega = symplectic_form(model.n_modes)
    s = model.f.conj().T @ model.gamma.T @ model.f
    a = omega @ (model.hamiltonian + s.imag)
    d = symmetrize(2.0 * omega @ s.real @ omega.T)
    d_min = float(np.min(np.linalg.eigvalsh(d))) if d.size else 0.0
    if d_min < -1e-10 * max(1.0, max_abs(d)):
        raise PositivityError(f"diffusion matrix has negative eigenvalue {d_min:.3e}")
    return BosonicDriftDiffusion(a=a, d=d)


def evolve_mean(dd: BosonicDriftDiffusion, mean0, t: float) -> np.ndarray:
    """Mean vector at time t under the homogeneous drift flow."""
    mean0 = require_vector(mean0, "mean0", length=dd.a.shape[0])
    return expm(dd.a * t) @ mean0


def propagate_covariance(dd: BosonicDriftDiffusion, v0, times,
                         method: str = "exact",
                         mean0=None,
                         hurwitz_tol: float = lyapunov.DEFAULT_HURWITZ_TOL,
                         residual_tol: float = lyapunov.DEFAULT_RESIDUAL_TOL,
                         ode_tol: float = lyapunov.DEFAULT_ODE_TOL,
                         rk4_substeps: int = 1) -> Trajectory:
    """Propagate the covariance (and optionally the mean) over a time grid.

    The first grid time carries the initial condition. Covariances are
    symmetrized at every step.
    """
    v0 = require_square(v0, "V0", dtype=float)
    times = lyapunov.validate_times(times)
    vs = lyapunov.propagate(dd.a, dd.d, v0, times, symmetrize, method=method,
                            hurwitz_tol=hurwitz_tol, residual_tol=residual_tol,
                            ode_tol=ode_tol, rk4_substeps=rk4_substeps)
    if mean0 is None:
        means = [np.zeros(dd.a.shape[0])] * times.size
    else:
        mean0 = require_vector(mean0, "mean0", length=dd.a.shape[0])
        means = [expm(dd.a * (t - times[0])) @ mean0 for t in times]
    states = [GaussianState(mean=m, v=v) for m, v in zip(means, vs)]
    return Trajectory(times=times, states=states)


def is_hurwitz(dd: BosonicDriftDiffusion,
               tol: float = lyapunov.DEFAULT_HURWITZ_TOL) -> tuple[bool, float]:
    """Whether the drift matrix is stable, plus its spectral abscissa."""
    return lyapunov.is_hurwitz_matrix(dd.a, tol)


def steady_state(dd: BosonicDriftDiffusion,
                 hurwitz_tol: float = lyapunov.DEFAULT_HURWITZ_TOL,
                 residual_tol: float = lyapunov.DEFAULT_RESIDUAL_TOL) -> GaussianState:
    """Unique fixed point of the moment dynamics for a Hurwitz drift."""
    stable, abscissa = is_hurwitz(dd, hurwitz_tol)
    if not stable:
        raise StabilityError(
            f"drift matrix is not Hurwitz (spectral abscissa {abscissa:.3e})",
            spectral_abscissa=abscissa,
        )
    v = symmetrize(lyapunov.solve_fixed_point(dd.a, dd.d, residual_tol))
    return GaussianState(mean=np.zeros(dd.a.shape[0]), v=v)


def check_physicality(v, tol: float = 1e-9) -> tuple[bool, float]:
    """Uncertainty-relation test: V + i Omega must be positive semidefinite."""
    v = require_square(v, "V", dtype=float)
    if v.shape[0] % 2 != 0:
        raise StructuralError("V must be 2N x 2N")
    omega = symplectic_form(v.shape[0] // 2)
    min_eig = float(np.min(np.linalg.eigvalsh(v + 1j * omega)))
    return min_eig >= -tol, min_eig


def purity(v, tol: float = 1e-9) -> float:
    """Gaussian purity 1/sqrt(det V); raises for sub-uncertainty covariances."""
    v = require_square(v, "V", dtype=float)
    det = float(np.linalg.det(symmetrize(v)))
    if det < 1.0 - tol:
        raise DomainError(f"det V = {det:.6e} is below the physical bound 1")
    return 1.0 / np.sqrt(max(det, 1e-300))


def purity_diagnostic(v) -> float:
    """Pure-state defect: how far the squared symplectic spectrum sits from 1.

    Zero exactly for pure states; grows with mixedness. Computed from the
    eigenvalue magnitudes of (Omega V)^2.
    """
    v = require_square(v, "V", dtype=float)
    omega = symplectic_form(v.shape[0] // 2)
    eigs = np.linalg.eigvals(omega @ v @ omega @ v)
    return float(np.max(np.abs(np.abs(eigs) - 1.0)))


def wigner(state: GaussianState, point) -> float:
    """Gaussian phase-space density at a point, normalized to unit integral."""
    point = require_vector(point, "point", length=state.v.shape[0])
    n = state.n_modes
    det = float(np.linalg.det(state.v))
    if det <= 0:
        raise NumericalError(f"covariance determinant {det:.3e} is not positive")
    dx = point - state.mean
    try:
        y = np.linalg.solve(state.v, dx)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("covariance matrix is singular") from exc
    return float(np.exp(-dx @ y) / (np.pi ** n * np.sqrt(det)))
