"""Entanglement measures on two-mode covariance data.

Bosonic measures take the symmetric quadrature covariance (vacuum = identity)
in the interleaved ordering (q1, p1, q2, p2); fermionic measures take the
antisymmetric Majorana covariance over (w1, w2, w3, w4) with modes grouped in
consecutive pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fermionic
from ._util import max_abs, require_square
from .errors import NumericalError, StructuralError
from .bosonic import GaussianState


@dataclass(frozen=True)
class DuanResult:
    """Total collective variance against the separability bound alpha^2 + beta^2."""

    quantity: float
    bound: float
    entangled_flag: bool


@dataclass(frozen=True)
class NegativityResult:
    """Logarithmic negativity in nats plus the auxiliary spectrum behind it."""

    value: float
    auxiliary_spectrum: np.ndarray


def duan_bosonic(state, alpha: float = 1.0, beta: float = -1.0) -> DuanResult:
    """Collective-quadrature variance test for two bosonic modes.

    Computes Var(alpha q1 + beta q2) + Var(alpha p1 - beta p2) from the
    covariance matrix; the state is inseparable when the total variance drops
    strictly below alpha^2 + beta^2. The default (1, -1) pairing detects
    two-mode squeezing.
    """
    v = state.v if isinstance(state, GaussianState) else require_square(state, "V", dtype=float)
    if v.shape[0] != 4:
        raise StructuralError(f"Duan criterion needs exactly two modes, got shape {v.shape}")
    # Var(x_j) = V[j, j] / 2 and Cov(x_j, x_k) = V[j, k] / 2 in this convention.
    var_u = 0.5 * (alpha ** 2 * v[0, 0] + beta ** 2 * v[2, 2] + 2.0 * alpha * beta * v[0, 2])
    var_v = 0.5 * (alpha ** 2 * v[1, 1] + beta ** 2 * v[3, 3] - 2.0 * alpha * beta * v[1, 3])
    quantity = float(var_u + var_v)
    bound = float(alpha ** 2 + beta ** 2)
    return DuanResult(quantity=quantity, bound=bound, entangled_flag=quantity < bound)


def log_negativity_bosonic(v, strict_paper: bool = False, tol: float = 1e-9) -> NegativityResult:
    """Logarithmic negativity of a two-mode Gaussian state.

    The auxiliary quantity eta is the smaller symplectic eigenvalue of the
    partially transposed covariance, computed from the block determinants.
    In this covariance convention (vacuum = identity) the measure is
    max(0, -ln eta); ``strict_paper`` switches to the max(0, -ln 2 eta)
    variant, which differs by ln 2 and is kept only for comparison.
    """
    v = require_square(v, "V", dtype=float)
    if v.shape[0] != 4:
        raise StructuralError(f"log negativity needs exactly two modes, got shape {v.shape}")
    v1 = v[:2, :2]
    v2 = v[2:, 2:]
    v12 = v[:2, 2:]
    sig = float(np.linalg.det(v2) + np.linalg.det(v1) - 2.0 * np.linalg.det(v12))
    det_v = float(np.linalg.det(v))
    disc = sig ** 2 - 4.0 * det_v
    scale = max(1.0, sig ** 2, abs(det_v))
    if disc < -tol * scale:
        raise NumericalError(f"invalid covariance: discriminant {disc:.3e} is negative")
    eta_sq = 0.5 * (sig - np.sqrt(max(disc, 0.0)))
    if eta_sq < -tol * scale:
        raise NumericalError(f"invalid covariance: eta^2 = {eta_sq:.3e} is negative")
    eta = float(np.sqrt(max(eta_sq, 0.0)))
    if eta <= 0.0:
        raise NumericalError("eta vanished; covariance is singular or unphysical")
    value = -np.log(2.0 * eta) if strict_paper else -np.log(eta)
    return NegativityResult(value=float(max(0.0, value)), auxiliary_spectrum=np.array([eta]))


def sigma_cross(sigma, clamp_eps: float = 1e-8) -> np.ndarray:
    """Spectrum of the composite covariance behind the fermionic negativity.

    Builds ((1 - sigma^2) / 2)^{-1} blockdiag(sigma_1, -sigma_2) for a
    two-mode covariance split into mode blocks, and returns its eigenvalues,
    which come in +-(i lambda_cross) pairs. Mode magnitudes above 1 - eps are
    clamped to 1 - eps inside the inverted factor so pure inputs stay finite.
    """
    sigma = fermionic._as_antisymmetric(sigma)
    if sigma.shape[0] != 4:
        raise StructuralError(f"sigma_cross needs exactly two modes, got shape {sigma.shape}")
    q, pairs, _singles = fermionic.schur_blocks(sigma)
    clamped_pairs = []
    for idx, lam in pairs:
        mag = min(abs(lam), 1.0 - clamp_eps)
        clamped_pairs.append((idx, np.sign(lam) * mag if lam != 0 else 0.0))
    sigma_c = fermionic._rebuild_from_blocks(q, clamped_pairs, 4)

    factor = 0.5 * (np.eye(4) - sigma_c @ sigma_c)
    local = np.zeros((4, 4))
    local[:2, :2] = sigma_c[:2, :2]
    local[2:, 2:] = -sigma_c[2:, 2:]
    try:
        m = np.linalg.solve(factor, local)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("composite covariance factor is singular") from exc
    eigs = np.linalg.eigvals(m)
    return eigs[np.argsort(eigs.imag)]


def log_negativity_fermionic(sigma, tol: float = 1e-9) -> NegativityResult:
    """Logarithmic negativity of a two-mode fermionic Gaussian state.

    Combines a Renyi-1/2 entropy of the composite spectrum with the Renyi-2
    entropy of the state itself, both evaluated as closed products over the
    paired eigenvalue magnitudes.
    """
    sigma = fermionic._as_antisymmetric(sigma)
    if sigma.shape[0] != 4:
        raise StructuralError(f"log negativity needs exactly two modes, got shape {sigma.shape}")
    lams = fermionic.mode_spectrum(sigma)
    tr_rho_sq = float(np.prod((1.0 + lams ** 2) / 2.0))
    s2 = -np.log(tr_rho_sq)

    cross = sigma_cross(sigma)
    cross_lams = _paired_magnitudes(cross, tol)
    if np.any(cross_lams > 1.0 + tol):
        raise NumericalError(
            f"composite spectrum magnitude {np.max(cross_lams):.6e} exceeds 1"
        )
    cross_lams = np.clip(cross_lams, 0.0, 1.0)
    tr_half = float(np.prod(np.sqrt((1.0 + cross_lams) / 2.0) + np.sqrt((1.0 - cross_lams) / 2.0)))
    s_half = 2.0 * np.log(tr_half)

    value = 0.5 * (s_half - s2)
    return NegativityResult(value=float(max(0.0, value)), auxiliary_spectrum=cross_lams)


def duan_fermionic(sigma, alpha: float = 1.0, beta: float = 1.0) -> DuanResult:
    """Collective-Majorana variance test for two fermionic modes.

    Var(alpha w1 + beta w3) + Var(alpha w2 - beta w4) computed from second
    moments: squares contribute one half each and symmetrized cross moments
    vanish by the anticommutation relation, so for every parity-even state
    the quantity equals alpha^2 + beta^2 exactly and the strict inequality
    never fires at this normalization.
    """
    sigma = fermionic._as_antisymmetric(sigma)
    if sigma.shape[0] != 4:
        raise StructuralError(f"Duan criterion needs exactly two modes, got shape {sigma.shape}")
    moments = 0.5 * np.eye(4)  # symmetrized Majorana second moments, state independent
    var_u = alpha ** 2 * moments[0, 0] + beta ** 2 * moments[2, 2] + 2.0 * alpha * beta * moments[0, 2]
    var_v = alpha ** 2 * moments[1, 1] + beta ** 2 * moments[3, 3] - 2.0 * alpha * beta * moments[1, 3]
    quantity = float(var_u + var_v)
    bound = float(alpha ** 2 + beta ** 2)
    return DuanResult(quantity=quantity, bound=bound, entangled_flag=quantity < bound)


def _paired_magnitudes(eigs: np.ndarray, tol: float) -> np.ndarray:
    if max_abs(eigs.real) > 1e-7 * max(1.0, max_abs(eigs)):
        raise NumericalError("composite spectrum is not purely imaginary")
    lams = np.sort(np.abs(eigs.imag))[::-1]
    paired = []
    for i in range(0, lams.size, 2):
        if abs(lams[i] - lams[i + 1]) > max(tol, 1e-7 * max(1.0, lams[i])):
            raise NumericalError(
                f"composite eigenvalues failed to pair: {lams[i]:.6e} vs {lams[i + 1]:.6e}"
            )
        paired.append(0.5 * (lams[i] + lams[i + 1]))
    return np.asarray(paired)
