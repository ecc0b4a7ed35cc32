"""Shared machinery for matrix equations of the form dX/dt = a X + X aT + q.

Both statistics flavors reduce to this differential Lyapunov equation; they
differ only in the symmetry reimposed on the output, which callers supply as
a structure-enforcing callable.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import expm, solve_continuous_lyapunov

from ._util import max_abs
from .errors import NumericalError, StructuralError

_GL_NODES, _GL_WEIGHTS = leggauss(16)

DEFAULT_HURWITZ_TOL = 1e-10
DEFAULT_RESIDUAL_TOL = 1e-10
DEFAULT_ODE_TOL = 1e-9
DEFAULT_PANEL_BUDGET = 256


def spectral_abscissa(a: np.ndarray) -> float:
    """Largest real part over the eigenvalues of ``a``."""
    return float(np.max(np.linalg.eigvals(a).real))


def is_hurwitz_matrix(a: np.ndarray, tol: float = DEFAULT_HURWITZ_TOL) -> tuple[bool, float]:
    abscissa = spectral_abscissa(a)
    return abscissa < -tol, abscissa


def _kron_solve(a: np.ndarray, q: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    ident = np.eye(n)
    coeff = np.kron(a, ident) + np.kron(ident, a)
    return np.linalg.solve(coeff, -q.reshape(-1)).reshape(n, n)


def solve_fixed_point(a: np.ndarray, q: np.ndarray,
                      residual_tol: float = DEFAULT_RESIDUAL_TOL) -> np.ndarray:
    """Solve a X + X aT + q = 0 directly.

    Primary path is the Schur-based dense solver; a Kronecker-product linear
    solve backs it up for small systems. The residual is always checked.
    """
    x = solve_continuous_lyapunov(a, -q)
    residual = max_abs(a @ x + x @ a.T + q)
    if residual > residual_tol and a.shape[0] <= 20:
        x_alt = _kron_solve(a, q)
        residual_alt = max_abs(a @ x_alt + x_alt @ a.T + q)
        if residual_alt < residual:
            x, residual = x_alt, residual_alt
    if residual > residual_tol:
        raise NumericalError(
            f"fixed-point solve residual {residual:.3e} exceeds {residual_tol:.1e}",
            residual=residual,
        )
    return x


def _gauss_legendre_integral(a: np.ndarray, q: np.ndarray, dt: float, panels: int) -> np.ndarray:
    total = np.zeros_like(q)
    h = dt / panels
    for p in range(panels):
        left = p * h
        for node, weight in zip(_GL_NODES, _GL_WEIGHTS):
            s = left + 0.5 * h * (node + 1.0)
            e = expm(a * s)
            total = total + (0.5 * h * weight) * (e @ q @ e.T)
    return total


def integral_term(a: np.ndarray, q: np.ndarray, dt: float,
                  ode_tol: float = DEFAULT_ODE_TOL,
                  panel_budget: int = DEFAULT_PANEL_BUDGET) -> np.ndarray:
    """Evaluate M = integral over [0, dt] of e^{a s} q e^{aT s} ds.

    Adaptive Gauss-Legendre: the panel count doubles until M satisfies the
    defining identity a M + M aT = E q ET - q with E = e^{a dt}, which is the
    ODE-residual acceptance check.
    """
    if dt < 0:
        raise StructuralError("integration interval must be nonnegative")
    if dt == 0:
        return np.zeros_like(q)
    e_full = expm(a * dt)
    target = e_full @ q @ e_full.T - q
    scale = max(1.0, max_abs(q), max_abs(target))
    panels = 1
    residual = np.inf
    while panels <= panel_budget:
        m = _gauss_legendre_integral(a, q, dt, panels)
        residual = max_abs(a @ m + m @ a.T - target)
        if residual <= ode_tol * scale:
            return m
        panels *= 2
    raise NumericalError(
        f"quadrature failed to converge within {panel_budget} panels "
        f"(residual {residual:.3e})",
        residual=residual,
    )


def validate_times(times) -> np.ndarray:
    arr = np.asarray(times, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise StructuralError("times must be a non-empty 1-D array")
    if arr.size > 1 and np.min(np.diff(arr)) <= 0:
        raise StructuralError("times must be strictly increasing")
    return arr


def propagate(a: np.ndarray, q: np.ndarray, x0: np.ndarray, times,
              structure: Callable[[np.ndarray], np.ndarray],
              method: str = "exact",
              hurwitz_tol: float = DEFAULT_HURWITZ_TOL,
              residual_tol: float = DEFAULT_RESIDUAL_TOL,
              ode_tol: float = DEFAULT_ODE_TOL,
              panel_budget: int = DEFAULT_PANEL_BUDGET,
              rk4_substeps: int = 1) -> list[np.ndarray]:
    """Propagate dX/dt = a X + X aT + q through the given time grid.

    The first grid point carries the initial condition. "exact" evaluates the
    closed-form solution: when ``a`` is Hurwitz each time is computed
    independently from the fixed point, otherwise the integral term is
    accumulated stepwise by adaptive quadrature. "rk4" integrates the ODE on
    the grid with ``rk4_substeps`` internal steps per interval. Every output
    passes through ``structure`` to reimpose the exact matrix symmetry.
    """
    times = validate_times(times)
    x0 = structure(np.asarray(x0, dtype=float))
    if method == "exact":
        return _propagate_exact(a, q, x0, times, structure, hurwitz_tol,
                                residual_tol, ode_tol, panel_budget)
    if method == "rk4":
        return _propagate_rk4(a, q, x0, times, structure, rk4_substeps)
    raise StructuralError(f"unknown propagation method {method!r}")


def _propagate_exact(a, q, x0, times, structure, hurwitz_tol, residual_tol,
                     ode_tol, panel_budget) -> list[np.ndarray]:
    hurwitz, _ = is_hurwitz_matrix(a, hurwitz_tol)
    out = [x0]
    if hurwitz:
        x_ss = structure(solve_fixed_point(a, q, residual_tol))
        delta0 = x0 - x_ss
        for t in times[1:]:
            e = expm(a * (t - times[0]))
            out.append(structure(e @ delta0 @ e.T + x_ss))
        return out
    x = x0
    for i in range(1, times.size):
        dt = times[i] - times[i - 1]
        e = expm(a * dt)
        m = integral_term(a, q, dt, ode_tol=ode_tol, panel_budget=panel_budget)
        x = structure(e @ x @ e.T + m)
        out.append(x)
    return out


def _propagate_rk4(a, q, x0, times, structure, substeps) -> list[np.ndarray]:
    if substeps < 1:
        raise StructuralError("rk4_substeps must be at least 1")

    def rhs(x):
        return a @ x + x @ a.T + q

    out = [x0]
    x = x0
    for i in range(1, times.size):
        h = (times[i] - times[i - 1]) / substeps
        for _ in range(substeps):
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * h * k1)
            k3 = rhs(x + 0.5 * h * k2)
            k4 = rhs(x + h * k3)
            x = structure(x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        out.append(x)
    return out
