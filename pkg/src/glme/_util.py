"""Small shared numerical helpers."""

from __future__ import annotations

import numpy as np

from .errors import StructuralError


def max_abs(m) -> float:
    """Largest absolute entry; 0.0 for empty input."""
    arr = np.asarray(m)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def antisymmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m - m.T)


def require_finite(m: np.ndarray, name: str) -> np.ndarray:
    if m.size and not np.all(np.isfinite(m)):
        raise StructuralError(f"{name} contains non-finite entries")
    return m


def require_square(m, name: str, dtype=complex) -> np.ndarray:
    arr = np.asarray(m, dtype=dtype)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise StructuralError(f"{name} must be square, got shape {arr.shape}")
    return require_finite(arr, name)


def require_matrix(m, name: str, shape: tuple[int, int] | None = None, dtype=complex) -> np.ndarray:
    arr = np.asarray(m, dtype=dtype)
    if arr.ndim != 2:
        raise StructuralError(f"{name} must be a matrix, got ndim {arr.ndim}")
    if shape is not None and arr.shape != shape:
        raise StructuralError(f"{name} must have shape {shape}, got {arr.shape}")
    return require_finite(arr, name)


def require_vector(v, name: str, length: int | None = None, dtype=float) -> np.ndarray:
    arr = np.asarray(v, dtype=dtype)
    if arr.ndim != 1:
        raise StructuralError(f"{name} must be a vector, got ndim {arr.ndim}")
    if length is not None and arr.shape[0] != length:
        raise StructuralError(f"{name} must have length {length}, got {arr.shape[0]}")
    return require_finite(arr, name)
