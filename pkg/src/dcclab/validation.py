"""Input validation helpers.

Thin checks shared by the functional API and the estimator classes.  All of
them normalize to float64 ndarrays and raise :class:`ValidationError` with a
message naming the offending argument.
"""

from __future__ import annotations

import numpy as np

from .exceptions import ValidationError

__all__ = [
    "check_vector",
    "check_matrix",
    "check_square",
    "check_positive",
]


def check_vector(x, name: str = "x", min_length: int = 1) -> np.ndarray:
    """Coerce to a finite 1-D float array of length >= ``min_length``."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 2 and arr.shape[1] == 1:
        arr = arr[:, 0]
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_length:
        raise ValidationError(
            f"{name} needs at least {min_length} observations, got {arr.shape[0]}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_matrix(X, name: str = "X", min_rows: int = 1, min_cols: int = 1) -> np.ndarray:
    """Coerce to a finite 2-D float array (rows = observations)."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be two-dimensional, got shape {arr.shape}")
    if arr.shape[0] < min_rows or arr.shape[1] < min_cols:
        raise ValidationError(
            f"{name} must be at least {min_rows}x{min_cols}, got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_square(M, name: str = "M") -> np.ndarray:
    """Coerce to a finite symmetric-shaped (n, n) float array."""
    arr = np.asarray(M, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite entries")
    return arr


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0.0:
        raise ValidationError(f"{name} must be strictly positive, got {value}")
    return value
