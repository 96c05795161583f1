"""Input validation helpers shared across the package."""

from __future__ import annotations

import numbers

import numpy as np


class InvalidParameterError(ValueError):
    """Raised when an argument violates a documented precondition."""


class OutOfRangeError(IndexError):
    """Raised for out-of-bounds positions or cluster/level indices."""


def check_positive(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise InvalidParameterError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_nonnegative(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value < 0:
        raise InvalidParameterError(f"{name} must be a non-negative finite number, got {value!r}")
    return float(value)


def check_int(value, name, minimum=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if minimum is not None and value < minimum:
        raise InvalidParameterError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_fraction(value, name="fraction"):
    """Truncation fractions live in the open interval (0, 1)."""
    if not isinstance(value, numbers.Real) or not (0.0 < float(value) < 1.0):
        raise InvalidParameterError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_vector(x, name="x", min_length=1):
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise InvalidParameterError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size < min_length:
        raise InvalidParameterError(f"{name} must have at least {min_length} entries")
    return arr


def check_positions(X, name="X"):
    """Return an (n, 2) float array of planar positions."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidParameterError(f"{name} must have shape (n, 2), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameterError(f"{name} contains non-finite coordinates")
    return arr
