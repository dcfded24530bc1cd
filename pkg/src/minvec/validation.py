"""Input validation helpers.

Small conversion/check routines used at every public entry point so the
numerical core can assume clean float64 arrays of the right shape.
"""

import numpy as np

from .errors import DegenerateInputError, DimensionMismatchError, InputError


def as_vector(v, dim=None, name="vector"):
    """Coerce to a 1-D float64 array, optionally checking its length."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatchError(f"{name} must be 1-D, got shape {arr.shape}")
    if arr.size == 0:
        raise DimensionMismatchError(f"{name} must be nonempty")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"{name} has length {arr.shape[0]}, expected {dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def as_square_matrix(a, dim=None, name="matrix"):
    """Coerce to a square 2-D float64 array."""
    arr = np.asarray(a, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise DimensionMismatchError(f"{name} must be square, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatchError(
            f"{name} has size {arr.shape[0]}, expected {dim}"
        )
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    return arr


def require_nonzero(v, name="vector"):
    """Raise if ``v`` is exactly the zero vector."""
    if not np.any(v):
        raise DegenerateInputError(f"{name} must be nonzero")
    return v


def require_positive(x, name="value"):
    if not x > 0:
        raise InputError(f"{name} must be positive, got {x}")
    return x
