"""Input validation helpers shared across the package."""

import numbers

import numpy as np


def as_float_array(x, name, length=None):
    """Coerce ``x`` to a contiguous 1-D float64 array and check finiteness."""
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {arr.shape[0]}")
    return arr


def check_positive_scalar(value, name):
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_interval_count(n):
    """Number of uniform grid intervals; at least 2."""
    n = int(n)
    if n < 2:
        raise ValueError(f"need at least 2 grid intervals, got {n}")
    return n
