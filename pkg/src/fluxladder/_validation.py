"""Small argument-checking helpers."""

import numbers

import numpy as np

from .errors import InvalidArgumentError


def check_int(value, name, low=None, high=None):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if low is not None and value < low:
        raise InvalidArgumentError(f"{name} must be >= {low}, got {value}")
    if high is not None and value > high:
        raise InvalidArgumentError(f"{name} must be <= {high}, got {value}")
    return value


def check_finite(value, name):
    arr = np.asarray(value, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    return arr if arr.ndim else float(arr)


def check_array(value, name, shape, dtype=float):
    arr = np.array(value, dtype=dtype)
    if arr.shape != tuple(shape):
        raise InvalidArgumentError(f"{name} must have shape {tuple(shape)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    return arr


def check_boundary(boundary):
    if boundary not in ("open", "periodic"):
        raise InvalidArgumentError(f"boundary must be 'open' or 'periodic', got {boundary!r}")
    return boundary


def leg_index(leg):
    if leg in ("A", 0):
        return 0
    if leg in ("B", 1):
        return 1
    raise InvalidArgumentError(f"leg must be 'A' or 'B', got {leg!r}")


def check_hermitian(matrix, name="matrix", tol=1e-12):
    m = np.asarray(matrix)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InvalidArgumentError(f"{name} must be square")
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if m.size and np.max(np.abs(m - m.conj().T)) > tol * scale:
        raise InvalidArgumentError(f"{name} is not Hermitian")
    return m
