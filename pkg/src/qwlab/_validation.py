"""Input validation helpers shared by the functional API and the estimators."""

import math

import numpy as np


class InvalidArgumentError(ValueError):
    """Raised when an argument falls outside the domain of an operation."""


class DegenerateFormError(ArithmeticError):
    """Raised when the rational form of Gamma(k) has a pole on the real k axis."""


def check_finite(value, name):
    value = float(value)
    if not math.isfinite(value):
        raise InvalidArgumentError(f"{name} must be finite, got {value!r}")
    return value


def check_epsilon(epsilon):
    """Noise half-width must lie in (0, pi]."""
    epsilon = check_finite(epsilon, "epsilon")
    # a tiny slack so that float(np.pi) passed through text round-trips is accepted
    if not 0.0 < epsilon <= math.pi * (1 + 1e-15):
        raise InvalidArgumentError(f"epsilon must lie in (0, pi], got {epsilon!r}")
    return min(epsilon, math.pi)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or int(value) != value:
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    value = int(value)
    if value < minimum:
        raise InvalidArgumentError(f"{name} must be >= {minimum}, got {value}")
    return value


def check_spinor(spinor):
    """Return a normalized complex 2-vector.

    Accepts two complex numbers or four reals ``(re_up, im_up, re_down, im_down)``.
    """
    arr = np.asarray(spinor)
    if arr.shape == (4,) and not np.iscomplexobj(arr):
        arr = np.array([arr[0] + 1j * arr[1], arr[2] + 1j * arr[3]])
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.shape != (2,):
        raise InvalidArgumentError(f"spinor must have 2 complex or 4 real entries, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("spinor entries must be finite")
    norm = np.linalg.norm(arr)
    if norm == 0.0:
        raise InvalidArgumentError("spinor must be nonzero")
    return arr / norm
