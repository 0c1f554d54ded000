"""Input validation helpers shared by the library and the estimators."""

import numpy as np

from .exceptions import NonFiniteError, ShapeMismatchError, UnsortedInputError

REAL = "real"
COMPLEX = "complex"


def field_of(x):
    """Return ``"complex"`` for complex arrays and ``"real"`` otherwise."""
    return COMPLEX if np.iscomplexobj(x) else REAL


def field_factor(field):
    """Real coordinates per entry: 1 for real data, 2 for complex data."""
    if field not in (REAL, COMPLEX):
        raise ValueError(f"field must be 'real' or 'complex', got {field!r}")
    return 2 if field == COMPLEX else 1


def check_matrix(x, name="x"):
    """Validate a dense 2-D matrix and return it as float64 or complex128.

    Parameters
    ----------
    x : array_like
        Candidate matrix. Integer and boolean inputs are promoted to float64.
    name : str
        Used in error messages.

    Returns
    -------
    ndarray
        A C-contiguous float64 or complex128 copy-or-view of ``x``.

    Raises
    ------
    ShapeMismatchError
        If ``x`` is not two-dimensional or has an empty axis.
    NonFiniteError
        If any component is NaN or Inf.
    """
    arr = np.asarray(x)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeMismatchError(f"{name} must have positive dimensions, got {arr.shape}")
    dtype = np.complex128 if np.iscomplexobj(arr) else np.float64
    arr = np.ascontiguousarray(arr, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError(f"{name} contains NaN or Inf")
    return arr


def check_same_shape(x, delta, names=("x", "delta")):
    if x.shape != delta.shape:
        raise ShapeMismatchError(
            f"{names[0]} has shape {x.shape} but {names[1]} has shape {delta.shape}"
        )


def check_sigma(sigma):
    """Validate a non-increasing, nonnegative vector of singular values."""
    s = np.asarray(sigma, dtype=np.float64).ravel()
    if s.size == 0:
        raise UnsortedInputError("sigma must be non-empty")
    if not np.all(np.isfinite(s)):
        raise NonFiniteError("sigma contains NaN or Inf")
    if np.any(s < 0):
        raise UnsortedInputError("sigma must be nonnegative")
    if np.any(np.diff(s) > 0):
        raise UnsortedInputError("sigma must be non-increasing")
    return s


def check_positive(value, name):
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ValueError(f"{name} must be a nonnegative finite number, got {value}")
    return value
