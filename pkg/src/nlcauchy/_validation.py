"""Input validation helpers.

scikit-learn's ``check_array`` rejects complex input, so state coordinates
are validated here instead.
"""
import numbers

import numpy as np


def check_positive(value, name, integer=False, strict=True):
    if integer:
        if not isinstance(value, numbers.Integral) or isinstance(value, bool):
            raise TypeError(f"{name} must be an integer, got {type(value).__name__}")
    elif not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise TypeError(f"{name} must be a real number, got {type(value).__name__}")
    if (strict and not value > 0) or (not strict and not value >= 0):
        raise ValueError(f"{name} must be {'positive' if strict else 'non-negative'}, got {value!r}")
    return value


def check_times(ts):
    """1-D float array of times in [-1, 1]."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    if ts.ndim != 1:
        raise ValueError(f"times must be 1-D, got shape {ts.shape}")
    if not np.all(np.isfinite(ts)) or np.any(np.abs(ts) > 1):
        raise ValueError("times must be finite and lie in [-1, 1]")
    return ts


def check_states(X, dim=None):
    """2-D complex array of shape ``(n_states, dim)``; 1-D input is one state."""
    X = np.asarray(X)
    if X.dtype == object:
        raise TypeError("state coordinates must be numeric")
    X = np.atleast_2d(X.astype(np.complex128, copy=False))
    if X.ndim != 2:
        raise ValueError(f"expected 1-D or 2-D coordinates, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("state coordinates contain NaN or Inf")
    if dim is not None and X.shape[1] != dim:
        raise ValueError(f"expected {dim} coordinates per state, got {X.shape[1]}")
    return X
