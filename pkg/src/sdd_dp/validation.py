"""Input validation helpers, in the spirit of ``sklearn.utils.validation``."""

import numbers

import numpy as np

from .exceptions import LengthMismatch, NegativeWeight


def as_float_array(x, *, ndim=None, name="array", readonly=False):
    arr = np.array(x, dtype=float, copy=True)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if readonly:
        arr.setflags(write=False)
    return arr


def check_weights(weights, n, name="weights"):
    """Return ``weights`` as a read-only float vector of length ``n``, all >= 0."""
    w = as_float_array(weights, ndim=1, name=name)
    if w.shape[0] != n:
        raise LengthMismatch(f"{name} has length {w.shape[0]}, expected {n}")
    neg = np.flatnonzero(w < 0)
    if neg.size:
        raise NegativeWeight(int(neg[0]), float(w[neg[0]]))
    w.setflags(write=False)
    return w


def check_scalar(x, name, *, lo=None, hi=None, lo_open=False, hi_open=False, kind=numbers.Real):
    if not isinstance(x, kind) or isinstance(x, bool):
        raise TypeError(f"{name} must be {kind.__name__}, got {type(x).__name__}")
    if lo is not None and (x < lo or (lo_open and x == lo)):
        raise ValueError(f"{name}={x!r} below allowed range")
    if hi is not None and (x > hi or (hi_open and x == hi)):
        raise ValueError(f"{name}={x!r} above allowed range")
    return x


def check_state_function(values, n, name):
    """Broadcast a scalar or length-``n`` sequence to a float vector."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    if arr.shape != (n,):
        raise LengthMismatch(f"{name} has shape {arr.shape}, expected ({n},)")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def make_grid(spec):
    """Build a 1-d grid from a list or a ``{"start", "stop", "num"}`` mapping."""
    if isinstance(spec, dict):
        return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"]))
    return as_float_array(spec, ndim=1, name="grid")
