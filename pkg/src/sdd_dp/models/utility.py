"""One-period utility functions with a consumption floor."""

import numpy as np

CONSUMPTION_FLOOR = 1e-10


def crra(gamma, eps=CONSUMPTION_FLOOR):
    """``c**(1 - gamma) / (1 - gamma)``, or ``log c`` when ``gamma == 1``.

    Consumption is floored at ``eps`` so that ``u(0)`` stays finite.
    """
    if gamma == 1:
        return lambda c: np.log(np.maximum(c, eps))
    return lambda c: np.maximum(c, eps) ** (1.0 - gamma) / (1.0 - gamma)


def log_utility(eps=CONSUMPTION_FLOOR):
    return crra(1.0, eps)


def linear():
    return lambda c: np.asarray(c, dtype=float)


def from_dict(d):
    """``{"kind": "log" | "crra" | "linear", "gamma": ..., "eps": ...}``."""
    kind = d.get("kind", "log")
    eps = d.get("eps", CONSUMPTION_FLOOR)
    if kind == "log":
        return log_utility(eps)
    if kind == "crra":
        return crra(float(d["gamma"]), eps)
    if kind == "linear":
        return linear()
    raise ValueError(f"unknown utility kind {kind!r}")
