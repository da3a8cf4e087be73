"""Epstein-Zin preferences with discount factor shocks.

The program is solved for the transformed value ``vt = v**(1 - gamma)``,
which turns the recursion into

    vt(x, z) = max_a { F^(1-rho) + beta(z) [E vt(a, z')]^(1/theta) }^theta

with ``theta = (1 - gamma) / (1 - rho)``. The relevant discount weights are
``beta**theta``.
"""

from dataclasses import dataclass

import numpy as np

from ..discounting import ez_weights
from ..dpcore import Aggregator, DynamicProgram, howard, vfi
from ..exceptions import NegativeContinuation
from ..validation import check_state_function
from .growth import feasible_upper
from .utility import CONSUMPTION_FLOOR


@dataclass
class EZParams:
    x_grid: np.ndarray
    chain: object
    beta: np.ndarray
    d: np.ndarray
    p: np.ndarray
    rho_pref: float
    gamma: float
    eps: float = CONSUMPTION_FLOOR

    def __post_init__(self):
        # gamma == rho_pref (theta == 1) is admitted as the separable limit
        if not self.rho_pref <= self.gamma < 1:
            raise ValueError("need rho_pref <= gamma < 1")

    @property
    def theta(self):
        return (1.0 - self.gamma) / (1.0 - self.rho_pref)


class EZAggregator(Aggregator):
    domain = "positive"

    def __init__(self, consumption, beta, Q, rho_pref, theta, eps):
        self.consumption = consumption
        self.flow = np.maximum(consumption, eps) ** (1.0 - rho_pref)
        self.beta = beta
        self.Q = Q
        self.theta = theta

    def _combine(self, flow, beta, E):
        if np.any(E < 0):
            raise NegativeContinuation("expected transformed continuation value is negative")
        return (flow + beta * E ** (1.0 / self.theta)) ** self.theta

    def __call__(self, i_x, i_z, i_a, cont):
        return float(self._combine(self.flow[i_x, i_z, i_a], self.beta[i_z], self.Q[i_z] @ cont))

    def table(self, dp, v):
        E = self.Q @ v[dp.next_state].T
        return self._combine(self.flow, self.beta[None, :, None], E[None, :, :])


def ez_consumption(params):
    x = np.asarray(params.x_grid, dtype=float)
    n = params.chain.n
    d = check_state_function(params.d, n, "d")
    p = check_state_function(params.p, n, "p")
    return x[:, None, None] * (d + p)[None, :, None] - p[None, :, None] * x[None, None, :]


def build_ez(params, spectral_tol=1e-6):
    """Non-separable program on asset holdings in ``[0, 1]``.

    Feasible next-period holdings satisfy ``0 <= a <= min(1, (d + p) x / p)``.
    The certificate is for ``L_theta`` with weights ``beta**theta``.
    """
    x = np.asarray(params.x_grid, dtype=float)
    n = params.chain.n
    beta = check_state_function(params.beta, n, "beta")
    d = check_state_function(params.d, n, "d")
    p = check_state_function(params.p, n, "p")
    if np.any(d <= 0) or np.any(p <= 0):
        raise ValueError("d and p must be positive")
    if x[0] < 0 or x[-1] > 1 or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must be strictly increasing within [0, 1]")
    upper = np.minimum(1.0, x[:, None] * (d + p)[None, :] / p[None, :])
    hi = feasible_upper(x, upper)
    if np.any(hi < 0):
        raise ValueError("x_grid must contain a feasible holding for every state")
    F = ez_consumption(params)
    agg = EZAggregator(F, beta, params.chain.transition, params.rho_pref, params.theta, params.eps)
    dp = DynamicProgram(
        x,
        params.chain,
        x,
        0,
        hi,
        agg,
        ez_weights(beta, params.theta),
        spectral_tol=spectral_tol,
        meta={"model": "ez", "theta": params.theta},
    )
    dp.certificate
    return dp


def ez_initial_value(params, dp):
    """Strictly positive start ``(eps + F(x, z, lowest feasible a))**(1 - gamma)``."""
    F = dp.aggregator.consumption
    F_low = np.take_along_axis(F, dp.lo[..., None], axis=2)[..., 0]
    return (params.eps + np.maximum(F_low, 0.0)) ** (1.0 - params.gamma)


@dataclass
class EZSolution:
    solution: object  # in transformed units
    value: np.ndarray  # v = vt**(1 / (1 - gamma))
    dp: object

    def to_dict(self):
        out = self.solution.to_dict()
        out["transformed_value"] = out.pop("value")
        out["value"] = self.value.tolist()
        return out


def solve_ez(params, method="vfi", tol=1e-10, max_iter=100_000):
    dp = build_ez(params)
    v0 = ez_initial_value(params, dp)
    if method == "vfi":
        sol = vfi(dp, v0=v0, tol=tol, max_iter=max_iter)
    elif method == "howard":
        sol = howard(dp, tol=tol, max_iter=max_iter, eval_kw={"v0": v0, "tol": tol * 1e-2})
    else:
        raise ValueError(f"unknown method {method!r}")
    return EZSolution(sol, sol.value ** (1.0 / (1.0 - params.gamma)), dp)
