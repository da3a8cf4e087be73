"""One-sector stochastic optimal growth with state-dependent discounting."""

from dataclasses import dataclass, field

import numpy as np

from ..dpcore import separable_program
from ..exceptions import EmptyFeasible
from ..validation import check_state_function
from .utility import log_utility

GRID_SLACK = 1e-12


def cobb_douglas(alpha):
    """``f(k, z) = z * k**alpha``."""
    return lambda k, z: z * np.power(k, alpha)


@dataclass
class GrowthParams:
    """Primitives of the growth model.

    ``production(k, z)`` and ``utility(c)`` must accept numpy arrays; ``z``
    is the exogenous state *value* (``chain.states``), and ``beta`` gives the
    discount factor at each exogenous state.
    """

    k_grid: np.ndarray
    chain: object
    beta: np.ndarray
    production: object = field(default_factory=lambda: cobb_douglas(0.36))
    utility: object = field(default_factory=log_utility)


def feasible_upper(grid, bound):
    """Index of the last grid point ``<= bound`` (-1 if none)."""
    return np.searchsorted(grid, bound * (1 + GRID_SLACK) + GRID_SLACK, side="right") - 1


def build_growth(params, spectral_tol=1e-6):
    """Separable program with next-period capital chosen on ``k_grid``.

    ``H(k, z, k') = u(f(k, z) - k') + beta(z) E v(k', z')`` over
    ``0 <= k' <= f(k, z)``.
    """
    k = np.asarray(params.k_grid, dtype=float)
    chain = params.chain
    beta = check_state_function(params.beta, chain.n, "beta")
    if np.any(np.diff(k) <= 0):
        raise ValueError("k_grid must be strictly increasing")
    if k[0] < 0:
        raise ValueError("k_grid must be nonnegative")
    y = params.production(k[:, None], chain.states[None, :])
    if np.any(y < 0):
        raise ValueError("production must be nonnegative")
    hi = feasible_upper(k, y)
    if np.any(hi < 0):
        i_x, i_z = np.argwhere(hi < 0)[0]
        raise EmptyFeasible(int(i_x), int(i_z))
    c = y[:, :, None] - k[None, None, :]
    mask = np.arange(k.size)[None, None, :] <= hi[..., None]
    with np.errstate(all="ignore"):
        reward = np.where(mask, params.utility(np.where(mask, c, 1.0)), -np.inf)
    dp = separable_program(k, chain, k, 0, hi, reward, beta, spectral_tol=spectral_tol, meta={"model": "growth"})
    dp.certificate
    return dp


def log_growth_closed_form(k, alpha, beta):
    """Value function of the deterministic log / Cobb-Douglas model with ``z = 1``.

    ``v(k) = A + B log k`` with ``B = alpha / (1 - alpha beta)``; the optimal
    policy is ``k' = alpha beta k**alpha``.
    """
    ab = alpha * beta
    B = alpha / (1.0 - ab)
    A = (np.log(1.0 - ab) + ab / (1.0 - ab) * np.log(ab)) / (1.0 - beta)
    return A + B * np.log(k)
