"""Household saving problem with exogenous interest rate, price level and transfers."""

from dataclasses import dataclass, field

import numpy as np

from ..dpcore import separable_program
from ..exceptions import EmptyFeasible
from ..validation import check_state_function
from .growth import feasible_upper
from .utility import log_utility


@dataclass
class TaxParams:
    b_grid: np.ndarray
    chain: object
    beta: np.ndarray
    R: np.ndarray
    P: np.ndarray
    T: np.ndarray
    utility: object = field(default_factory=log_utility)


def build_tax(params, spectral_tol=1e-6):
    """Separable program with next-period assets chosen on ``b_grid``.

    Consumption is ``F(x, z, a) = x / P + T - a / (R P)`` and the choice set is
    ``0 <= a <= x R + T R P``, clipped to the grid.
    """
    b = np.asarray(params.b_grid, dtype=float)
    n = params.chain.n
    beta = check_state_function(params.beta, n, "beta")
    R = check_state_function(params.R, n, "R")
    P = check_state_function(params.P, n, "P")
    T = check_state_function(params.T, n, "T")
    if np.any(R <= 0) or np.any(P <= 0):
        raise ValueError("R and P must be bounded away from zero")
    if b[0] < 0 or np.any(np.diff(b) <= 0):
        raise ValueError("b_grid must be nonnegative and strictly increasing")
    upper = b[:, None] * R[None, :] + (T * R * P)[None, :]
    hi = feasible_upper(b, upper)
    if np.any(hi < 0) or b[0] > 0:
        bad = np.argwhere(hi < 0)
        i_x, i_z = bad[0] if len(bad) else (0, 0)
        raise EmptyFeasible(int(i_x), int(i_z))
    F = b[:, None, None] / P[None, :, None] + T[None, :, None] - b[None, None, :] / (R * P)[None, :, None]
    mask = np.arange(b.size)[None, None, :] <= hi[..., None]
    F = np.where(mask, np.maximum(F, 0.0), 1.0)
    with np.errstate(all="ignore"):
        reward = np.where(mask, params.utility(F), -np.inf)
    dp = separable_program(b, params.chain, b, 0, hi, reward, beta, spectral_tol=spectral_tol, meta={"model": "tax"})
    dp.certificate
    return dp
