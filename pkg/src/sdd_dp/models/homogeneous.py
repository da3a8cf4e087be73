"""Homogeneous CRRA saving problem, solved through its scalar profile.

With ``u(c) = c**(1 - gamma) / (1 - gamma)``, ``gamma in (0, 1)`` and wealth
dynamics ``x' = R(z) (x - c)``, the value function factors as
``v(x, z) = x**(1 - gamma) * w(z)``. Writing ``s`` for the savings rate,

    w(z) = max_s (1 - s)**(1-gamma) / (1-gamma)
                 + beta(z) R(z)**(1-gamma) s**(1-gamma) sum_z' Q(z, z') w(z').

This is a separable program in ``z`` alone with an action-dependent discount
``beta R**(1-gamma) s**(1-gamma)`` bounded by the weights of ``L_R``.
"""

from dataclasses import dataclass

import numpy as np

from ..discounting import return_weights
from ..dpcore import howard, separable_program, vfi
from ..validation import check_state_function
from .growth import feasible_upper
from .utility import crra


@dataclass
class HomogeneousParams:
    gamma: float
    R: np.ndarray
    beta: np.ndarray
    chain: object
    s_grid: np.ndarray

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")


@dataclass
class HomogeneousSolution:
    w: np.ndarray
    s: np.ndarray
    solution: object
    dp: object

    def value(self, x):
        """``v(x, z) = x**(1 - gamma) w(z)`` on a wealth grid, shape ``(len(x), n_z)``."""
        g = self.dp.meta["gamma"]
        return np.asarray(x, dtype=float)[:, None] ** (1.0 - g) * self.w[None, :]

    def to_dict(self):
        out = self.solution.to_dict()
        out["w"] = self.w.tolist()
        out["savings_rate"] = self.s.tolist()
        return out


def build_homogeneous_profile(params, spectral_tol=1e-6):
    n = params.chain.n
    s = np.asarray(params.s_grid, dtype=float)
    if s[0] < 0 or s[-1] > 1 or np.any(np.diff(s) <= 0):
        raise ValueError("s_grid must be strictly increasing within [0, 1]")
    g = params.gamma
    R = check_state_function(params.R, n, "R")
    beta = check_state_function(params.beta, n, "beta")
    if np.any(R <= 0):
        raise ValueError("R must be positive")
    weights = return_weights(beta, R, g)
    reward = np.broadcast_to(((1.0 - s) ** (1.0 - g) / (1.0 - g))[None, None, :], (1, n, s.size))
    discount = weights[None, :, None] * (s ** (1.0 - g))[None, None, :]
    dp = separable_program(
        [1.0],
        params.chain,
        s,
        0,
        s.size - 1,
        reward,
        weights,
        next_state=np.zeros(s.size, dtype=int),
        discount=discount,
        spectral_tol=spectral_tol,
        meta={"model": "homogeneous", "gamma": g},
    )
    dp.certificate
    return dp


def solve_homogeneous(params, method="howard", tol=1e-12, max_iter=100_000):
    """Profile ``w(z)`` and savings rate ``s(z)``; refuses unless ``r(L_R) < 1``."""
    dp = build_homogeneous_profile(params)
    if method == "howard":
        sol = howard(dp, tol=tol, max_iter=max_iter)
    elif method == "vfi":
        sol = vfi(dp, tol=tol, max_iter=max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    return HomogeneousSolution(sol.value[0], dp.a_grid[sol.policy[0]], sol, dp)


def homogeneous_grid_program(params, x_grid, spectral_tol=1e-6):
    """The same problem on an explicit wealth grid, for cross-validation.

    Next-period wealth is chosen on ``x_grid`` with ``0 <= x' <= R(z) x``
    (clipped to the grid) and consumption ``x - x' / R(z)``.
    """
    x = np.asarray(x_grid, dtype=float)
    n = params.chain.n
    R = check_state_function(params.R, n, "R")
    beta = check_state_function(params.beta, n, "beta")
    if x[0] != 0 or np.any(np.diff(x) <= 0):
        raise ValueError("x_grid must start at 0 and be strictly increasing")
    hi = feasible_upper(x, x[:, None] * R[None, :])
    c = x[:, None, None] - x[None, None, :] / R[None, :, None]
    mask = np.arange(x.size)[None, None, :] <= hi[..., None]
    u = crra(params.gamma, eps=0.0)
    reward = np.where(mask, u(np.where(mask, np.maximum(c, 0.0), 1.0)), -np.inf)
    dp = separable_program(
        x, params.chain, x, 0, hi, reward, beta, spectral_tol=spectral_tol, meta={"model": "homogeneous-grid"}
    )
    dp.certificate
    return dp


@dataclass
class GridCrossCheck:
    policy_steps: np.ndarray  # |x'_grid - R s x| in units of the local x' spacing
    homogeneity_error: np.ndarray  # |v(q^k x) - q^(k(1-gamma)) v(x)|
    value_rel_error: np.ndarray
    rows: np.ndarray  # grid indices compared


def grid_cross_check(hsol, params, x_grid, grid_solution, skip=0, shift=1):
    """Compare the profile solution with a solution on a geometric wealth grid.

    ``x_grid`` must be ``{0} U {q**i}``. Rows ``skip + 1`` onwards are
    compared, which lets the caller step over the boundary layer created by
    truncating the grid at its low end. The homogeneity identity is checked
    with ``lambda = q**shift``.
    """
    x = np.asarray(x_grid, dtype=float)
    R = check_state_function(params.R, params.chain.n, "R")
    g = params.gamma
    q = x[2] / x[1]
    rows = np.arange(1 + skip, x.size)
    j = grid_solution.policy[rows]
    spacing = np.diff(x)
    step = spacing[np.minimum(j, spacing.size - 1)]
    target = R[None, :] * hsol.s[None, :] * x[rows, None]
    policy_steps = np.abs(x[j] - target) / step
    v = grid_solution.value
    hom_rows = rows[rows + shift < x.size]
    hom = np.abs(v[hom_rows + shift] - q ** (shift * (1.0 - g)) * v[hom_rows])
    rel = np.abs(v[rows] / hsol.value(x[rows]) - 1.0)
    return GridCrossCheck(policy_steps, hom, rel, rows)
