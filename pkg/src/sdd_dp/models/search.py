"""McCall job search with state-dependent discounting.

Accepting an offer at ``z`` is worth ``w(z) K(z)`` where ``K`` is the
resolvent sum of the discount operator, so the employed state never needs
to be represented explicitly.
"""

from dataclasses import dataclass

import numpy as np

from ..discounting import resolvent_sum
from ..dpcore import howard, separable_program, vfi
from ..validation import check_state_function

ACCEPT, REJECT = 0, 1


@dataclass
class SearchParams:
    wages: np.ndarray
    c: float
    chain: object
    beta: np.ndarray


@dataclass
class SearchSolution:
    solution: object
    K: np.ndarray
    accept: np.ndarray
    dp: object

    @property
    def value(self):
        return self.solution.value[0]

    def to_dict(self):
        out = self.solution.to_dict()
        out["K"] = self.K.tolist()
        out["accept"] = self.accept.tolist()
        return out


def build_search(params, spectral_tol=1e-6):
    """Two-action program over ``z`` alone.

    Action 0 accepts (``a = 1``), action 1 rejects (``a = 0``); with the
    smallest-index tie-break an indifferent worker accepts.
    """
    chain = params.chain
    beta = check_state_function(params.beta, chain.n, "beta")
    w = check_state_function(params.wages, chain.n, "wages")
    if np.any(w < 0) or params.c < 0:
        raise ValueError("wages and compensation must be nonnegative")
    probe = separable_program(
        [0.0], chain, [1.0, 0.0], 0, 1, np.zeros((1, chain.n, 2)), beta, next_state=[0, 0], spectral_tol=spectral_tol
    )
    report = probe.certificate
    K = resolvent_sum(probe.discount_operator, report)
    reward = np.empty((1, chain.n, 2))
    reward[0, :, ACCEPT] = w * K
    reward[0, :, REJECT] = params.c
    discount = np.empty((1, chain.n, 2))
    discount[0, :, ACCEPT] = 0.0
    discount[0, :, REJECT] = beta
    dp = separable_program(
        [0.0],
        chain,
        [1.0, 0.0],
        0,
        1,
        reward,
        beta,
        next_state=[0, 0],
        discount=discount,
        spectral_tol=spectral_tol,
        meta={"model": "search", "K": K},
    )
    dp.__dict__["certificate"] = report
    return dp


def solve_search(params, method="howard", tol=1e-10, max_iter=100_000):
    dp = build_search(params)
    if method == "howard":
        sol = howard(dp, tol=tol, max_iter=max_iter)
    elif method == "vfi":
        sol = vfi(dp, tol=tol, max_iter=max_iter)
    else:
        raise ValueError(f"unknown method {method!r}")
    accept = sol.policy[0] == ACCEPT
    return SearchSolution(sol, dp.meta["K"], accept, dp)
