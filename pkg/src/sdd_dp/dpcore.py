"""Dynamic programs on finite grids with state-dependent discounting.

A program has an endogenous grid ``x_grid`` (index ``i_x``), an exogenous
Markov chain (index ``i_z``) and an action grid (index ``i_a``). Each action
selects a next-period endogenous index through ``next_state``; when actions
*are* next-period states this is the identity. Value and policy arrays have
shape ``(n_x, n_z)``.

Feasible sets are contiguous action ranges ``lo[i_x, i_z] .. hi[i_x, i_z]``
(inclusive). The continuation aggregator ``H(i_x, i_z, i_a, cont)`` receives
``cont = v[next_state[i_a], :]``, the continuation value over next-period
exogenous states.
"""

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .discounting import build_discount_operator, require_certificate
from .exceptions import (
    InfeasiblePolicy,
    MaxIterExceeded,
    NonFiniteAggregator,
    NotSeparable,
    SingularSystem,
    TooManyPolicies,
)
from .validation import check_weights

logger = logging.getLogger(__name__)

DENSE_LIMIT = 2000


class Aggregator:
    """Continuation aggregator ``H``.

    Subclasses implement ``__call__`` for a single cell. ``table`` evaluates
    every ``(i_x, i_z, i_a)`` at once and defaults to a loop over cells;
    override it when a vectorised form exists. ``domain`` is ``"real"`` or
    ``"positive"`` and tells samplers which value arrays are admissible.
    """

    domain = "real"

    def __call__(self, i_x, i_z, i_a, cont):
        raise NotImplementedError

    def table(self, dp, v):
        out = np.full((dp.n_x, dp.n_z, dp.n_a), -np.inf)
        for i_x, i_z in itertools.product(range(dp.n_x), range(dp.n_z)):
            for i_a in range(dp.lo[i_x, i_z], dp.hi[i_x, i_z] + 1):
                out[i_x, i_z, i_a] = self(i_x, i_z, i_a, v[dp.next_state[i_a]])
        return out


class FunctionAggregator(Aggregator):
    """Wrap a plain ``fn(i_x, i_z, i_a, cont) -> float``."""

    def __init__(self, fn, domain="real"):
        self.fn = fn
        self.domain = domain

    def __call__(self, i_x, i_z, i_a, cont):
        return float(self.fn(i_x, i_z, i_a, cont))


class SeparableAggregator(Aggregator):
    """``H = reward[x, z, a] + discount[x, z, a] * sum_z' Q[z, z'] v(next(a), z')``.

    ``discount`` defaults to ``beta[z]`` in every cell. Allowing it to vary
    by action (within ``0 <= discount <= beta[z]``) covers stopping problems,
    where accepting ends discounting of continuation values, and the
    savings-rate form of homogeneous programs.
    """

    def __init__(self, reward, beta, Q, discount=None):
        self.reward = np.asarray(reward, dtype=float)
        self.Q = np.asarray(Q, dtype=float)
        if discount is None:
            discount = np.broadcast_to(np.asarray(beta, dtype=float)[None, :, None], self.reward.shape)
        self.discount = np.ascontiguousarray(np.broadcast_to(discount, self.reward.shape), dtype=float)

    def __call__(self, i_x, i_z, i_a, cont):
        return float(self.reward[i_x, i_z, i_a] + self.discount[i_x, i_z, i_a] * (self.Q[i_z] @ cont))

    def expectation(self, dp, v):
        """``E[z, a] = sum_z' Q[z, z'] v(next(a), z')``."""
        return self.Q @ v[dp.next_state].T

    def table(self, dp, v):
        return self.reward + self.discount * self.expectation(dp, v)[None, :, :]


@dataclass(eq=False)
class DynamicProgram:
    x_grid: np.ndarray
    chain: object
    a_grid: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    aggregator: Aggregator
    discount_weights: np.ndarray
    next_state: np.ndarray = None
    spectral_tol: float = 1e-6
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x_grid = np.asarray(self.x_grid, dtype=float).reshape(-1)
        self.a_grid = np.asarray(self.a_grid, dtype=float).reshape(-1)
        shape = (self.n_x, self.n_z)
        self.lo = np.broadcast_to(np.asarray(self.lo, dtype=np.int64), shape).copy()
        self.hi = np.broadcast_to(np.asarray(self.hi, dtype=np.int64), shape).copy()
        if np.any(self.lo > self.hi):
            i_x, i_z = np.argwhere(self.lo > self.hi)[0]
            raise ValueError(f"empty feasible range at (x={i_x}, z={i_z})")
        if np.any(self.lo < 0) or np.any(self.hi >= self.n_a):
            raise ValueError("feasible ranges exceed the action grid")
        if self.next_state is None:
            if self.n_a != self.n_x:
                raise ValueError("next_state is required when actions are not next-period states")
            self.next_state = np.arange(self.n_x)
        self.next_state = np.asarray(self.next_state, dtype=np.int64)
        if self.next_state.shape != (self.n_a,) or np.any(self.next_state < 0) or np.any(self.next_state >= self.n_x):
            raise ValueError("next_state must map each action to an endogenous grid index")
        self.discount_weights = check_weights(self.discount_weights, self.n_z, "discount_weights")

    @property
    def n_x(self):
        return self.x_grid.shape[0]

    @property
    def n_z(self):
        return self.chain.n

    @property
    def n_a(self):
        return self.a_grid.shape[0]

    @property
    def separable(self):
        return isinstance(self.aggregator, SeparableAggregator)

    @cached_property
    def feasible_mask(self):
        a = np.arange(self.n_a)
        return (a >= self.lo[..., None]) & (a <= self.hi[..., None])

    @cached_property
    def discount_operator(self):
        return build_discount_operator(self.chain, self.discount_weights)

    @cached_property
    def certificate(self):
        """Spectral report on the discount weights; raises unless ``upper < 1``."""
        return require_certificate(self.discount_operator, tol=self.spectral_tol)

    def n_policies(self):
        return math.prod(int(s) for s in (self.hi - self.lo + 1).ravel())

    def check_policy(self, sigma):
        sigma = np.asarray(sigma)
        if sigma.shape != (self.n_x, self.n_z):
            raise ValueError(f"policy must have shape {(self.n_x, self.n_z)}")
        bad = (sigma < self.lo) | (sigma > self.hi)
        if bad.any():
            i_x, i_z = np.argwhere(bad)[0]
            raise InfeasiblePolicy(int(i_x), int(i_z))
        return sigma.astype(np.int64)


def separable_program(x_grid, chain, a_grid, lo, hi, reward, beta, next_state=None, discount=None, **kw):
    """Convenience constructor for ``H = u + beta(z) * E v(next(a), z')``."""
    agg = SeparableAggregator(reward, beta, chain.transition, discount=discount)
    return DynamicProgram(x_grid, chain, a_grid, lo, hi, agg, beta, next_state=next_state, **kw)


@dataclass
class Solution:
    value: np.ndarray
    policy: np.ndarray
    bellman_residual: float
    iterations: int
    certified: object
    error_bound: float = None
    converged: bool = True
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "value": self.value.tolist(),
            "policy": self.policy.tolist(),
            "bellman_residual": self.bellman_residual,
            "iterations": self.iterations,
            "certified": self.certified.to_dict() if self.certified is not None else None,
            "error_bound": self.error_bound,
            "converged": self.converged,
        }
        diag = {k: v for k, v in self.diagnostics.items() if isinstance(v, (bool, int, float, str, type(None)))}
        if diag:
            out["diagnostics"] = diag
        return out

    def to_rows(self, dp):
        """Long-format rows ``(i_x, i_z, x, z, value, action)``."""
        rows = []
        for i_x in range(dp.n_x):
            for i_z in range(dp.n_z):
                rows.append(
                    (
                        i_x,
                        i_z,
                        float(dp.x_grid[i_x]),
                        float(dp.chain.states[i_z]),
                        float(self.value[i_x, i_z]),
                        float(dp.a_grid[self.policy[i_x, i_z]]),
                    )
                )
        return rows


def _check_value(dp, v):
    v = np.asarray(v, dtype=float)
    if v.shape != (dp.n_x, dp.n_z):
        raise ValueError(f"value array must have shape {(dp.n_x, dp.n_z)}, got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("value array contains non-finite entries")
    return v


def _feasible_table(dp, v):
    H = dp.aggregator.table(dp, v)
    mask = dp.feasible_mask
    bad = mask & ~np.isfinite(H)
    if bad.any():
        i_x, i_z, i_a = (int(i) for i in np.argwhere(bad)[0])
        raise NonFiniteAggregator(i_x, i_z, i_a)
    return np.where(mask, H, -np.inf)


def bellman_backup(dp, v):
    """Apply the Bellman operator once.

    Returns ``(Tv, greedy)``; ties go to the smallest action index.
    """
    v = _check_value(dp, v)
    H = _feasible_table(dp, v)
    policy = np.argmax(H, axis=2)
    value = np.take_along_axis(H, policy[..., None], axis=2)[..., 0]
    return value, policy


def policy_backup(dp, sigma, v):
    """``(T_sigma v)(x, z) = H(x, z, sigma(x, z), v)``."""
    sigma = dp.check_policy(sigma)
    v = _check_value(dp, v)
    H = _feasible_table(dp, v)
    return np.take_along_axis(H, sigma[..., None], axis=2)[..., 0]


def iterate_bellman(dp, v, n, sigma=None):
    """``T^n v`` (or ``T_sigma^n v`` when ``sigma`` is given)."""
    for _ in range(n):
        v = bellman_backup(dp, v)[0] if sigma is None else policy_backup(dp, sigma, v)
    return v


def error_bound(residual, report):
    """Bound on ``||v - v*||`` given ``||Tv - v|| = residual``.

    Uses ``||T^k v - T^(k+1) v|| <= ||L^k 1|| * residual`` summed over ``k``,
    grouped in blocks of the contraction index ``n``:
    ``residual * sum_{i<n} ||L^i 1|| / (1 - ||L^n 1||)``.
    """
    if report.contraction_index is None:
        return math.inf
    return residual * report.prefix_norm_sum / (1.0 - report.contraction_modulus)


def vfi(dp, v0=None, tol=1e-8, max_iter=100_000):
    """Value function iteration from ``v0`` (default zeros).

    Stops when ``||Tv - v||_inf < tol``. The returned value is the last
    iterate ``v``, the policy is greedy with respect to it, and
    ``error_bound`` bounds ``||v - v*||``.
    """
    report = dp.certificate
    v = np.zeros((dp.n_x, dp.n_z)) if v0 is None else _check_value(dp, v0).copy()
    diff = math.inf
    for it in range(1, max_iter + 1):
        Tv, policy = bellman_backup(dp, v)
        diff = float(np.max(np.abs(Tv - v)))
        if diff < tol:
            return Solution(v, policy, diff, it, report, error_bound(diff, report))
        v = Tv
    sol = Solution(v, policy, diff, max_iter, report, error_bound(diff, report), converged=False)
    raise MaxIterExceeded(sol, f"vfi did not reach tol={tol} in {max_iter} iterations (residual {diff:.3g})")


def _policy_matrix(dp, sigma):
    """Sparse ``D_sigma`` and reward vector ``u_sigma`` on the flattened state space."""
    agg = dp.aggregator
    n_x, n_z = dp.n_x, dp.n_z
    ix, iz = np.meshgrid(np.arange(n_x), np.arange(n_z), indexing="ij")
    ix, iz, ia = ix.ravel(), iz.ravel(), sigma.ravel()
    u = agg.reward[ix, iz, ia]
    disc = agg.discount[ix, iz, ia]
    rows = np.repeat(np.arange(n_x * n_z), n_z)
    cols = (dp.next_state[ia][:, None] * n_z + np.arange(n_z)[None, :]).ravel()
    vals = (disc[:, None] * agg.Q[iz]).ravel()
    D = scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(n_x * n_z, n_x * n_z))
    return D, u


def policy_eval_exact(dp, sigma):
    """Lifetime value of ``sigma`` from the linear system ``(I - D_sigma) v = u_sigma``."""
    if not dp.separable:
        raise NotSeparable("exact policy evaluation needs a separable aggregator")
    dp.certificate
    sigma = dp.check_policy(sigma)
    D, u = _policy_matrix(dp, sigma)
    n = u.shape[0]
    if n <= DENSE_LIMIT:
        A = np.eye(n) - D.toarray()
        solve = lambda b: np.linalg.solve(A, b)  # noqa: E731
    else:
        A = scipy.sparse.identity(n, format="csc") - D.tocsc()
        lu = scipy.sparse.linalg.splu(A)
        solve = lu.solve
    try:
        v = solve(u)
        resid = u - A @ v
        scale = max(1.0, float(np.max(np.abs(v))))
        if np.max(np.abs(resid)) > 1e-10 * scale:
            v = v + solve(resid)
            resid = u - A @ v
    except (np.linalg.LinAlgError, RuntimeError) as exc:
        raise SingularSystem(str(exc)) from exc
    if not np.all(np.isfinite(v)) or np.max(np.abs(resid)) > 1e-10 * max(1.0, float(np.max(np.abs(v)))):
        raise SingularSystem("policy evaluation residual above tolerance")
    return v.reshape(dp.n_x, dp.n_z)


def policy_eval_iterative(dp, sigma, v0=None, tol=1e-10, max_iter=100_000):
    """Lifetime value of ``sigma`` as the limit of ``T_sigma^n v0``; any aggregator."""
    report = dp.certificate
    sigma = dp.check_policy(sigma)
    v = np.zeros((dp.n_x, dp.n_z)) if v0 is None else _check_value(dp, v0).copy()
    diff = math.inf
    for _ in range(max_iter):
        Tv = policy_backup(dp, sigma, v)
        diff = float(np.max(np.abs(Tv - v)))
        v = Tv
        if diff < tol:
            return v
    sol = Solution(v, sigma, diff, max_iter, report, error_bound(diff, report), converged=False)
    raise MaxIterExceeded(sol, "iterative policy evaluation did not converge")


def policy_eval(dp, sigma, **kw):
    if dp.separable:
        return policy_eval_exact(dp, sigma)
    return policy_eval_iterative(dp, sigma, **kw)


def howard(dp, sigma0=None, tol=1e-10, max_iter=10_000, eval_kw=None):
    """Howard policy iteration.

    Alternates policy evaluation (exact when separable, iterative otherwise)
    with greedy improvement, stopping when the policy repeats or successive
    values differ by less than ``tol``. Only convergence of values is
    guaranteed in general; finite termination is not.

    ``diagnostics["min_improvement"]`` records the smallest pointwise change
    ``v_k - v_{k-1}`` seen, which should never be materially negative.
    """
    report = dp.certificate
    eval_kw = eval_kw or {}
    sigma = dp.lo.copy() if sigma0 is None else dp.check_policy(sigma0).copy()
    v = policy_eval(dp, sigma, **eval_kw)
    min_step = math.inf
    history = [v]
    for k in range(1, max_iter + 1):
        Tv, greedy = bellman_backup(dp, v)
        if np.array_equal(greedy, sigma):
            break
        v_new = policy_eval(dp, greedy, **eval_kw)
        min_step = min(min_step, float(np.min(v_new - v)))
        step = float(np.max(np.abs(v_new - v)))
        sigma, v = greedy, v_new
        history.append(v)
        if step < tol:
            Tv = bellman_backup(dp, v)[0]
            break
    else:
        sol = Solution(v, sigma, float(np.max(np.abs(Tv - v))), max_iter, report, converged=False)
        raise MaxIterExceeded(sol, "policy iteration did not terminate")
    resid = float(np.max(np.abs(Tv - v)))
    return Solution(
        v,
        sigma,
        resid,
        k,
        report,
        error_bound(resid, report),
        diagnostics={"min_improvement": min_step, "values": history},
    )


def brute_force_oracle(dp, budget=10**6, chunk=20_000, atol=1e-9):
    """Evaluate every stationary policy exactly and take the pointwise maximum.

    The returned policy is the enumerated policy with the largest total
    value; ``diagnostics["attained"]`` says whether it reaches the pointwise
    maximum at every state (it should, an optimal policy exists).
    """
    if not dp.separable:
        raise NotSeparable("the brute-force oracle needs a separable aggregator")
    report = dp.certificate
    count = dp.n_policies()
    if count > budget:
        raise TooManyPolicies(count, budget)
    agg = dp.aggregator
    n_x, n_z = dp.n_x, dp.n_z
    S = n_x * n_z
    lo = dp.lo.ravel()
    sizes = (dp.hi - dp.lo + 1).ravel()
    strides = np.ones(S, dtype=np.int64)
    for i in range(S - 2, -1, -1):
        strides[i] = strides[i + 1] * sizes[i + 1]
    ix = np.repeat(np.arange(n_x), n_z)
    iz = np.tile(np.arange(n_z), n_x)
    eye = np.eye(S)
    best_max = np.full(S, -np.inf)
    best_sum, best_policy, best_vals = -np.inf, None, None
    for start in range(0, count, chunk):
        k = np.arange(start, min(count, start + chunk), dtype=np.int64)
        B = k.size
        sig = lo[None, :] + (k[:, None] // strides[None, :]) % sizes[None, :]
        u = agg.reward[ix[None, :], iz[None, :], sig]
        disc = agg.discount[ix[None, :], iz[None, :], sig]
        D = np.zeros((B, S, S))
        cols = dp.next_state[sig][..., None] * n_z + np.arange(n_z)
        b_idx = np.arange(B)[:, None, None]
        r_idx = np.arange(S)[None, :, None]
        D[b_idx, r_idx, cols] = disc[..., None] * agg.Q[iz][None, :, :]
        vals = np.linalg.solve(eye[None] - D, u[..., None])[..., 0]
        best_max = np.maximum(best_max, vals.max(axis=0))
        sums = vals.sum(axis=1)
        j = int(np.argmax(sums))
        if sums[j] > best_sum:
            best_sum, best_policy, best_vals = sums[j], sig[j], vals[j]
    value = best_max.reshape(n_x, n_z)
    policy = best_policy.reshape(n_x, n_z)
    attained = bool(np.all(best_vals >= best_max - atol * max(1.0, np.max(np.abs(best_max)))))
    if not attained:
        warnings.warn("no single enumerated policy attains the pointwise maximum", RuntimeWarning, stacklevel=2)
    Tv = bellman_backup(dp, value)[0]
    return Solution(
        value,
        policy,
        float(np.max(np.abs(Tv - value))),
        count,
        report,
        0.0,
        diagnostics={"attained": attained, "n_policies": count},
    )


@dataclass(frozen=True)
class Violation:
    kind: str  # "blackwell", "monotone" or "lipschitz"
    cell: tuple
    lhs: float
    rhs: float


def blackwell_check(dp, trials=1000, seed=0, slack=1e-10, scale=10.0):
    """Sample the discounting inequalities the theory relies on.

    For random value arrays, nonnegative ``c(z')`` and feasible cells, checks

    * ``H(v + c) <= H(v) + beta(z) * sum Q c``,
    * ``v <= w`` implies ``H(v) <= H(w)``,
    * ``|H(v) - H(w)| <= beta(z) * sum_z' Q(z, z') sup_x |v - w|(x, z')``,

    with ``beta = dp.discount_weights``. Returns the violations found.
    """
    if trials == 0:
        warnings.warn("blackwell_check with zero trials passes vacuously", UserWarning, stacklevel=2)
        return []
    rng = np.random.default_rng(seed)
    H = dp.aggregator
    Q = dp.chain.transition
    beta = dp.discount_weights
    cells = np.argwhere(dp.feasible_mask)
    positive = getattr(H, "domain", "real") == "positive"
    shape = (dp.n_x, dp.n_z)

    def draw():
        if positive:
            return rng.uniform(0.01, scale, size=shape)
        return rng.normal(0.0, scale, size=shape)

    out = []
    for _ in range(trials):
        i_x, i_z, i_a = (int(i) for i in cells[rng.integers(len(cells))])
        nxt = dp.next_state[i_a]
        v = draw()
        w = draw()
        c = rng.uniform(0.0, scale, size=dp.n_z)
        bump = rng.uniform(0.0, scale, size=shape)
        h_v = H(i_x, i_z, i_a, v[nxt])
        tol = slack * max(1.0, abs(h_v))

        lhs = H(i_x, i_z, i_a, v[nxt] + c)
        rhs = h_v + beta[i_z] * (Q[i_z] @ c)
        if lhs > rhs + tol:
            out.append(Violation("blackwell", (i_x, i_z, i_a), lhs, rhs))

        h_up = H(i_x, i_z, i_a, (v + bump)[nxt])
        if h_v > h_up + tol:
            out.append(Violation("monotone", (i_x, i_z, i_a), h_v, h_up))

        h_w = H(i_x, i_z, i_a, w[nxt])
        lhs = abs(h_v - h_w)
        rhs = beta[i_z] * (Q[i_z] @ np.max(np.abs(v - w), axis=0))
        if lhs > rhs + slack * max(1.0, abs(h_v), abs(h_w)):
            out.append(Violation("lipschitz", (i_x, i_z, i_a), lhs, rhs))
    return out
