"""Finite Markov chains and Rouwenhorst discretisation of an AR(1) process."""

import bisect
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .exceptions import InvalidChainError, SingularSystem

ROW_SUM_TOL = 1e-12


@dataclass(frozen=True)
class NonStochasticRow:
    row: int
    total: float

    def __str__(self):
        return f"NonStochasticRow({self.row}, {self.total!r})"


@dataclass(frozen=True)
class NegativeEntry:
    row: int
    col: int

    def __str__(self):
        return f"NegativeEntry({self.row}, {self.col})"


@dataclass(frozen=True)
class NonIncreasingGrid:
    index: int

    def __str__(self):
        return f"NonIncreasingGrid({self.index})"


@dataclass(frozen=True, eq=False)
class FiniteMarkovChain:
    """Exogenous state grid ``states`` with row-stochastic ``transition`` matrix.

    Rows whose sums are within ``ROW_SUM_TOL`` of one are renormalised on
    construction; the largest correction applied is kept in
    ``renormalized``. Nothing else is checked here, see :func:`validate_chain`.
    """

    states: np.ndarray
    transition: np.ndarray
    renormalized: float = field(default=0.0, compare=False)

    def __post_init__(self):
        states = np.array(self.states, dtype=float).reshape(-1)
        Q = np.array(self.transition, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape[0] != states.shape[0]:
            raise ValueError(
                f"transition must be square and match states: {Q.shape} vs {states.shape}"
            )
        sums = Q.sum(axis=1)
        dev = np.abs(sums - 1.0)
        fix = (dev > 0) & (dev <= ROW_SUM_TOL)
        correction = 0.0
        if fix.any():
            Q[fix] /= sums[fix, None]
            correction = float(dev[fix].max())
        states.setflags(write=False)
        Q.setflags(write=False)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "transition", Q)
        object.__setattr__(self, "renormalized", max(correction, float(self.renormalized)))

    @property
    def n(self):
        return self.states.shape[0]

    def to_dict(self):
        return {"states": self.states.tolist(), "transition": self.transition.tolist()}

    @classmethod
    def from_dict(cls, d):
        return validate_chain(cls(d["states"], d["transition"]))


def validate_chain(chain):
    """Return ``chain`` unchanged if valid, else raise listing every violation."""
    violations = []
    Q = chain.transition
    if chain.n < 1:
        raise InvalidChainError(["empty chain"])
    for i, j in zip(*np.nonzero(Q < 0)):
        violations.append(NegativeEntry(int(i), int(j)))
    sums = Q.sum(axis=1)
    for i in np.flatnonzero(np.abs(sums - 1.0) > ROW_SUM_TOL):
        violations.append(NonStochasticRow(int(i), float(sums[i])))
    for i in np.flatnonzero(np.diff(chain.states) <= 0):
        violations.append(NonIncreasingGrid(int(i) + 1))
    if not np.all(np.isfinite(Q)) or not np.all(np.isfinite(chain.states)):
        violations.append("non-finite entries")
    if violations:
        raise InvalidChainError(violations)
    return chain


@dataclass(frozen=True)
class AR1Spec:
    """Gaussian AR(1) for the discount factor level.

    Exactly one of ``sigma_eps`` (innovation s.d.) and ``sigma_beta``
    (unconditional s.d.) is given; the other is derived from
    ``sigma_beta = sigma_eps / sqrt(1 - rho**2)``.
    """

    mu: float
    rho: float
    n_states: int
    sigma_eps: float = None
    sigma_beta: float = None

    def __post_init__(self):
        if not -1 < self.rho < 1:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho!r}")
        if int(self.n_states) != self.n_states or self.n_states < 2:
            raise ValueError(f"n_states must be an integer >= 2, got {self.n_states!r}")
        if (self.sigma_eps is None) == (self.sigma_beta is None):
            raise ValueError("give exactly one of sigma_eps and sigma_beta")
        scale = math.sqrt(1.0 - self.rho**2)
        if self.sigma_beta is None:
            if not self.sigma_eps > 0:
                raise ValueError("sigma_eps must be positive")
            object.__setattr__(self, "sigma_beta", self.sigma_eps / scale)
        else:
            if not self.sigma_beta > 0:
                raise ValueError("sigma_beta must be positive")
            object.__setattr__(self, "sigma_eps", self.sigma_beta * scale)
        object.__setattr__(self, "n_states", int(self.n_states))

    @classmethod
    def from_dict(cls, d):
        keys = {"mu", "rho", "n_states", "sigma_eps", "sigma_beta"}
        unknown = set(d) - keys
        if unknown:
            raise ValueError(f"unknown AR(1) fields: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self):
        return {
            "mu": self.mu,
            "rho": self.rho,
            "sigma_beta": self.sigma_beta,
            "n_states": self.n_states,
        }


def rouwenhorst(spec):
    """Discretise ``spec`` into a symmetric Rouwenhorst chain.

    States are equally spaced on ``mu +/- sigma_beta * sqrt(N - 1)`` and
    ``p = q = (1 + rho) / 2``, which matches the mean, autocorrelation and
    unconditional variance of the AR(1) exactly.
    """
    N = spec.n_states
    p = (1.0 + spec.rho) / 2.0
    q = p
    theta = np.array([[p, 1 - p], [1 - q, q]])
    for n in range(3, N + 1):
        nxt = np.zeros((n, n))
        nxt[:-1, :-1] += p * theta
        nxt[:-1, 1:] += (1 - p) * theta
        nxt[1:, :-1] += (1 - q) * theta
        nxt[1:, 1:] += q * theta
        nxt[1:-1] /= 2.0
        theta = nxt
    psi = spec.sigma_beta * math.sqrt(N - 1)
    states = np.linspace(spec.mu - psi, spec.mu + psi, N)
    return validate_chain(FiniteMarkovChain(states, theta))


class Stationary(NamedTuple):
    pi: np.ndarray
    unique: bool


def stationary_distribution(chain, tol=1e-10):
    """Solve ``pi Q = pi`` with ``sum(pi) = 1``.

    For reducible chains some stationary vector is returned and ``unique`` is
    False.
    """
    Q = chain.transition
    N = chain.n
    A = Q.T - np.eye(N)
    rank = np.linalg.matrix_rank(A, tol=1e-10)
    unique = rank == N - 1
    if unique:
        M = A.copy()
        M[-1, :] = 1.0
        b = np.zeros(N)
        b[-1] = 1.0
        pi = np.linalg.solve(M, b)
    else:
        M = np.vstack([A, np.ones((1, N))])
        b = np.zeros(N + 1)
        b[-1] = 1.0
        pi = np.linalg.lstsq(M, b, rcond=None)[0]
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    if np.max(np.abs(pi @ Q - pi)) > tol:
        raise SingularSystem("could not find a stationary distribution to tolerance")
    return Stationary(pi, bool(unique))


def simulate(chain, z0, horizon, seed):
    """Simulate a path of state indices starting at ``z0``.

    The returned array has length ``horizon`` with ``path[0] == z0``.
    """
    if not 0 <= z0 < chain.n:
        raise IndexError(f"initial state {z0} out of range for {chain.n} states")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    path = np.empty(horizon, dtype=np.int64)
    if horizon == 0:
        return path
    rng = np.random.default_rng(seed)
    draws = rng.random(horizon - 1).tolist()
    cdf = np.cumsum(chain.transition, axis=1)
    cdf[:, -1] = np.inf
    rows = [r.tolist() for r in cdf]
    state = int(z0)
    out = [state]
    append = out.append
    for u in draws:
        state = bisect.bisect_right(rows[state], u)
        append(state)
    path[:] = out
    return path
