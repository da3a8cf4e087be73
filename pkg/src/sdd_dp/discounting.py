"""Discount operators ``L[i, j] = w_i * Q[i, j]`` and their spectral certificates.

The spectral radius is bracketed rather than estimated: repeated squaring
gives the Gelfand upper bounds ``||L^(2^k) 1||^(1/2^k)``, and
Collatz-Wielandt ratios evaluated on the iterated vector ``L^(2^k) 1``
give lower bounds (and, when the vector is strictly positive, a second
upper bound). No eigen-decomposition is used, so reducible operators such
as the two-state absorbing example are handled without special cases.
"""

import csv
import io
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from .exceptions import NotConvergedWarning, RadiusNotCertified, SingularSystem
from .markov import AR1Spec, rouwenhorst, validate_chain
from .validation import check_weights

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_N_MAX = 2**20


@dataclass(frozen=True, eq=False)
class DiscountOperator:
    matrix: np.ndarray
    weights: np.ndarray
    chain: object

    @property
    def n(self):
        return self.weights.shape[0]

    def apply(self, h):
        """``(L h)(z) = w(z) * sum_z' Q(z, z') h(z')``; ``h`` may carry trailing axes."""
        return self.matrix @ h


def build_discount_operator(chain, weights):
    """Return the operator with entries ``weights[i] * Q[i, j]``."""
    validate_chain(chain)
    w = check_weights(weights, chain.n)
    M = w[:, None] * chain.transition
    M.setflags(write=False)
    return DiscountOperator(M, w, chain)


def operator_from_matrix(matrix):
    """Wrap an arbitrary nonnegative square matrix (weights are its row sums)."""
    M = np.array(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.any(M < 0) or not np.all(np.isfinite(M)):
        raise ValueError("matrix must be finite and nonnegative")
    M.setflags(write=False)
    w = M.sum(axis=1)
    w.setflags(write=False)
    return DiscountOperator(M, w, None)


def ez_weights(beta, theta):
    """Weights ``beta**theta`` for recursive-utility aggregators."""
    return np.asarray(beta, dtype=float) ** theta


def growth_weights(beta, alpha, theta):
    """Weights ``beta * alpha**theta`` for homogeneous programs."""
    return np.asarray(beta, dtype=float) * np.asarray(alpha, dtype=float) ** theta


def return_weights(beta, R, gamma):
    """Weights ``beta * R**(1 - gamma)`` for the CRRA savings problem."""
    return growth_weights(beta, R, 1.0 - gamma)


@dataclass
class SpectralReport:
    radius: float
    upper: float
    lower: float
    contraction_index: int = None
    contraction_modulus: float = None
    iterations: int = 0
    converged: bool = True
    tol: float = DEFAULT_TOL
    upper_history: list = field(default_factory=list, repr=False)
    # sum_{i<n} ||L^i 1||, used by a-posteriori error bounds
    prefix_norm_sum: float = None

    @property
    def certified(self):
        return self.upper < 1.0

    def to_dict(self):
        d = asdict(self)
        d.pop("upper_history")
        return d


def _cw_lower(M, x):
    """Largest Collatz-Wielandt lower bound over the leading index sets of ``x``.

    For each ``m`` the principal submatrix on the ``m`` largest entries of
    ``x`` gives ``min_i (M_JJ x_J)_i / x_i <= r(M_JJ) <= r(M)``.
    """
    support = np.flatnonzero(x > 0)
    if support.size == 0:
        return 0.0
    order = support[np.argsort(-x[support], kind="stable")]
    xs = x[order]
    A = M[np.ix_(order, order)] * xs[None, :]
    partial = np.cumsum(A, axis=1)
    # ratios[i, m] = (M_JJ x_J)_i / x_i for J = first m+1 indices, valid for i <= m
    ratios = partial / xs[:, None]
    ratios = np.where(np.triu(np.ones_like(ratios, dtype=bool)), ratios, np.inf)
    return float(max(0.0, np.max(np.min(ratios, axis=0))))


def _cw_upper(M, x):
    if np.any(x <= 0):
        return math.inf
    return float(np.max((M @ x) / x))


def spectral_radius(op, tol=DEFAULT_TOL, n_max=DEFAULT_N_MAX, contraction=True):
    """Certified bracket for ``r(L)`` together with the contraction index.

    Parameters
    ----------
    op : DiscountOperator
    tol : float
        Target width ``upper - lower``.
    n_max : int
        Largest power of ``L`` considered; squaring stops at ``2^k >= n_max``.
    contraction : bool
        Also scan for the contraction index.

    Returns
    -------
    SpectralReport
        With ``converged=False`` (and a :class:`NotConvergedWarning`) when
        the bracket is wider than ``tol``; the bounds are still valid.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    L = np.asarray(op.matrix, dtype=float)
    N = L.shape[0]
    one = np.ones(N)
    k_max = max(0, math.ceil(math.log2(max(n_max, 1))))

    norm0 = float(np.max(L @ one))
    if norm0 == 0.0:
        report = SpectralReport(0.0, 0.0, 0.0, iterations=0, tol=tol, upper_history=[0.0])
    else:
        P = L / norm0
        log_c = math.log(norm0)  # log ||L^(2^k)||
        upper = norm0
        lower = 0.0
        history = [norm0]
        k = 0
        while True:
            x = P @ one
            x /= x.max()
            upper = min(upper, _cw_upper(L, x))
            lower = max(lower, _cw_lower(L, x))
            if upper - lower <= tol or k >= k_max:
                break
            P2 = P @ P
            s = float(np.max(P2 @ one))
            k += 1
            if s == 0.0:  # nilpotent
                upper, lower = 0.0, 0.0
                history.append(0.0)
                break
            log_c = 2.0 * log_c + math.log(s)
            P = P2 / s
            u_k = math.exp(log_c / 2**k)
            history.append(u_k)
            upper = min(upper, u_k)
        lower = min(lower, upper)
        report = SpectralReport(
            radius=0.5 * (upper + lower),
            upper=upper,
            lower=lower,
            iterations=k,
            converged=upper - lower <= tol,
            tol=tol,
            upper_history=history,
        )
    if not report.converged:
        warnings.warn(
            f"spectral bounds did not close: lower={report.lower:.10g} upper={report.upper:.10g}",
            NotConvergedWarning,
            stacklevel=2,
        )
    if contraction:
        if report.lower >= 1.0:
            n = None
        else:
            n, lam, prefix = _scan_contraction(L, n_max)
            report.contraction_modulus = lam
            report.prefix_norm_sum = prefix
        report.contraction_index = n
    return report


def _scan_contraction(L, n_max):
    v = np.ones(L.shape[0])
    prefix = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max + 1):
            prefix += float(v.max())
            v = L @ v
            m = float(v.max())
            if m < 1.0:
                return n, m, prefix
            if not math.isfinite(m):
                break
    return None, None, None


def contraction_index(op, n_max=DEFAULT_N_MAX):
    """Smallest ``n <= n_max`` with ``||L^n 1||_inf < 1``, or None."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    return _scan_contraction(np.asarray(op.matrix), n_max)[0]


def require_certificate(op, tol=DEFAULT_TOL, n_max=DEFAULT_N_MAX):
    """Spectral report for ``op``; raise :class:`RadiusNotCertified` unless ``upper < 1``."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        report = spectral_radius(op, tol=tol, n_max=n_max)
    if not report.upper < 1.0:
        raise RadiusNotCertified(report)
    logger.info(
        "spectral certificate: r in [%.10g, %.10g], contraction index %s",
        report.lower,
        report.upper,
        report.contraction_index,
    )
    return report


def resolvent_sum(op, report=None):
    """``K = (I - L)^{-1} 1 = sum_t L^t 1``, the expected discounted period count.

    Requires a certificate ``upper < 1``; pass one in ``report`` to skip
    recomputing it.
    """
    if report is None:
        report = require_certificate(op)
    elif not report.upper < 1.0:
        raise RadiusNotCertified(report)
    L = np.asarray(op.matrix)
    N = L.shape[0]
    A = np.eye(N) - L
    one = np.ones(N)
    try:
        lu = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise SingularSystem(str(exc)) from exc
    K = scipy.linalg.lu_solve(lu, one)
    resid = one - A @ K
    if np.max(np.abs(resid)) > 1e-10:
        K = K + scipy.linalg.lu_solve(lu, resid)
        resid = one - A @ K
    if not np.all(np.isfinite(K)) or np.max(np.abs(resid)) > 1e-8 * max(1.0, np.max(np.abs(K))):
        raise SingularSystem("resolvent solve did not reach the residual tolerance")
    return K


def truncated_resolvent(op, terms):
    """Partial sum ``sum_{t < terms} L^t 1`` by vector iteration."""
    L = np.asarray(op.matrix)
    v = np.ones(L.shape[0])
    total = np.zeros_like(v)
    for _ in range(terms):
        total += v
        v = L @ v
    return total


def _grid_cell(mu, rho, sigma, n_states, tol, n_max):
    chain = rouwenhorst(AR1Spec(mu=mu, rho=rho, sigma_beta=sigma, n_states=n_states))
    op = build_discount_operator(chain, chain.states)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NotConvergedWarning)
        rep = spectral_radius(op, tol=tol, n_max=n_max, contraction=False)
    return rep


@dataclass
class RadiusGrid:
    rho: np.ndarray
    sigma_beta: np.ndarray
    radius: np.ndarray  # NaN where the bracket did not close
    reports: list

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rho", "sigma_beta", "radius"])
        for i, rho in enumerate(self.rho):
            for j, sig in enumerate(self.sigma_beta):
                r = self.radius[i, j]
                w.writerow([repr(float(rho)), repr(float(sig)), "" if np.isnan(r) else repr(float(r))])
        return buf.getvalue()


def radius_grid(mu, rho_grid, sigma_grid, n_states, tol=DEFAULT_TOL, n_max=DEFAULT_N_MAX, threads=1):
    """Spectral radius of the Rouwenhorst discount operator over a (rho, sigma_beta) grid.

    Entry ``(i, j)`` corresponds to ``(rho_grid[i], sigma_grid[j])``. Cells are
    independent; ``threads`` only changes the schedule, never the output.
    """
    rho_grid = np.asarray(rho_grid, dtype=float)
    sigma_grid = np.asarray(sigma_grid, dtype=float)
    if np.any(np.abs(rho_grid) >= 1):
        raise ValueError("every rho must lie in (-1, 1)")
    if np.any(sigma_grid <= 0):
        raise ValueError("every sigma_beta must be positive")
    cells = [(r, s) for r in rho_grid for s in sigma_grid]

    def run(cell):
        return _grid_cell(mu, cell[0], cell[1], n_states, tol, n_max)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            reports = list(ex.map(run, cells))
    else:
        reports = [run(c) for c in cells]
    radius = np.array([rep.radius if rep.converged else np.nan for rep in reports])
    radius = radius.reshape(rho_grid.size, sigma_grid.size)
    return RadiusGrid(rho_grid, sigma_grid, radius, reports)


@dataclass
class DivergenceReport:
    hits: list  # first t with a * sum_{s<=t} (L^s 1)(z) > threshold, or None
    max_partial_sum: np.ndarray
    bound: float = None  # b * ||K||_inf when the radius is certified below one
    bounded: bool = None


def divergence_witness(op, reward_bounds, threshold, t_max, report=None):
    """Locate when the expected discounted reward stream exceeds ``threshold``.

    With rewards in ``[a, b]`` the expected lifetime value from ``z`` is at
    least ``a * sum_t (L^t 1)(z)``. Returns, per starting state, the first
    ``t <= t_max`` where that partial sum exceeds ``threshold``. When the
    radius is certified below one the partial sums are also checked against
    ``b * ||K||_inf``.
    """
    a, b = reward_bounds
    if not a > 0 or b < a:
        raise ValueError("reward bounds must satisfy 0 < a <= b")
    if report is None:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            report = spectral_radius(op, contraction=False)
    L = np.asarray(op.matrix)
    N = L.shape[0]
    v = np.ones(N)
    total = np.zeros(N)
    hits = [None] * N
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(t_max + 1):
            total += v
            crossed = np.flatnonzero(a * total > threshold)
            for i in crossed:
                if hits[i] is None:
                    hits[i] = t
            if all(h is not None for h in hits):
                break
            v = L @ v
            if not np.all(np.isfinite(v)):
                break
    out = DivergenceReport(hits=hits, max_partial_sum=a * total)
    if report.upper < 1.0:
        K = resolvent_sum(op, report)
        out.bound = float(b * np.max(K))
        out.bounded = bool(np.all(b * total <= out.bound * (1 + 1e-12)))
    return out
