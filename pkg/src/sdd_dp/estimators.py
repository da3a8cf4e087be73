"""scikit-learn style front ends.

The functional API in :mod:`sdd_dp.discounting` and :mod:`sdd_dp.dpcore` does
the work; these classes hold hyper-parameters (so ``get_params``,
``set_params`` and ``clone`` work) and store fitted results in trailing
underscore attributes.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .discounting import DEFAULT_N_MAX, DEFAULT_TOL, DiscountOperator, build_discount_operator, operator_from_matrix
from .discounting import spectral_radius as _spectral_radius
from .dpcore import DynamicProgram, howard, vfi


class SpectralRadiusEstimator(BaseEstimator):
    """Certified spectral radius of a discount operator.

    ``fit`` accepts a :class:`DiscountOperator`, a nonnegative square
    matrix, or a chain together with ``weights``.

    Examples
    --------
    >>> import numpy as np
    >>> est = SpectralRadiusEstimator().fit(0.95 * np.eye(2))
    >>> round(est.radius_, 6), est.contraction_index_
    (0.95, 1)
    """

    def __init__(self, tol=DEFAULT_TOL, n_max=DEFAULT_N_MAX):
        self.tol = tol
        self.n_max = n_max

    def fit(self, X, weights=None):
        if isinstance(X, DiscountOperator):
            op = X
        elif weights is not None:
            op = build_discount_operator(X, weights)
        else:
            op = operator_from_matrix(X)
        rep = _spectral_radius(op, tol=self.tol, n_max=self.n_max)
        self.operator_ = op
        self.report_ = rep
        self.radius_ = rep.radius
        self.lower_ = rep.lower
        self.upper_ = rep.upper
        self.contraction_index_ = rep.contraction_index
        return self

    @property
    def certified_(self):
        check_is_fitted(self, "report_")
        return self.report_.upper < 1.0


class _SolverBase(BaseEstimator):
    def _check_program(self, dp):
        if not isinstance(dp, DynamicProgram):
            raise TypeError(f"expected a DynamicProgram, got {type(dp).__name__}")
        return dp

    def _store(self, dp, sol):
        self.program_ = dp
        self.solution_ = sol
        self.value_ = sol.value
        self.policy_ = sol.policy
        self.n_iter_ = sol.iterations
        self.bellman_residual_ = sol.bellman_residual
        return self

    def predict(self, X):
        """Optimal action values at state index pairs ``X[:, 0] = i_x``, ``X[:, 1] = i_z``."""
        check_is_fitted(self, "policy_")
        X = np.asarray(X, dtype=np.int64).reshape(-1, 2)
        return self.program_.a_grid[self.policy_[X[:, 0], X[:, 1]]]

    def score(self, X):
        """Value at state index pairs."""
        check_is_fitted(self, "value_")
        X = np.asarray(X, dtype=np.int64).reshape(-1, 2)
        return self.value_[X[:, 0], X[:, 1]]


class ValueIteration(_SolverBase):
    def __init__(self, tol=1e-8, max_iter=100_000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, dp, v0=None):
        dp = self._check_program(dp)
        return self._store(dp, vfi(dp, v0=v0, tol=self.tol, max_iter=self.max_iter))


class PolicyIteration(_SolverBase):
    def __init__(self, tol=1e-10, max_iter=10_000):
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, dp, sigma0=None):
        dp = self._check_program(dp)
        return self._store(dp, howard(dp, sigma0=sigma0, tol=self.tol, max_iter=self.max_iter))
