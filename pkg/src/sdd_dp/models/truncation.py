"""Growth model with unbounded utility solved on a ladder of truncated capital sets.

Each level ``K_j = [0, M_j]`` is discretised with a common spacing so the
grids are nested and every point of ``K_1`` is present at every level. When
``f(k, z) <= M_j`` on ``K_j`` the truncated program is self-contained, and
the solutions restricted to ``K_1`` should agree across levels.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..dpcore import howard, vfi
from ..exceptions import LadderNotInvariant, NotStabilized
from .growth import GrowthParams, build_growth

logger = logging.getLogger(__name__)


@dataclass
class TruncationLadder:
    bounds: list  # M_1 < M_2 < ...

    def __post_init__(self):
        b = [float(m) for m in self.bounds]
        if not b or b[0] <= 0 or any(y <= x for x, y in zip(b, b[1:])):
            raise ValueError("ladder bounds must be positive and strictly increasing")
        self.bounds = b

    @classmethod
    def geometric(cls, M, levels=6):
        return cls([M * 2.0**j for j in range(levels)])


@dataclass
class LadderReport:
    levels: list
    differences: list  # sup over K_1 of |v_j - v_{j-1}|, from the second level on
    monotone: bool
    stabilized: bool
    solutions: list = field(repr=False, default_factory=list)
    grids: list = field(repr=False, default_factory=list)

    def to_dict(self):
        return {
            "levels": self.levels,
            "differences": self.differences,
            "monotone": self.monotone,
            "stabilized": self.stabilized,
        }


def check_invariance(params, ladder, step):
    """Raise :class:`LadderNotInvariant` unless ``f(k, z) <= M_j`` for all ``k`` in ``K_j``."""
    z = params.chain.states
    for j, M in enumerate(ladder.bounds, start=1):
        k = level_grid(M, step)
        k = np.append(k, M)
        image = params.production(k[:, None], z[None, :])
        bad = np.argwhere(image > M * (1 + 1e-12))
        if len(bad):
            i, iz = bad[0]
            raise LadderNotInvariant(j, float(k[i]), float(z[iz]), float(image[i, iz]))


def level_grid(M, step):
    n = int(np.floor(M / step + 1e-9))
    return step * np.arange(n + 1)


def solve_truncated(params, ladder, step, tol=1e-6, method="howard", solver_tol=1e-12):
    """Solve the growth program on each level of ``ladder`` and compare on ``K_1``.

    ``params.k_grid`` is ignored; grids are ``0, step, 2 step, ...`` up to
    each bound. Returns ``(solution on the last level, LadderReport)``.
    """
    check_invariance(params, ladder, step)
    n1 = level_grid(ladder.bounds[0], step).size
    sols, grids, diffs = [], [], []
    prev = None
    for M in ladder.bounds:
        k = level_grid(M, step)
        dp = build_growth(GrowthParams(k, params.chain, params.beta, params.production, params.utility))
        sol = howard(dp, tol=solver_tol) if method == "howard" else vfi(dp, tol=solver_tol)
        head = sol.value[:n1]
        if prev is not None:
            diffs.append(float(np.max(np.abs(head - prev))))
        prev = head
        sols.append(sol)
        grids.append(k)
    monotone = all(b <= a + 1e-12 for a, b in zip(diffs, diffs[1:]))
    if not monotone:
        warnings.warn(f"K_1 differences are not monotone across levels: {diffs}", RuntimeWarning, stacklevel=2)
    stabilized = bool(diffs) and diffs[-1] < tol or len(ladder.bounds) == 1
    report = LadderReport(list(ladder.bounds), diffs, monotone, stabilized, sols, grids)
    if not stabilized:
        raise NotStabilized(report)
    return sols[-1], report
