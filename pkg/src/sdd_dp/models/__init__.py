from .ez import EZParams, EZSolution, build_ez, solve_ez
from .growth import GrowthParams, build_growth, cobb_douglas, log_growth_closed_form
from .homogeneous import (
    HomogeneousParams,
    HomogeneousSolution,
    build_homogeneous_profile,
    grid_cross_check,
    homogeneous_grid_program,
    solve_homogeneous,
)
from .search import SearchParams, SearchSolution, build_search, solve_search
from .tax import TaxParams, build_tax
from .truncation import LadderReport, TruncationLadder, check_invariance, solve_truncated

__all__ = [
    "EZParams",
    "EZSolution",
    "GrowthParams",
    "HomogeneousParams",
    "HomogeneousSolution",
    "LadderReport",
    "SearchParams",
    "SearchSolution",
    "TaxParams",
    "TruncationLadder",
    "build_ez",
    "build_growth",
    "build_homogeneous_profile",
    "build_search",
    "build_tax",
    "check_invariance",
    "cobb_douglas",
    "grid_cross_check",
    "homogeneous_grid_program",
    "log_growth_closed_form",
    "solve_ez",
    "solve_homogeneous",
    "solve_search",
    "solve_truncated",
]
