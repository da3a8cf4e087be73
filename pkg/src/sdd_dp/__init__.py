"""Dynamic programming with state-dependent discounting."""

from .discounting import (
    DiscountOperator,
    SpectralReport,
    build_discount_operator,
    contraction_index,
    divergence_witness,
    radius_grid,
    resolvent_sum,
    spectral_radius,
)
from .dpcore import (
    DynamicProgram,
    Solution,
    bellman_backup,
    blackwell_check,
    brute_force_oracle,
    howard,
    policy_backup,
    policy_eval_exact,
    policy_eval_iterative,
    separable_program,
    vfi,
)
from .estimators import PolicyIteration, SpectralRadiusEstimator, ValueIteration
from .markov import AR1Spec, FiniteMarkovChain, rouwenhorst, simulate, stationary_distribution, validate_chain

__version__ = "0.1.0"

__all__ = [
    "AR1Spec",
    "DiscountOperator",
    "DynamicProgram",
    "FiniteMarkovChain",
    "PolicyIteration",
    "Solution",
    "SpectralRadiusEstimator",
    "SpectralReport",
    "ValueIteration",
    "bellman_backup",
    "blackwell_check",
    "brute_force_oracle",
    "build_discount_operator",
    "contraction_index",
    "divergence_witness",
    "howard",
    "policy_backup",
    "policy_eval_exact",
    "policy_eval_iterative",
    "radius_grid",
    "resolvent_sum",
    "rouwenhorst",
    "separable_program",
    "simulate",
    "spectral_radius",
    "stationary_distribution",
    "validate_chain",
    "vfi",
]
