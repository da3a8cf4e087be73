"""Seeded random instances and the vfi / howard / brute-force agreement check."""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .discounting import build_discount_operator, spectral_radius
from .dpcore import bellman_backup, brute_force_oracle, howard, policy_eval_exact, separable_program, vfi
from .exceptions import NotConvergedWarning, RadiusNotCertified
from .markov import FiniteMarkovChain


def random_chain(rng, n):
    Q = rng.dirichlet(np.ones(n), size=n)
    return FiniteMarkovChain(np.arange(n, dtype=float), Q)


def random_separable_program(
    rng, max_states=4, max_actions=3, max_shocks=3, beta_range=(0.0, 1.3), r_max=0.98, max_draws=10_000
):
    """Random small separable program whose discount weights certify ``r < r_max``.

    Actions index a small action grid, each mapped to an endogenous state, and
    every cell allows a contiguous range of at most ``max_actions`` actions.
    Draws of ``beta`` are repeated until the certified upper bound is below
    ``r_max``.
    """
    n_x = int(rng.integers(1, max_states + 1))
    n_z = int(rng.integers(1, max_shocks + 1))
    n_a = int(rng.integers(1, max_actions + 1))
    chain = random_chain(rng, n_z)
    next_state = rng.integers(0, n_x, size=n_a)
    lo = rng.integers(0, n_a, size=(n_x, n_z))
    hi = np.minimum(n_a - 1, lo + rng.integers(0, n_a, size=(n_x, n_z)))
    reward = rng.uniform(-1.0, 1.0, size=(n_x, n_z, n_a))
    for _ in range(max_draws):
        beta = rng.uniform(*beta_range, size=n_z)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            rep = spectral_radius(build_discount_operator(chain, beta), contraction=False)
        if rep.upper < r_max:
            break
    else:
        raise RuntimeError("could not draw discount factors with a certified radius below r_max")
    return separable_program(np.arange(n_x, dtype=float), chain, np.arange(n_a, dtype=float), lo, hi, reward, beta,
                             next_state=next_state, meta={"model": "random"})


def negative_control_program(rng, beta=1.05):
    """A random program whose constant discount factor forces ``r >= 1``."""
    dp = random_separable_program(rng, beta_range=(0.0, 0.5))
    return separable_program(dp.x_grid, dp.chain, dp.a_grid, dp.lo, dp.hi, dp.aggregator.reward,
                             np.full(dp.n_z, beta), next_state=dp.next_state)


@dataclass
class InstanceResult:
    index: int
    shape: list
    n_policies: int
    radius_upper: float
    contraction_index: int
    vfi_error: float
    howard_error: float
    greedy_eval_error: float
    monotone_violations: int
    tie_break_violations: int


@dataclass
class OracleReport:
    instances: int
    max_vfi_error: float
    max_howard_error: float
    max_greedy_eval_error: float
    monotone_violations: int
    tie_break_violations: int
    negative_controls: int
    expected_rejections: int
    tol: float
    passed: bool
    results: list = field(default_factory=list)

    def to_dict(self):
        return asdict(self)


def _tie_break_violations(dp, v, sigma):
    """Cells where a lower-index feasible action does at least as well as ``sigma``."""
    table = dp.aggregator.table(dp, v)
    table = np.where(dp.feasible_mask, table, -np.inf)
    chosen = np.take_along_axis(table, sigma[..., None], axis=2)
    lower = np.arange(dp.n_a)[None, None, :] < sigma[..., None]
    return int(np.sum(np.any(lower & (table >= chosen), axis=2)))


def check_instance(dp, index=0, vfi_tol=1e-12, budget=10**6, slack=1e-10):
    oracle = brute_force_oracle(dp, budget=budget)
    v_star = oracle.value
    sv = vfi(dp, tol=vfi_tol)
    sh = howard(dp)
    seq = sh.diagnostics.get("values", [])
    mono = sum(int(np.any(b < a - slack)) for a, b in zip(seq, seq[1:]))
    _, greedy = bellman_backup(dp, v_star)
    v_greedy = policy_eval_exact(dp, greedy)
    cert = dp.certificate
    return InstanceResult(
        index=index,
        shape=[dp.n_x, dp.n_z, dp.n_a],
        n_policies=dp.n_policies(),
        radius_upper=cert.upper,
        contraction_index=cert.contraction_index,
        vfi_error=float(np.max(np.abs(sv.value - v_star))),
        howard_error=float(np.max(np.abs(sh.value - v_star))),
        greedy_eval_error=float(np.max(np.abs(v_greedy - v_star))),
        monotone_violations=mono,
        tie_break_violations=_tie_break_violations(dp, v_star, greedy),
    )


def oracle_check(instances=100, seed=0, negative_controls=1, tol=1e-8, budget=10**6, threads=1, **gen_kw):
    """Run vfi, howard and the brute-force oracle on seeded random instances.

    Instances are drawn serially from ``seed`` so the set of programs does
    not depend on ``threads``; results are reported in draw order.
    """
    ss = np.random.SeedSequence(seed)
    children = ss.spawn(instances + negative_controls)
    programs = [random_separable_program(np.random.default_rng(c), **gen_kw) for c in children[:instances]]

    def run(item):
        i, dp = item
        return check_instance(dp, index=i, budget=budget)

    if threads > 1 and programs:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(run, enumerate(programs)))
    else:
        results = [run(item) for item in enumerate(programs)]

    rejected = 0
    for c in children[instances:]:
        dp = negative_control_program(np.random.default_rng(c))
        try:
            dp.certificate
        except RadiusNotCertified:
            rejected += 1

    def worst(attr):
        return max((getattr(r, attr) for r in results), default=0.0)

    mono = sum(r.monotone_violations for r in results)
    ties = sum(r.tie_break_violations for r in results)
    report = OracleReport(
        instances=instances,
        max_vfi_error=worst("vfi_error"),
        max_howard_error=worst("howard_error"),
        max_greedy_eval_error=worst("greedy_eval_error"),
        monotone_violations=mono,
        tie_break_violations=ties,
        negative_controls=negative_controls,
        expected_rejections=rejected,
        tol=tol,
        passed=False,
        results=[asdict(r) for r in results],
    )
    report.passed = bool(
        max(report.max_vfi_error, report.max_howard_error, report.max_greedy_eval_error) <= tol
        and mono == 0
        and ties == 0
        and rejected == negative_controls
    )
    return report
