"""Acceptance suite: one check per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s`` or ``python3 tests/test_acceptance.py``.
Every check returns an ``Outcome`` whose ``artifact`` holds the numbers it
produced; criterion 13 re-runs the others at several thread counts and
compares those artifacts byte for byte.
"""

import json
import time
import warnings
from dataclasses import dataclass, field

import numpy as np
import pytest
import scipy.optimize
from threadpoolctl import threadpool_limits

from sdd_dp.discounting import (
    build_discount_operator,
    contraction_index,
    divergence_witness,
    radius_grid,
    spectral_radius,
    truncated_resolvent,
)
from sdd_dp.dpcore import (
    DynamicProgram,
    SeparableAggregator,
    blackwell_check,
    brute_force_oracle,
    howard,
    iterate_bellman,
    separable_program,
)
from sdd_dp.exceptions import LadderNotInvariant, NotConvergedWarning, RadiusNotCertified
from sdd_dp.experiments import oracle_check, random_separable_program
from sdd_dp.markov import AR1Spec, FiniteMarkovChain, rouwenhorst
from sdd_dp.models import (
    EZParams,
    GrowthParams,
    HomogeneousParams,
    SearchParams,
    TaxParams,
    TruncationLadder,
    build_ez,
    build_growth,
    build_homogeneous_profile,
    build_search,
    build_tax,
    check_invariance,
    cobb_douglas,
    grid_cross_check,
    homogeneous_grid_program,
    solve_ez,
    solve_homogeneous,
    solve_search,
    solve_truncated,
)
from sdd_dp.models.utility import crra, log_utility


@dataclass
class Outcome:
    passed: bool
    detail: str
    artifact: dict = field(default_factory=dict)


def _f(x):
    return float(x)


def _chain(Q, states=None):
    Q = np.asarray(Q, dtype=float)
    return FiniteMarkovChain(np.arange(len(Q), dtype=float) if states is None else states, Q)


# ---- 1 ----------------------------------------------------------------------


def ac01_benchmark(threads=1):
    with threadpool_limits(limits=1):
        t0 = time.perf_counter()
        ch = rouwenhorst(AR1Spec(mu=0.985, rho=0.99, n_states=50, sigma_beta=0.01))
        rep = spectral_radius(build_discount_operator(ch, ch.states))
        elapsed = time.perf_counter() - t0
    ok = abs(rep.radius - 0.995) <= 0.002 and elapsed < 1.0
    return Outcome(ok, f"r = {rep.radius:.10f} (target 0.995 +/- 0.002), {elapsed:.3f} s",
                   {"radius": rep.radius, "lower": rep.lower, "upper": rep.upper})


# ---- 2 ----------------------------------------------------------------------


def ac02_two_state(threads=1):
    rng = np.random.default_rng(2)
    worst, mismatches, radii = 0.0, 0, []
    for _ in range(20):
        bl = rng.uniform(0.3, 0.99)
        bh = rng.uniform(0.5, 1.6)
        p = rng.uniform(0.0, 1.0)
        op = build_discount_operator(_chain([[1.0, 0.0], [1.0 - p, p]]), [bl, bh])
        rep = spectral_radius(op, tol=1e-10)
        worst = max(worst, abs(rep.radius - max(bl, p * bh)))
        finite = rep.contraction_index is not None
        mismatches += finite != (p * bh < 1.0)
        radii.append(rep.radius)
    ok = worst <= 1e-8 and mismatches == 0
    return Outcome(ok, f"max |r - max(bl, p bh)| = {worst:.2e}, index/criterion mismatches = {mismatches}",
                   {"radii": radii})


# ---- 3 ----------------------------------------------------------------------


def ac03_iid(threads=1):
    rng = np.random.default_rng(3)
    worst_iid, worst_const, radii = 0.0, 0.0, []
    for _ in range(20):
        n = int(rng.integers(2, 9))
        pi = rng.dirichlet(np.ones(n))
        beta = rng.uniform(0.0, 1.5, n)
        rep = spectral_radius(build_discount_operator(_chain(np.tile(pi, (n, 1))), beta), tol=1e-10)
        worst_iid = max(worst_iid, abs(rep.radius - pi @ beta))
        radii.append(rep.radius)
    for _ in range(20):
        n = int(rng.integers(1, 9))
        Q = rng.dirichlet(np.ones(n), size=n)
        b = rng.uniform(0.0, 1.5)
        rep = spectral_radius(build_discount_operator(_chain(Q), np.full(n, b)), tol=1e-10)
        worst_const = max(worst_const, abs(rep.radius - b))
        radii.append(rep.radius)
    ok = worst_iid <= 1e-8 and worst_const <= 1e-10
    return Outcome(ok, f"iid max err {worst_iid:.2e} (tol 1e-8), constant-beta max err {worst_const:.2e} (tol 1e-10)",
                   {"radii": radii})


# ---- 4 ----------------------------------------------------------------------


def ac04_monotone(threads=1):
    rho = np.linspace(0.9, 0.99, 10)
    sigma = np.linspace(0.001, 0.01, 10)
    g = radius_grid(0.985, rho, sigma, 50, tol=1e-10, threads=threads)
    rows = int(np.sum(np.diff(g.radius, axis=1) < 0))  # sigma increasing, rho fixed
    cols = int(np.sum(np.diff(g.radius, axis=0) < 0))  # rho increasing, sigma fixed
    missing = int(np.sum(np.isnan(g.radius)))
    ok = rows == 0 and cols == 0 and missing == 0
    return Outcome(ok, f"violations along sigma {rows}, along rho {cols}, unconverged cells {missing}",
                   {"csv": g.to_csv()})


# ---- 5 ----------------------------------------------------------------------


def ac05_oracle(threads=1):
    t0 = time.perf_counter()
    rep = oracle_check(instances=100, seed=0, negative_controls=1, threads=threads)
    elapsed = time.perf_counter() - t0
    ok = (
        rep.max_vfi_error <= 1e-8
        and rep.max_howard_error <= 1e-8
        and rep.max_greedy_eval_error <= 1e-8
        and rep.monotone_violations == 0
        and elapsed < 60
    )
    detail = (f"vfi {rep.max_vfi_error:.2e}, howard {rep.max_howard_error:.2e}, greedy eval "
              f"{rep.max_greedy_eval_error:.2e}, monotone violations {rep.monotone_violations}, {elapsed:.1f} s")
    return Outcome(ok, detail, rep.to_dict())


# ---- 6 ----------------------------------------------------------------------


def ac06_eventual_contraction(threads=1):
    worst_gap, count, seed, ratios = -np.inf, 0, 0, []
    while count < 20:
        seed += 1
        rng = np.random.default_rng(1000 + seed)
        dp = random_separable_program(rng, beta_range=(0.0, 1.3))
        if dp.discount_weights.max() <= 1.0:
            continue
        count += 1
        rep = dp.certificate
        n = rep.contraction_index
        bound = rep.contraction_modulus
        for _ in range(10):
            v, w = rng.normal(0.0, 5.0, size=(2, dp.n_x, dp.n_z))
            ratio = np.max(np.abs(iterate_bellman(dp, v, n) - iterate_bellman(dp, w, n))) / np.max(np.abs(v - w))
            worst_gap = max(worst_gap, ratio - bound)
            ratios.append(float(ratio))
    ok = worst_gap <= 1e-10
    return Outcome(ok, f"20 instances with beta_max > 1, max(ratio - ||L^n 1||) = {worst_gap:.2e}",
                   {"ratios": ratios})


# ---- 7 ----------------------------------------------------------------------


def ac07_necessity(threads=1):
    rng = np.random.default_rng(7)
    div, bnd, hits, bounded_all, horizons = 0, 0, True, True, []
    while div < 10 or bnd < 10:
        n = int(rng.integers(2, 5))
        ch = _chain(rng.dirichlet(np.ones(n), size=n))
        op = build_discount_operator(ch, rng.uniform(0.0, 1.5, n))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NotConvergedWarning)
            rep = spectral_radius(op, contraction=False)
        if rep.lower >= 1.01 and div < 10:
            div += 1
            w = divergence_witness(op, (1.0, 1.0), 1e6, 10**5, report=rep)
            hits &= all(h is not None for h in w.hits)
            horizons.append(max((h for h in w.hits if h is not None), default=-1))
        elif rep.upper <= 0.99 and bnd < 10:
            bnd += 1
            b = float(rng.uniform(1.0, 2.0))
            w = divergence_witness(op, (0.5 * b, b), np.inf, 10**4, report=rep)
            bounded_all &= bool(w.bounded)
    ok = hits and bounded_all
    return Outcome(ok, f"r >= 1.01: all states exceed 1e6 (max horizon {max(horizons)}): {hits}; "
                       f"r <= 0.99: partial sums within b ||K|| up to t = 1e4: {bounded_all}",
                   {"horizons": horizons})


# ---- 8 ----------------------------------------------------------------------


def ac08_search(threads=1):
    iid = _chain([[0.5, 0.5], [0.5, 0.5]])
    sol = solve_search(SearchParams([0.5, 2.0], 0.6, iid, 0.9))
    oracle = brute_force_oracle(sol.dp)
    err = float(np.max(np.abs(sol.value - oracle.value[0])))
    k_err = float(np.max(np.abs(sol.K - truncated_resolvent(sol.dp.discount_operator, 200))))
    persist = _chain([[0.8, 0.2], [0.3, 0.7]])
    accept_all = solve_search(SearchParams(1.5, 0.0, persist, [0.9, 0.97]))
    reject_all = solve_search(SearchParams(0.0, 0.5, persist, [0.9, 0.97]))
    ok = (
        oracle.diagnostics["n_policies"] == 4
        and err <= 1e-8
        and k_err <= 1e-6
        and accept_all.accept.all()
        and not reject_all.accept.any()
    )
    detail = (f"|search - oracle| = {err:.2e}, |K - series| = {k_err:.2e}, c=0 accepts all: "
              f"{bool(accept_all.accept.all())}, w=0 rejects all: {bool(not reject_all.accept.any())}")
    return Outcome(ok, detail, {"value": sol.value.tolist(), "K": sol.K.tolist()})


# ---- 9 ----------------------------------------------------------------------


def ac09_ez(threads=1):
    ch = _chain([[0.9, 0.1], [0.2, 0.8]])
    x = np.linspace(0, 1, 21)
    p1 = EZParams(x, ch, [0.9, 0.95], [1.0, 1.2], [5.0, 6.0], 0.5, 0.5)
    ez = solve_ez(p1, tol=1e-12)
    dp = ez.dp
    reward = np.where(dp.feasible_mask, np.maximum(dp.aggregator.consumption, p1.eps) ** 0.5, -np.inf)
    sep = howard(separable_program(x, ch, x, 0, dp.hi, reward, p1.beta))
    collapse = float(np.max(np.abs(ez.solution.value - sep.value)))

    beta, rho_pref, gamma = 0.9, 0.2, 0.6
    p2 = EZParams(np.array([1.0]), _chain([[1.0]], [1.0]), beta, 1.0, 3.0, rho_pref, gamma)
    theta = p2.theta
    scalar = solve_ez(p2, tol=1e-13).solution.value[0, 0]
    root = scipy.optimize.bisect(lambda v: (1.0 + beta * v ** (1.0 / theta)) ** theta - v, 1.0, 1e3, xtol=1e-14)
    scalar_err = abs(scalar - root)

    dp3 = build_ez(EZParams(x, ch, [0.95, 1.02], [1.0, 1.2], [5.0, 6.0], 0.3, 0.6))
    lip = [v for v in blackwell_check(dp3, trials=1000, seed=9) if v.kind == "lipschitz"]
    ok = collapse <= 1e-8 and scalar_err <= 1e-8 and not lip
    return Outcome(ok, f"theta=1 collapse {collapse:.2e}, scalar fixed point {scalar_err:.2e}, "
                       f"Lipschitz violations {len(lip)} / 1000",
                   {"collapse": ez.solution.value.tolist(), "scalar": scalar})


# ---- 10 ----------------------------------------------------------------------

HOM_STEPS = 35  # grid ratio q = 2**(1/35), so lambda = 2 is grid-aligned
HOM_SKIP = 300  # rows inside the low-end boundary layer are not compared


def ac10_homogeneous(threads=1):
    ch = _chain([[0.8, 0.2], [0.3, 0.7]])
    params = HomogeneousParams(0.5, np.array([1.08, 1.06]), np.array([0.9, 0.93]), ch, np.linspace(0, 1, 1001))
    hsol = solve_homogeneous(params)
    x = np.concatenate([[0.0], 2.0 ** (np.arange(-600, 101) / HOM_STEPS)])
    grid = howard(homogeneous_grid_program(params, x))
    cc = grid_cross_check(hsol, params, x, grid, skip=HOM_SKIP, shift=HOM_STEPS)
    cc1 = grid_cross_check(hsol, params, x, grid, skip=HOM_SKIP, shift=1)
    steps = float(cc.policy_steps.max())
    hom = float(max(cc.homogeneity_error.max(), cc1.homogeneity_error.max()))
    bad = HomogeneousParams(0.5, np.array([1.3, 1.3]), np.array([0.9, 0.9]), ch, np.linspace(0, 1, 11))
    try:
        solve_homogeneous(bad)
        refused = False
    except RadiusNotCertified:
        refused = True
    ok = steps <= 2.0 and hom <= 1e-6 and refused
    return Outcome(ok, f"policy gap {steps:.3f} grid steps (<= 2), homogeneity error {hom:.2e} at lambda = 2 "
                       f"and q (<= 1e-6), value rel. error {cc.value_rel_error.max():.1e}, "
                       f"r(L_R) >= 1 refused: {refused}",
                   {"w": hsol.w.tolist(), "grid_value": grid.value[::50].tolist()})


# ---- 11 ----------------------------------------------------------------------


def shipped_programs():
    ch = _chain([[0.8, 0.2], [0.3, 0.7]], np.array([1.0, 2.0]))
    hp = HomogeneousParams(0.5, np.array([1.08, 1.06]), np.array([0.9, 0.93]), ch, np.linspace(0, 1, 51))
    return {
        "growth": build_growth(GrowthParams(np.linspace(0, 2, 30), ch, [0.9, 1.02], cobb_douglas(0.36), log_utility())),
        "search": build_search(SearchParams([0.5, 2.0], 0.6, ch, [0.9, 0.97])),
        "tax": build_tax(TaxParams(np.linspace(0, 3, 31), ch, [0.95, 1.01], [1.02, 1.0], [1.0, 1.1], [0.3, 0.2],
                                   crra(2.0))),
        "ez": build_ez(EZParams(np.linspace(0, 1, 21), ch, [0.95, 1.02], [1.0, 1.2], [5.0, 6.0], 0.3, 0.6)),
        "homogeneous": build_homogeneous_profile(hp),
        "homogeneous-grid": homogeneous_grid_program(hp, np.concatenate([[0.0], 1.1 ** np.arange(-20, 5)])),
        "truncated-level": build_growth(GrowthParams(np.arange(0, 41) * 0.1, ch, [0.9, 0.95],
                                                     lambda k, z: z * np.sqrt(k), log_utility())),
    }


def ac11_blackwell(threads=1):
    counts = {name: len(blackwell_check(dp, trials=1000, seed=11)) for name, dp in shipped_programs().items()}
    base = shipped_programs()["growth"]
    agg = base.aggregator
    inflated = SeparableAggregator(agg.reward, base.discount_weights + 0.1, agg.Q)
    control = DynamicProgram(base.x_grid, base.chain, base.a_grid, base.lo, base.hi, inflated, base.discount_weights)
    detected = len(blackwell_check(control, trials=1000, seed=11))
    ok = all(c == 0 for c in counts.values()) and detected > 0
    return Outcome(ok, f"violations per builder {counts}; negative control flagged {detected} times",
                   {"counts": counts, "control": detected})


# ---- 12 ----------------------------------------------------------------------


def ac12_truncation(threads=1):
    ch = _chain([[0.8, 0.2], [0.3, 0.7]], np.array([1.0, 2.0]))
    params = GrowthParams(None, ch, np.array([0.9, 0.95]), lambda k, z: z * np.sqrt(k), log_utility())
    _, rep = solve_truncated(params, TruncationLadder.geometric(4.0, 4), 0.1, tol=1e-6)
    try:
        check_invariance(params, TruncationLadder([1.0, 2.0]), 0.1)
        caught = False
    except LadderNotInvariant:
        caught = True
    ok = rep.differences[-1] < 1e-6 and caught
    return Outcome(ok, f"K_1 differences {['%.1e' % d for d in rep.differences]}, non-invariant control detected: {caught}",
                   rep.to_dict())


CRITERIA = [
    ("AC01 benchmark radius", ac01_benchmark),
    ("AC02 two-state closed form", ac02_two_state),
    ("AC03 iid identity", ac03_iid),
    ("AC04 radius grid monotonicity", ac04_monotone),
    ("AC05 oracle equivalence", ac05_oracle),
    ("AC06 eventual contraction modulus", ac06_eventual_contraction),
    ("AC07 necessity", ac07_necessity),
    ("AC08 job search", ac08_search),
    ("AC09 Epstein-Zin", ac09_ez),
    ("AC10 homogeneous reduction", ac10_homogeneous),
    ("AC11 Blackwell checker", ac11_blackwell),
    ("AC12 truncation ladder", ac12_truncation),
]


# ---- 13 ----------------------------------------------------------------------


def _artifact_bytes(fn, threads):
    with threadpool_limits(limits=threads):
        out = fn(threads=threads)
    return json.dumps(out.artifact, sort_keys=True, default=_f).encode()


def ac13_determinism(threads=1):
    differing = []
    for name, fn in CRITERIA:
        blobs = {t: _artifact_bytes(fn, t) for t in (1, 2, 8)}
        if not blobs[1] == blobs[2] == blobs[8]:
            differing.append(name.split()[0])
    ok = not differing
    return Outcome(ok, f"artifacts of criteria 1-12 identical at 1, 2 and 8 threads; differing: {differing or 'none'}")


ALL = CRITERIA + [("AC13 determinism", ac13_determinism)]


def _report(name, outcome):
    return f"{'PASS' if outcome.passed else 'FAIL'} {name}: {outcome.detail}"


@pytest.mark.parametrize("name,fn", ALL, ids=[n.split()[0] for n, _ in ALL])
def test_acceptance(name, fn, capsys):
    outcome = fn()
    with capsys.disabled():
        print("\n" + _report(name, outcome))
    assert outcome.passed, outcome.detail


if __name__ == "__main__":
    results = [(name, fn()) for name, fn in ALL]
    for name, outcome in results:
        print(_report(name, outcome))
    raise SystemExit(0 if all(o.passed for _, o in results) else 1)
