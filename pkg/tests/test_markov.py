import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from sdd_dp.exceptions import InvalidChainError
from sdd_dp.markov import (
    AR1Spec,
    FiniteMarkovChain,
    NegativeEntry,
    NonIncreasingGrid,
    NonStochasticRow,
    rouwenhorst,
    simulate,
    stationary_distribution,
    validate_chain,
)


def test_degenerate_chain_is_valid():
    ch = validate_chain(FiniteMarkovChain([0.9], [[1.0]]))
    assert ch.n == 1


def test_non_stochastic_row_reported():
    with pytest.raises(InvalidChainError) as err:
        validate_chain(FiniteMarkovChain([0.0, 1.0], [[0.5, 0.4], [0.3, 0.7]]))
    (v,) = err.value.violations
    assert isinstance(v, NonStochasticRow)
    assert v.row == 0
    assert v.total == pytest.approx(0.9)


def test_every_violation_listed():
    with pytest.raises(InvalidChainError) as err:
        validate_chain(FiniteMarkovChain([1.0, 0.0], [[1.2, -0.2], [0.5, 0.6]]))
    kinds = {type(v) for v in err.value.violations}
    assert kinds == {NegativeEntry, NonStochasticRow, NonIncreasingGrid}


def test_two_state_absorbing_is_valid():
    validate_chain(FiniteMarkovChain([0.99, 1.02], [[1, 0], [0.2, 0.8]]))


def test_rows_renormalised_within_tolerance():
    ch = FiniteMarkovChain([0.0, 1.0], [[0.5, 0.5 + 5e-13], [0.3, 0.7]])
    assert np.allclose(ch.transition.sum(axis=1), 1.0, atol=1e-15)


def test_chain_is_read_only():
    ch = FiniteMarkovChain([0.0, 1.0], [[0.5, 0.5], [0.3, 0.7]])
    with pytest.raises(ValueError):
        ch.transition[0, 0] = 1.0


def test_from_dict_validates():
    with pytest.raises(InvalidChainError):
        FiniteMarkovChain.from_dict({"states": [0, 1], "transition": [[0.5, 0.6], [0.5, 0.5]]})


def test_chain_json_round_trip():
    ch = rouwenhorst(AR1Spec(mu=1.0, rho=0.5, n_states=3, sigma_beta=0.1))
    back = FiniteMarkovChain.from_dict(json.loads(json.dumps(ch.to_dict())))
    assert np.array_equal(back.states, ch.states)
    assert np.array_equal(back.transition, ch.transition)


def test_rouwenhorst_two_states():
    ch = rouwenhorst(AR1Spec(mu=1.0, rho=0.5, n_states=2, sigma_beta=0.1))
    assert np.allclose(ch.states, [0.9, 1.1])
    assert np.allclose(ch.transition, [[0.75, 0.25], [0.25, 0.75]])


def test_rouwenhorst_zero_persistence():
    ch = rouwenhorst(AR1Spec(mu=1.0, rho=0.0, n_states=2, sigma_beta=0.1))
    assert np.allclose(ch.transition, 0.5)


def test_rouwenhorst_benchmark_moments():
    ch = rouwenhorst(AR1Spec(mu=0.985, rho=0.99, n_states=50, sigma_beta=0.01))
    pi = stationary_distribution(ch).pi
    mean = pi @ ch.states
    sd = np.sqrt(pi @ (ch.states - mean) ** 2)
    assert abs(mean - 0.985) < 1e-10
    assert abs(sd - 0.01) < 1e-10


def test_ar1_sigma_conversion():
    spec = AR1Spec(mu=0.0, rho=0.6, n_states=3, sigma_eps=0.8)
    assert spec.sigma_beta == pytest.approx(1.0)
    back = AR1Spec.from_dict(spec.to_dict())
    assert back.sigma_eps == pytest.approx(spec.sigma_eps)


@pytest.mark.parametrize("kw", [{}, {"sigma_eps": 1.0, "sigma_beta": 1.0}])
def test_ar1_needs_exactly_one_sigma(kw):
    with pytest.raises(ValueError):
        AR1Spec(mu=0.0, rho=0.5, n_states=3, **kw)


def test_ar1_rejects_unit_root():
    with pytest.raises(ValueError):
        AR1Spec(mu=0.0, rho=1.0, n_states=3, sigma_beta=0.1)


@given(
    mu=st.floats(-2, 2),
    rho=st.floats(-0.95, 0.99),
    sigma=st.floats(1e-3, 1.0),
    n=st.integers(2, 25),
)
def test_rouwenhorst_matches_ar1_moments(mu, rho, sigma, n):
    ch = rouwenhorst(AR1Spec(mu=mu, rho=rho, n_states=n, sigma_beta=sigma))
    pi = stationary_distribution(ch).pi
    z = ch.states
    mean = pi @ z
    var = pi @ (z - mean) ** 2
    assert abs(mean - mu) < 1e-9
    assert abs(var - sigma**2) < 1e-9 * max(1.0, sigma**2)
    # conditional mean is linear with slope rho
    assert np.allclose(ch.transition @ z, mu + rho * (z - mu), atol=1e-9)


def test_stationary_identity_not_unique():
    st_ = stationary_distribution(FiniteMarkovChain([0.0, 1.0], np.eye(2)))
    assert not st_.unique
    assert st_.pi.sum() == pytest.approx(1.0)
    assert np.all(st_.pi >= 0)


def test_stationary_symmetric(sym2):
    st_ = stationary_distribution(sym2)
    assert st_.unique
    assert np.allclose(st_.pi, [0.5, 0.5])


def test_stationary_rouwenhorst_binomial():
    ch = rouwenhorst(AR1Spec(mu=0.0, rho=0.9, n_states=5, sigma_beta=1.0))
    pi = stationary_distribution(ch).pi
    assert np.allclose(pi, np.array([1, 4, 6, 4, 1]) / 16, atol=1e-12)
    assert np.allclose(pi @ ch.transition, pi, atol=1e-12)


def test_simulate_absorbing():
    ch = FiniteMarkovChain([0.0, 1.0], [[1, 0], [0.2, 0.8]])
    assert np.all(simulate(ch, 0, 500, seed=3) == 0)


def test_simulate_empty(sym2):
    assert simulate(sym2, 1, 0, seed=0).size == 0


def test_simulate_frequencies(sym2):
    path = simulate(sym2, 0, 10**6, seed=7)
    freq = np.bincount(path, minlength=2) / path.size
    assert np.allclose(freq, stationary_distribution(sym2).pi, atol=0.01)


def test_simulate_seeded(sym2):
    a = simulate(sym2, 0, 1000, seed=42)
    b = simulate(sym2, 0, 1000, seed=42)
    assert a[0] == 0
    assert np.array_equal(a, b)


def test_simulate_bad_start(sym2):
    with pytest.raises(IndexError):
        simulate(sym2, 2, 10, seed=0)
