import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sdd_dp.markov import FiniteMarkovChain

settings.register_profile(
    "repo",
    deadline=None,
    derandomize=True,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sym2():
    return FiniteMarkovChain(np.array([0.0, 1.0]), np.array([[0.75, 0.25], [0.25, 0.75]]))
