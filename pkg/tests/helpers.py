import numpy as np

from sdd_dp.markov import FiniteMarkovChain


def two_state(beta_l, beta_h, p):
    """Chain where the high state persists with probability p and the low state is absorbing."""
    Q = np.array([[1.0, 0.0], [1.0 - p, p]])
    return FiniteMarkovChain(np.array([beta_l, beta_h]), Q)


def iid_chain(pi):
    pi = np.asarray(pi, dtype=float)
    return FiniteMarkovChain(np.arange(pi.size, dtype=float), np.tile(pi, (pi.size, 1)))


def constant_program(reward, beta, n_z=1):
    """One endogenous state, actions with the given rewards, constant discount."""
    from sdd_dp.dpcore import separable_program

    reward = np.asarray(reward, dtype=float)
    Q = np.full((n_z, n_z), 1.0 / n_z)
    ch = FiniteMarkovChain(np.arange(n_z, dtype=float), Q)
    r = np.broadcast_to(reward[None, None, :], (1, n_z, reward.size))
    return separable_program(
        [0.0], ch, np.arange(reward.size, dtype=float), 0, reward.size - 1, r, np.full(n_z, beta),
        next_state=np.zeros(reward.size, dtype=int),
    )


def random_program(seed, n_x=4, n_z=3, n_a=3, beta_max=1.3, r_max=0.98):
    """Random separable program with actions choosing next-period states and certified r < r_max."""
    from sdd_dp.discounting import build_discount_operator, spectral_radius
    from sdd_dp.dpcore import separable_program

    rng = np.random.default_rng(seed)
    Q = rng.dirichlet(np.ones(n_z), size=n_z)
    ch = FiniteMarkovChain(np.arange(n_z, dtype=float), Q)
    while True:
        beta = rng.uniform(0.0, beta_max, n_z)
        rep = spectral_radius(build_discount_operator(ch, beta), contraction=False)
        if rep.upper < r_max:
            break
    reward = rng.uniform(-1, 1, size=(n_x, n_z, n_a))
    next_state = rng.integers(0, n_x, size=n_a)
    return separable_program(
        np.arange(n_x, dtype=float), ch, np.arange(n_a, dtype=float), 0, n_a - 1, reward, beta, next_state=next_state
    )
