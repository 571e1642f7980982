import numpy as np
import pytest

from brgames.analysis import analyze
from brgames.game import BoxSpace, QuadraticGame
from brgames.presets import THETA1, THETA2, THETA3, cournot_game


@pytest.fixture
def box02():
    return BoxSpace.uniform(2, 0.0, 2.0)


@pytest.fixture
def theta1():
    return cournot_game(THETA1, BoxSpace.uniform(2, -10.0, 10.0))


@pytest.fixture
def theta1_box(box02):
    return cournot_game(THETA1, box02)


@pytest.fixture
def theta2_box(box02):
    return cournot_game(THETA2, box02)


@pytest.fixture
def theta3_box(box02):
    return cournot_game(THETA3, box02)


def random_scalar_game(rng, n_agents=2, lo=-3.0, hi=3.0, max_rho=None):
    """Scalar-agent quadratic game; couplings rescaled below ``max_rho`` when given."""
    a = rng.uniform(0.5, 2.0, n_agents)
    b = [rng.uniform(-1.5, 1.5, n_agents - 1) for _ in range(n_agents)]
    e = rng.uniform(-1.0, 1.0, n_agents)
    space = BoxSpace.uniform(n_agents, lo, hi)
    game = QuadraticGame.scalar(a, b, e, space)
    if max_rho is not None:
        rep = analyze(game)
        while rep.m <= 0 or rep.rho >= max_rho:
            b = [0.7 * bi for bi in b]
            game = QuadraticGame.scalar(a, b, e, space)
            rep = analyze(game)
    return game


def random_block_game(rng, dims=(2, 2), lo=-5.0, hi=5.0, max_rho=0.9):
    """Vector-block game with dense SPD curvature and contraction factor below ``max_rho``."""
    n = sum(dims)
    A, B, e = [], [], []
    for d in dims:
        M = rng.normal(size=(d, d))
        A.append(M @ M.T + d * np.eye(d))
        B.append(rng.normal(size=(d, n - d)))
        e.append(rng.uniform(-1, 1, d))
    space = BoxSpace(dims, np.full(n, lo), np.full(n, hi))
    game = QuadraticGame(tuple(A), tuple(B), tuple(e), (0.0,) * len(dims), space)
    rep = analyze(game)
    while rep.m <= 0 or rep.rho >= max_rho:
        B = [0.7 * b for b in B]
        game = QuadraticGame(tuple(A), tuple(B), tuple(e), (0.0,) * len(dims), space)
        rep = analyze(game)
    return game
