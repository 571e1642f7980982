import math

import numpy as np
import pytest

from brgames.analysis import Verdict, analyze
from brgames.equilibrium import (
    DIRECT,
    EQ_TOL,
    FIXED_POINT,
    PSEUDO_GRADIENT,
    equilibrium_path,
    equilibrium_residual,
    path_array,
    solve,
    solve_direct,
    solve_projected_fixed_point,
    solve_projected_pseudo_gradient,
)
from brgames.errors import InfeasibleInteriorError, NotContractiveError, SingularGameError, SolverError
from brgames.game import BoxSpace, QuadraticGame
from brgames.presets import PRESETS, THETA1, THETA2, THETA3, cournot_game

from conftest import random_block_game, random_scalar_game


def test_direct_examples(theta1):
    res = solve_direct(theta1)
    assert res.x == pytest.approx([7.2 / 13, 14 / 13], abs=1e-14)
    assert res.method == DIRECT and res.residual <= EQ_TOL
    assert solve_direct(PRESETS["theta2"].build()).x == pytest.approx([0.2, 1.0], abs=1e-14)
    assert solve_direct(PRESETS["theta3"].build()).x == pytest.approx([-2 / 15, 2 / 3], abs=1e-14)


def test_direct_rejects_boundary_and_singular(theta3_box):
    with pytest.raises(InfeasibleInteriorError):
        solve_direct(theta3_box)
    g = QuadraticGame.scalar((1.0, 1.0), (1.0, 1.0), (1.0, 0.0), BoxSpace.uniform(2, -1, 1))
    with pytest.raises(SingularGameError):
        solve_direct(g)


def test_boundary_equilibrium(theta3_box):
    res = solve(theta3_box)
    assert res.method == PSEUDO_GRADIENT
    assert res.x == pytest.approx([0.0, 0.8], abs=1e-9)
    assert res.residual <= EQ_TOL


def test_residual_examples(theta1):
    xstar = solve(theta1).x
    assert equilibrium_residual(theta1, xstar) <= 1e-14
    # max over agents of the per-agent natural-map norm: max(1.2, 0.8)
    assert equilibrium_residual(theta1, [0.0, 0.0]) == pytest.approx(1.2, abs=1e-12)
    assert equilibrium_residual(theta1, [1.0, 1.0]) == pytest.approx(0.4, abs=1e-12)
    box = cournot_game(THETA3, BoxSpace.uniform(2, 0, 2))
    assert equilibrium_residual(box, [0.0, 0.8]) <= 1e-15


def test_fixed_point_refuses_non_contractive(theta2_box):
    with pytest.raises(NotContractiveError):
        solve_projected_fixed_point(theta2_box)
    with pytest.raises(NotContractiveError):
        solve_projected_fixed_point(PRESETS["theta3"].build())


def test_fixed_point_and_pseudo_gradient_on_theta1(theta1_box):
    fp = solve_projected_fixed_point(theta1_box)
    pg = solve_projected_pseudo_gradient(theta1_box)
    assert fp.method == FIXED_POINT and pg.method == PSEUDO_GRADIENT
    assert fp.x == pytest.approx([7.2 / 13, 14 / 13], abs=1e-10)
    assert pg.x == pytest.approx(fp.x, abs=1e-10)
    assert fp.iterations > 0 and pg.iterations > 0


def test_solvers_agree_on_random_games():
    rng = np.random.default_rng(31)
    count = 0
    while count < 50:
        g = random_scalar_game(rng, int(rng.integers(2, 5)), lo=-100, hi=100, max_rho=0.95)
        if analyze(g).verdict is not Verdict.CONTRACTIVE:
            continue
        xs = [solve_direct(g).x, solve_projected_fixed_point(g).x, solve_projected_pseudo_gradient(g).x]
        for a in xs:
            for b in xs:
                assert np.max(np.abs(a - b)) <= 1e-8
        count += 1


def test_block_games_with_active_constraints():
    rng = np.random.default_rng(17)
    for _ in range(10):
        g = random_block_game(rng, dims=(2, 2), lo=-0.2, hi=0.2)
        a = solve_projected_fixed_point(g).x
        b = solve_projected_pseudo_gradient(g).x
        assert np.max(np.abs(a - b)) <= 1e-8
        assert equilibrium_residual(g, a) <= EQ_TOL


def test_uniqueness_from_many_starts(theta3_box):
    rng = np.random.default_rng(0)
    ref = solve(theta3_box).x
    for x0 in rng.uniform(0, 2, size=(10, 2)):
        assert solve_projected_pseudo_gradient(theta3_box, x0=x0).x == pytest.approx(ref, abs=1e-9)


def test_non_monotone_game_fails():
    g = QuadraticGame.scalar((1.0, 1.0), (1.0, 1.0), (1.0, 0.0), BoxSpace.uniform(2, -1, 1))
    with pytest.raises(SolverError):
        solve(g)


def test_tv_path_values():
    sched = PRESETS["tv-cournot"].build(T=1000)
    path = equilibrium_path(sched, T=20)
    assert len(path) == 21
    P = path_array(path)
    assert P[0] == pytest.approx([2 / 11, 2 / 11], abs=1e-12)
    assert P[1] == pytest.approx([1 / 6, 1 / 6], abs=1e-12)
    assert P[9] == pytest.approx([1 / 6, 1 / 6], abs=1e-12)


def test_warm_and_cold_paths_match():
    sched = PRESETS["tv-cournot"].build(T=120)
    warm = path_array(equilibrium_path(sched, warm_start=True))
    cold = path_array(equilibrium_path(sched, warm_start=False))
    assert warm.shape == (121, 2)
    assert np.max(np.abs(warm - cold)) <= 1e-10


def test_constant_path_reuses_solution(theta1):
    from brgames.game import GameSchedule

    path = equilibrium_path(GameSchedule.constant(theta1, 5))
    assert len(path) == 6 and all(np.array_equal(r.x, path[0].x) for r in path)


def test_remark1_equilibrium_is_fixed():
    P = path_array(equilibrium_path(PRESETS["remark1"].build(T=50)))
    assert np.max(np.abs(P - 0.4)) <= 1e-12
