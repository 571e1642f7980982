import math

import numpy as np
import pytest

from brgames.analysis import analyze
from brgames.dynamics import run_dynamics
from brgames.equilibrium import equilibrium_path, path_array, solve
from brgames.errors import DomainError, StructuralError
from brgames.game import BoxSpace, GameSchedule, GeneralGame
from brgames.metrics import (
    bound_prop2,
    bound_thm1,
    compute_metrics,
    distances,
    dynamic_regret,
    episode_regret,
    equilibrium_variation,
    function_variation,
    static_regret,
    sublinearity_fit,
    thm2_scale,
    tracking_error,
)
from brgames.presets import PRESETS, THETA1, THETA3, cournot_game


def ternary_min(f, lo, hi, iters=200):
    """Minimum of a convex scalar function on [lo, hi]."""
    for _ in range(iters):
        a, b = lo + (hi - lo) / 3, hi - (hi - lo) / 3
        if f(a) <= f(b):
            hi = b
        else:
            lo = a
    return f(0.5 * (lo + hi))


@pytest.fixture(scope="module")
def tv():
    sched = PRESETS["tv-cournot"].build(T=1000)
    traj = run_dynamics(sched, [1.0, 1.0])
    return traj, compute_metrics(traj)


def test_static_regret_against_brute_force(theta1_box):
    traj = run_dynamics(theta1_box, [2.0, 0.0], T=30)
    SR = static_regret(traj, theta1_box)
    X = traj.played
    sp = theta1_box.space
    for i in range(2):
        for t in (1, 5, 30):
            played = sum(theta1_box.cost(i, x) for x in X[:t])

            def total(y):
                return sum(theta1_box.cost(i, sp.join(np.array([y]), sp.complement(x, i), i)) for x in X[:t])

            assert SR[t - 1, i] == pytest.approx(played - ternary_min(total, 0.0, 2.0), abs=1e-9)


def test_static_regret_first_episode_is_best_response_gap(theta1_box):
    traj = run_dynamics(theta1_box, [1.0, 1.0], T=3)
    SR = static_regret(traj, theta1_box)
    gaps = episode_regret(traj, GameSchedule.constant(theta1_box, 3))
    assert SR[0] == pytest.approx(gaps[0], abs=1e-14)


def test_static_regret_quadratic_only():
    sp = BoxSpace.uniform(2, -1, 1)
    g = GeneralGame((lambda x: x[0] ** 2, lambda x: x[1] ** 2), sp)
    traj = run_dynamics(g, [0.5, 0.5], T=2)
    with pytest.raises(TypeError):
        static_regret(traj, g)


def test_equilibrium_variation_phase_one_step(tv):
    _, met = tv
    assert met.V[0] == pytest.approx(2 * (1 / 66) ** 2, abs=1e-14)
    assert met.V[1] == pytest.approx(4 * (1 / 66) ** 2, abs=1e-14)
    with pytest.raises(StructuralError):
        equilibrium_variation(np.zeros((1, 2)))


def test_function_variation_phase_one(tv):
    _, met = tv
    steps = np.diff(np.concatenate([[[0.0, 0.0]], met.W]), axis=0)
    assert np.allclose(steps[:62], 0.8, atol=1e-12)
    assert np.all(steps[63:] < 0.8)


def test_function_variation_grid_matches_corners():
    sched = PRESETS["tv-cournot"].build(T=100)
    corners = function_variation(sched, method="corners")
    grid = function_variation(sched, method="grid")
    assert np.max(np.abs(corners - grid)) <= 1e-6


def test_function_variation_constant_and_unbounded(theta1, theta1_box):
    assert np.array_equal(function_variation(GameSchedule.constant(theta1_box, 4)), np.zeros((4, 2)))
    unbounded = cournot_game(THETA1, BoxSpace.uniform(2, -math.inf, math.inf))
    with pytest.raises(DomainError):
        function_variation(GameSchedule.constant(unbounded, 3))
    with pytest.raises(ValueError):
        function_variation(PRESETS["tv-cournot"].build(T=5), method="exact")


def test_sublinearity_fit_examples():
    t = np.arange(1, 201, dtype=float)
    assert sublinearity_fit(3 * t) == pytest.approx(1.0, abs=1e-12)
    assert sublinearity_fit(np.sqrt(t)) == pytest.approx(0.5, abs=1e-12)
    assert sublinearity_fit(np.full(200, 7.0)) == pytest.approx(0.0, abs=1e-12)
    assert sublinearity_fit(t**0.25, window=(10, 50)) == pytest.approx(0.25, abs=1e-12)
    with pytest.raises(DomainError):
        sublinearity_fit(t, window=(0, 10))
    with pytest.raises(DomainError):
        sublinearity_fit(np.zeros(10))


def test_bound_prop2_theta1_box(theta1_box):
    rep = analyze(theta1_box)
    rho = 0.6 / 0.95
    expected = 0.9 + 2.0 * 1.2 * math.sqrt(2 * (rho**2 + 1)) / (1 - rho)
    assert bound_prop2(rep, theta1_box.cost(0, [1.0, 1.0])) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(11.796, abs=1e-3)
    with pytest.raises(DomainError):
        bound_prop2(analyze(cournot_game(THETA3, BoxSpace.uniform(2, 0, 2))), 1.0)
    with pytest.raises(DomainError):
        bound_prop2(analyze(cournot_game(THETA1, BoxSpace.uniform(2, -math.inf, math.inf))), 1.0)


def test_bound_thm1_examples():
    assert bound_thm1(1.0, 0.5, 0.25) == pytest.approx(3.0)
    assert bound_thm1(0.0, 0.25, 0.0) == 0.0
    assert bound_thm1(2.0, 0.0, 1.0) == pytest.approx(5.0)
    with pytest.raises(DomainError):
        bound_thm1(1.0, 1.0, 0.0)


def test_thm2_scale_formula():
    assert thm2_scale(1.0, 2.0, 0.5, 100, 0.25, 4.0) == pytest.approx(1 + 2 + 0.5 * 10 * 1.25 * 2)


def test_dynamic_regret_matches_next_action(tv):
    traj, met = tv
    sched = traj.schedule
    sp = sched.space
    for t in (1, 2, 50, 63, 64, 500, 999):
        g = sched.game(t)
        x, nxt = traj[t], traj[t + 1]
        for i in range(2):
            gap = g.cost(i, x) - g.cost(i, sp.join(sp.block(nxt, i), sp.complement(x, i), i))
            step = met.DR[t - 1, i] - (met.DR[t - 2, i] if t > 1 else 0.0)
            assert step == pytest.approx(max(gap, 0.0), abs=1e-10)


def test_dynamic_regret_below_proof_scale(tv):
    _, met = tv
    for i in range(2):
        assert met.DR[-1, i] <= met.thm2_scale[i]


def test_series_are_monotone(tv):
    _, met = tv
    for s in (met.err, met.V, met.DR[:, 0], met.DR[:, 1], met.W[:, 0], met.W[:, 1]):
        assert np.all(np.diff(s) >= 0)


def test_tracking_bound_holds_at_every_prefix(tv):
    _, met = tv
    assert np.all(met.err <= met.thm1_bound)


def test_constant_game_error_geometric_bound(theta1):
    traj = run_dynamics(theta1, [1.0, 1.0], T=50)
    xstar = solve(theta1).x
    err = tracking_error(traj, [xstar] * 51)
    rho = analyze(theta1).rho
    assert err[-1] <= np.sum((traj.x1 - xstar) ** 2) / (1 - rho**2) + 1e-12
    assert distances(traj, np.tile(xstar, (51, 1)))[0] == pytest.approx(np.linalg.norm(traj.x1 - xstar))


def test_tracking_error_rejects_short_path(theta1):
    traj = run_dynamics(theta1, [1.0, 1.0], T=5)
    with pytest.raises(StructuralError):
        tracking_error(traj, np.zeros((3, 2)))


def test_compute_metrics_constant_game(theta1_box):
    traj = run_dynamics(theta1_box, [1.0, 1.0], T=50)
    met = compute_metrics(traj)
    assert met.SR.shape == (50, 2) and met.prop2_bound is not None
    assert met.rho == pytest.approx(0.6 / 0.95)
    assert np.array_equal(met.W, np.zeros((50, 2)))
    assert met.V[-1] == 0.0
    assert set(met.exponents) >= {"Err", "DR_1", "DR_2", "SR_1", "SR_2"}


def test_compute_metrics_remark1_equilibrium_fixed():
    sched = PRESETS["remark1"].build(T=100)
    traj = run_dynamics(sched, [1.0, 1.0])
    met = compute_metrics(traj, equilibrium_path(sched))
    assert met.V[-1] <= 1e-24
    assert met.SR is None and met.W[-1, 0] > 0


def test_batched_costs_match_scalar_evaluation():
    from brgames.metrics import _costs_at

    from conftest import random_block_game

    g = random_block_game(np.random.default_rng(4), dims=(2, 1))
    pts = np.random.default_rng(5).uniform(-5, 5, size=(30, 3))
    for i in range(2):
        assert np.allclose(_costs_at(g, i, pts), [g.cost(i, x) for x in pts], rtol=1e-13, atol=1e-12)
