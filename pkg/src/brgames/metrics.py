"""Regret, tracking error, variation measures and the matching upper bounds.

All series are cumulative and indexed by episode: entry ``t - 1`` holds the
value after episodes ``1..t``.  Per-agent series have shape ``(T, N)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .analysis import AnalysisReport, Verdict, analyze, analyze_schedule
from .dynamics import Trajectory, best_response
from .equilibrium import EquilibriumResult, equilibrium_path, path_array
from .errors import DomainError, StructuralError
from .game import GameSchedule, QuadraticGame

GRID_RESOLUTION = 101
GRID_MAX_DIM = 3


def static_regret(traj: Trajectory, game: QuadraticGame) -> np.ndarray:
    """``SR_i(t)``: played cost minus the best fixed action in hindsight.

    For a quadratic cost the summed hindsight objective over ``t`` episodes
    is ``t`` times the cost against the average opponent action (plus a
    constant), so its minimiser is the best response to that average.
    """
    if not isinstance(game, QuadraticGame):
        raise TypeError("static regret is implemented for quadratic games")
    sp = game.space
    X = traj.played
    T, N = X.shape[0], sp.n_agents
    out = np.empty((T, N))
    for i in range(N):
        s = sp.slice(i)
        others = np.delete(X, np.arange(s.start, s.stop), axis=1)
        played = np.cumsum([game.cost(i, x) for x in X])
        opp_sum = np.cumsum(others, axis=0)
        A, B, e, c = game.A[i], game.B[i], game.e[i], game.c[i]
        for t in range(T):
            n = t + 1
            y = best_response(game, i, opp_sum[t] / n)
            hindsight = n * (0.5 * y @ A @ y - e @ y + c) + y @ B @ opp_sum[t]
            out[t, i] = played[t] - hindsight
    return out


def episode_regret(traj: Trajectory, schedule: GameSchedule) -> np.ndarray:
    """Per-episode gaps ``C_{i,t}(x_t) - min_y C_{i,t}(y, x_{-i,t})``, shape ``(T, N)``.

    The minimum is recomputed with an independent best-response call rather
    than read off the trajectory's next action.
    """
    sp = schedule.space
    T = traj.horizon
    gaps = np.empty((T, sp.n_agents))
    for t in range(1, T + 1):
        game = schedule.game(t)
        x = traj[t]
        for i in range(sp.n_agents):
            xo = sp.complement(x, i)
            best = game.cost(i, sp.join(best_response(game, i, xo), xo, i))
            gaps[t - 1, i] = game.cost(i, x) - best
    # the minimum is exact; negative gaps are rounding only
    return np.maximum(gaps, 0.0)


def dynamic_regret(traj: Trajectory, schedule: GameSchedule) -> np.ndarray:
    return np.cumsum(episode_regret(traj, schedule), axis=0)


def tracking_error(traj: Trajectory, eq_path) -> np.ndarray:
    """``Err(t) = sum_{s<=t} |x_s - x*_s|^2``."""
    X = traj.played
    P = path_array(eq_path)
    if P.shape[0] < X.shape[0] or P.shape[1:] != X.shape[1:]:
        raise StructuralError(f"equilibrium path of shape {P.shape} does not cover trajectory of shape {X.shape}")
    return np.cumsum(np.sum((X - P[: X.shape[0]]) ** 2, axis=1))


def distances(traj: Trajectory, eq_path) -> np.ndarray:
    """``|x_t - x*_t|`` for the played actions."""
    X = traj.played
    P = path_array(eq_path)[: X.shape[0]]
    return np.linalg.norm(X - P, axis=1)


def equilibrium_variation(eq_path) -> np.ndarray:
    """``V(t) = sum_{s<=t} |x*_s - x*_{s+1}|^2``; needs ``T + 1`` equilibria for ``T`` entries."""
    P = path_array(eq_path)
    if P.shape[0] < 2:
        raise StructuralError("equilibrium variation needs at least two equilibria")
    return np.cumsum(np.sum(np.diff(P, axis=0) ** 2, axis=1))


def _multiaffine_difference(g0, g1) -> bool:
    return (
        isinstance(g0, QuadraticGame)
        and isinstance(g1, QuadraticGame)
        and all(np.array_equal(a0, a1) for a0, a1 in zip(g0.A, g1.A))
    )


def _costs_at(game, i: int, pts: np.ndarray) -> np.ndarray:
    """``C_i`` at each row of ``pts``; batched for quadratic games."""
    if not isinstance(game, QuadraticGame):
        return np.array([game.cost(i, x) for x in pts])
    s = game.space.slice(i)
    own = pts[:, s]
    others = np.delete(pts, np.arange(s.start, s.stop), axis=1)
    quad = 0.5 * np.einsum("kr,rs,ks->k", own, game.A[i], own)
    return quad + np.einsum("kr,rs,ks->k", own, game.B[i], others) - own @ game.e[i] + game.c[i]


def _grid(space, resolution: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, resolution) for lo, hi in zip(space.lower, space.upper)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, space.size)


def function_variation(schedule: GameSchedule, method: str = "auto", resolution: int = GRID_RESOLUTION, T: Optional[int] = None) -> np.ndarray:
    """``W_i(t) = sum_{s<=t} sup_x |C_{i,s}(x) - C_{i,s+1}(x)|``.

    With equal curvature blocks the cost difference of two quadratic games
    is affine in each coordinate separately, so its extremes sit at box
    corners (``method="corners"``).  Otherwise the sup is taken over a grid
    with ``resolution`` points per axis (``method="grid"``), which includes
    the corners.
    """
    sp = schedule.space
    if not sp.is_bounded:
        raise DomainError("function variation needs a bounded box")
    if method not in ("auto", "corners", "grid"):
        raise ValueError(f"unknown method {method!r}")
    T = schedule.horizon if T is None else T
    N = sp.n_agents
    steps = np.zeros((T, N))
    if schedule.is_constant:
        return steps
    corners = sp.corners()
    grid = None
    g_next = schedule.game(1)
    for t in range(1, T + 1):
        g0, g_next = g_next, schedule.game(t + 1)
        exact = _multiaffine_difference(g0, g_next)
        use = method if method != "auto" else ("corners" if exact else "grid")
        if use == "corners":
            if not exact:
                raise DomainError(f"episode {t}: cost difference is not multiaffine; use the grid method")
            pts = corners
        else:
            if sp.size > GRID_MAX_DIM:
                raise DomainError(f"grid method supports at most {GRID_MAX_DIM} joint dimensions")
            if grid is None:
                grid = _grid(sp, resolution)
            pts = grid
        for i in range(N):
            steps[t - 1, i] = float(np.max(np.abs(_costs_at(g0, i, pts) - _costs_at(g_next, i, pts))))
    return np.cumsum(steps, axis=0)


def bound_prop2(report: AnalysisReport, c1_i: float) -> float:
    """Constant-game static-regret ceiling ``C_i(x_1) + D L0 sqrt(2(rho^2 + 1)) / (1 - rho)``."""
    if report.verdict is not Verdict.CONTRACTIVE or not report.rho < 1:
        raise DomainError(f"regret bound needs rho < 1, got rho={report.rho:.6g}")
    if report.D is None or report.L0 is None or not math.isfinite(report.D):
        raise DomainError("regret bound needs a bounded box (finite D and L0)")
    rho = report.rho
    return c1_i + report.D * report.L0 * math.sqrt(2 * (rho**2 + 1)) / (1 - rho)


def bound_thm1(x1_gap: float, rho_m: float, V_T: float) -> float:
    """Tracking-error ceiling ``|x_1 - x*_1|^2 / (1 - rho_m) + V_T / (1 - rho_m)^2``."""
    if not rho_m < 1:
        raise DomainError(f"tracking bound needs rho_m < 1, got {rho_m:.6g}")
    return x1_gap**2 / (1 - rho_m) + V_T / (1 - rho_m) ** 2


def thm2_scale(c1_i: float, W_iT: float, L0: float, T: int, rho_m: float, err_T: float) -> float:
    """Dynamic-regret ceiling ``C_{i,1}(x_1) + W_i + L0 sqrt(T) (1 + rho_m) sqrt(Err(T))``.

    Valid when the costs are nonnegative on the box.
    """
    return c1_i + W_iT + L0 * math.sqrt(T) * (1 + rho_m) * math.sqrt(err_T)


def sublinearity_fit(series, window: Optional[tuple[int, int]] = None) -> float:
    """Least-squares slope of ``log(series_t)`` against ``log(t)``.

    ``window`` is an inclusive 1-based episode range; by default the second
    half of the horizon.
    """
    y = np.asarray(series, dtype=float)
    T = y.shape[0]
    lo, hi = window if window is not None else (T // 2 + 1, T)
    if not 1 <= lo < hi <= T:
        raise DomainError(f"window {lo}..{hi} invalid for a series of length {T}")
    t = np.arange(lo, hi + 1, dtype=float)
    seg = y[lo - 1 : hi]
    if np.any(seg <= 0):
        raise DomainError("series must be positive over the fitting window")
    slope, _ = np.polyfit(np.log(t), np.log(seg), 1)
    return float(slope)


@dataclass
class MetricsReport:
    """Everything measured along one run.  Optional fields are ``None`` when not applicable."""

    T: int
    distance: np.ndarray
    err: np.ndarray
    V: np.ndarray
    DR: np.ndarray
    SR: Optional[np.ndarray] = None
    W: Optional[np.ndarray] = None
    rho: Optional[float] = None
    rho_m: Optional[float] = None
    L0: Optional[float] = None
    prop2_bound: Optional[list[float]] = None
    thm1_bound: Optional[np.ndarray] = None
    thm2_scale: Optional[list[float]] = None
    exponents: dict[str, Optional[float]] = field(default_factory=dict)


def _safe_fit(series, window) -> Optional[float]:
    try:
        return sublinearity_fit(series, window)
    except DomainError:
        return None


def compute_metrics(
    traj: Trajectory,
    eq_path: Optional[Sequence[EquilibriumResult]] = None,
    fit_window: Optional[tuple[int, int]] = None,
) -> MetricsReport:
    """All applicable metrics and bounds for a trajectory of a quadratic schedule."""
    schedule = traj.schedule
    T = traj.horizon
    if eq_path is None:
        eq_path = equilibrium_path(schedule, T)
    P = path_array(eq_path)
    sched = analyze_schedule(schedule, range(1, T + 1))
    rep = MetricsReport(
        T=T,
        distance=distances(traj, P),
        err=tracking_error(traj, P),
        V=equilibrium_variation(P[: T + 1]),
        DR=dynamic_regret(traj, schedule),
        rho_m=sched.rho_max,
        L0=sched.L0,
    )
    N = schedule.n_agents
    game1 = schedule.game(1)
    c1 = [game1.cost(i, traj.x1) for i in range(N)]
    if schedule.is_constant:
        rep.rho = sched.rho_max
        rep.SR = static_regret(traj, game1)
        report = analyze(game1)
        if report.verdict is Verdict.CONTRACTIVE and report.D is not None:
            rep.prop2_bound = [bound_prop2(report, c) for c in c1]
    if schedule.space.is_bounded:
        rep.W = function_variation(schedule, T=T)
    if sched.rho_max < 1:
        gap = float(np.linalg.norm(traj.x1 - P[0]))
        rep.thm1_bound = np.array([bound_thm1(gap, sched.rho_max, v) for v in rep.V])
        if rep.W is not None and sched.L0 is not None:
            rep.thm2_scale = [
                thm2_scale(c1[i], rep.W[-1, i], sched.L0, T, sched.rho_max, rep.err[-1]) for i in range(N)
            ]
    fits = {"Err": rep.err, "V": rep.V}
    for i in range(N):
        fits[f"DR_{i + 1}"] = rep.DR[:, i]
        if rep.SR is not None:
            fits[f"SR_{i + 1}"] = rep.SR[:, i]
        if rep.W is not None:
            fits[f"W_{i + 1}"] = rep.W[:, i]
    if T >= 2:
        rep.exponents = {k: _safe_fit(v, fit_window) for k, v in fits.items()}
    return rep
