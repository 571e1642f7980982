"""Nash equilibria of strongly monotone games and their certificates.

Three solvers are tried in order by :func:`solve`:

* ``direct-linear``: solve ``G x = e`` for the stationary point and
  accept it when it lies in the box (quadratic games only);
* ``projected-fixed-point``: iterate the best-response map, admissible
  only when that map contracts;
* ``projected-pseudo-gradient``: ``x <- P(x - step * g(x))``, which
  converges for any strongly monotone game with a small enough step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .analysis import Verdict, analyze, assemble_jacobian
from .dynamics import br_step
from .errors import (
    DomainError,
    InfeasibleInteriorError,
    NotContractiveError,
    SingularGameError,
    SolverError,
)
from .game import Game, GameSchedule, QuadraticGame, pseudo_gradient

EQ_TOL = 1e-10
FEASIBILITY_TOL = 1e-12

DIRECT = "direct-linear"
FIXED_POINT = "projected-fixed-point"
PSEUDO_GRADIENT = "projected-pseudo-gradient"


@dataclass(frozen=True, eq=False)
class EquilibriumResult:
    x: np.ndarray
    residual: float
    method: str
    iterations: int


def equilibrium_residual(game: Game, x) -> float:
    """Natural-map residual ``max_i |x_i - P_i(x_i - grad_i C_i(x))|``.

    Zero exactly at a Nash equilibrium, including ones on the boundary.
    """
    sp = game.space
    x = sp.check(x)
    return max(
        float(np.linalg.norm(x[sp.slice(i)] - sp.project_block(i, x[sp.slice(i)] - game.gradient(i, x))))
        for i in range(sp.n_agents)
    )


def _certify(game: Game, x: np.ndarray, method: str, iterations: int) -> EquilibriumResult:
    res = equilibrium_residual(game, x)
    if not res <= EQ_TOL:
        raise SolverError(f"{method}: residual {res:.3e} exceeds {EQ_TOL:.0e}", best=x, residual=res)
    x = x.copy()
    x.setflags(write=False)
    return EquilibriumResult(x=x, residual=res, method=method, iterations=iterations)


def solve_direct(game: QuadraticGame) -> EquilibriumResult:
    """Interior equilibrium from the stacked stationarity system ``G x = e``.

    Raises:
        SingularGameError: ``G`` is singular.
        InfeasibleInteriorError: the stationary point is outside the box;
            fall back to a projected solver.
    """
    G = assemble_jacobian(game)
    e = game.offset_vector()
    try:
        x = np.linalg.solve(G, e)
    except np.linalg.LinAlgError:
        raise SingularGameError("pseudo-gradient Jacobian is singular") from None
    if not np.all(np.isfinite(x)):
        raise SingularGameError("pseudo-gradient Jacobian is numerically singular")
    sp = game.space
    if not sp.contains(x, FEASIBILITY_TOL):
        raise InfeasibleInteriorError("stationary point lies outside the box", best=x)
    return _certify(game, sp.project(x), DIRECT, 1)


def _start(game: Game, x0) -> np.ndarray:
    sp = game.space
    return sp.midpoint() if x0 is None else sp.project(x0)


def solve_projected_fixed_point(
    game: Game,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    x0=None,
    rho: Optional[float] = None,
) -> EquilibriumResult:
    """Iterate simultaneous best response until the contraction certificate holds.

    Stops once ``|x_{k+1} - x_k| <= tol * (1 - rho) / rho``, which puts
    ``x_{k+1}`` within ``tol`` of the equilibrium.  ``rho`` is computed
    for quadratic games and must be supplied for general ones.

    Raises:
        NotContractiveError: ``rho >= 1``.
    """
    if rho is None:
        if not isinstance(game, QuadraticGame):
            raise DomainError("general games need an explicit contraction factor rho")
        report = analyze(game)
        if report.verdict is not Verdict.CONTRACTIVE:
            raise NotContractiveError(f"best response is not a contraction (rho={report.rho:.6g})")
        rho = report.rho
    elif not rho < 1:
        raise NotContractiveError(f"best response is not a contraction (rho={rho:.6g})")
    threshold = math.inf if rho == 0 else tol * (1 - rho) / rho
    x = _start(game, x0)
    for k in range(1, max_iter + 1):
        x_new = br_step(game, x)
        step = float(np.linalg.norm(x_new - x))
        x = x_new
        if step <= threshold:
            return _certify(game, x, FIXED_POINT, k)
    raise SolverError("fixed-point iteration hit the iteration cap", best=x, residual=equilibrium_residual(game, x))


def solve_projected_pseudo_gradient(
    game: Game,
    step: Optional[float] = None,
    tol: float = 1e-12,
    max_iter: int = 100_000,
    x0=None,
) -> EquilibriumResult:
    """Projected pseudo-gradient iteration ``x <- P(x - step * g(x))``.

    The default step ``m / L1**2`` (``L1`` the spectral norm of the
    pseudo-gradient Jacobian) makes the map a contraction for any strongly
    monotone quadratic game.  General games must pass ``step``.

    The movement test is ``|x_{k+1} - x_k| <= tol * min(1, step)``: the
    natural-map residual is roughly the movement divided by the step, so
    short steps need a proportionally tighter stop to certify.
    """
    if step is None:
        if not isinstance(game, QuadraticGame):
            raise DomainError("general games need an explicit step")
        report = analyze(game)
        if report.m <= 0:
            raise DomainError(f"game is not strongly monotone (m={report.m:.6g})")
        step = report.m / report.L1**2
    if not step > 0:
        raise DomainError("step must be positive")
    sp = game.space
    x = _start(game, x0)
    for k in range(1, max_iter + 1):
        x_new = sp.project(x - step * pseudo_gradient(game, x))
        if not np.all(np.isfinite(x_new)):
            raise SolverError("pseudo-gradient iterates became non-finite", best=x)
        delta = float(np.linalg.norm(x_new - x))
        x = x_new
        if delta <= tol * min(1.0, step):
            return _certify(game, x, PSEUDO_GRADIENT, k)
    raise SolverError("pseudo-gradient iteration hit the iteration cap", best=x, residual=equilibrium_residual(game, x))


def solve(game: Game, x0=None, tol: float = 1e-12) -> EquilibriumResult:
    """Try direct, then fixed-point, then pseudo-gradient solves."""
    if isinstance(game, QuadraticGame):
        try:
            return solve_direct(game)
        except (InfeasibleInteriorError, SingularGameError):
            pass
        try:
            return solve_projected_fixed_point(game, tol=tol, x0=x0)
        except NotContractiveError:
            pass
    try:
        return solve_projected_pseudo_gradient(game, tol=tol, x0=x0)
    except DomainError as exc:
        raise SolverError(f"no applicable equilibrium solver: {exc}") from exc


def equilibrium_path(
    schedule: GameSchedule, T: Optional[int] = None, warm_start: bool = True, tol: float = 1e-12
) -> list[EquilibriumResult]:
    """Equilibria ``x*_1 .. x*_{T+1}``; the extra one feeds the variation sums.

    Raises:
        SolverError: naming the first episode whose solve failed.
    """
    T = schedule.horizon if T is None else int(T)
    if schedule.is_constant:
        res = solve(schedule.game(1), tol=tol)
        return [res] * (T + 1)
    path: list[EquilibriumResult] = []
    prev = None
    for t in range(1, T + 2):
        try:
            res = solve(schedule.game(t), x0=prev if warm_start else None, tol=tol)
        except (SolverError, DomainError) as exc:
            raise SolverError(f"equilibrium solve failed at episode {t}: {exc}") from exc
        path.append(res)
        prev = res.x
    return path


def path_array(path) -> np.ndarray:
    """Stack a list of results (or pass through an array) into rows."""
    if isinstance(path, np.ndarray):
        return path
    return np.array([r.x if isinstance(r, EquilibriumResult) else r for r in path], dtype=float)
