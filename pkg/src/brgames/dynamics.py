"""Simultaneous best-response dynamics.

Every agent best-responds to the joint action of the previous episode::

    x_{i,t+1} = argmin_{x_i in X_i} C_{i,t}(x_i, x_{-i,t})

For quadratic games with diagonal curvature the argmin is the clamped
stationary point.  Otherwise a projected-gradient inner loop stands in
for an exact argmin oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, SolverError, StructuralError
from .game import Game, GameSchedule, QuadraticGame
from .linalg import largest_eigenvalue

BR_TOL = 1e-12
BR_MAX_ITER = 10_000


def _natural_residual(space, i, x_i, grad) -> float:
    return float(np.linalg.norm(x_i - space.project_block(i, x_i - grad)))


def _quadratic_br(game: QuadraticGame, i: int, x_minus_i: np.ndarray, tol: float, max_iter: int):
    sp = game.space
    A, rhs = game.A[i], game.e[i] - game.B[i] @ x_minus_i
    if game.diagonal_A[i]:
        return sp.project_block(i, rhs / np.diag(A)), 0
    target = np.linalg.solve(A, rhs)
    s = sp.slice(i)
    if np.all(target >= sp.lower[s]) and np.all(target <= sp.upper[s]):
        return target, 0
    # box-constrained: projected gradient with step 1/lambda_max(A)
    step = 1.0 / largest_eigenvalue(A)
    x = sp.project_block(i, target)
    res = np.inf
    for k in range(1, max_iter + 1):
        x = sp.project_block(i, x - step * (A @ x - rhs))
        res = _natural_residual(sp, i, x, A @ x - rhs)
        if res <= tol:
            return x, k
    raise SolverError(f"best response of agent {i} did not converge", best=x, residual=res)


def _general_br(game: Game, i: int, x_minus_i: np.ndarray, tol: float, max_iter: int):
    sp = game.space
    x = sp.midpoint()[sp.slice(i)]

    def grad(z):
        return game.gradient(i, sp.join(z, x_minus_i, i))

    step, g = 1.0, grad(x)
    res = _natural_residual(sp, i, x, g)
    for k in range(1, max_iter + 1):
        if res <= tol:
            return x, k - 1
        # backtrack until the step is below the local gradient Lipschitz
        # constant; unlike a cost-decrease test this stays resolvable in
        # floating point right down to the optimum
        while True:
            z = sp.project_block(i, x - step * g)
            d = z - x
            gz = grad(z)
            if step * np.linalg.norm(gz - g) <= np.linalg.norm(d) or step < 1e-20:
                break
            step *= 0.5
        x, g = z, gz
        res = _natural_residual(sp, i, x, g)
        step *= 2.0
    if res <= tol:
        return x, max_iter
    raise SolverError(f"best response of agent {i} did not converge", best=x, residual=res)


def best_response_info(game: Game, i: int, x_minus_i, tol: float = BR_TOL, max_iter: int = BR_MAX_ITER):
    """Best response of agent ``i`` together with the inner iterations used."""
    sp = game.space
    x_minus_i = np.asarray(x_minus_i, dtype=float)
    if x_minus_i.shape != (sp.size - sp.dims[i],):
        raise StructuralError(f"opponent action for agent {i} has shape {x_minus_i.shape}")
    if isinstance(game, QuadraticGame):
        return _quadratic_br(game, i, x_minus_i, tol, max_iter)
    return _general_br(game, i, x_minus_i, tol, max_iter)


def best_response(game: Game, i: int, x_minus_i, tol: float = BR_TOL, max_iter: int = BR_MAX_ITER) -> np.ndarray:
    """Minimiser of ``C_i(., x_{-i})`` over agent ``i``'s box.

    Raises:
        SolverError: the inner solver hit ``max_iter``; carries the best
            iterate and its residual.
    """
    return best_response_info(game, i, x_minus_i, tol, max_iter)[0]


def _br_step(game: Game, x: np.ndarray, tol: float, max_iter: int):
    sp = game.space
    blocks, iters = [], []
    for i in range(sp.n_agents):
        xi, k = best_response_info(game, i, sp.complement(x, i), tol, max_iter)
        blocks.append(xi)
        iters.append(k)
    return sp.concat(blocks), iters


def br_step(game: Game, x, tol: float = BR_TOL, max_iter: int = BR_MAX_ITER) -> np.ndarray:
    """One simultaneous update: all agents respond to the same ``x``."""
    return _br_step(game, game.space.check(x), tol, max_iter)[0]


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Joint actions ``x_1 .. x_{T+1}`` of a best-response run.

    Row ``t - 1`` of ``actions`` is ``x_t``.  The last row is the action
    produced by the episode-``T`` update and is not itself played.
    """

    actions: np.ndarray
    schedule: GameSchedule
    inner_iterations: np.ndarray

    @property
    def horizon(self) -> int:
        return self.actions.shape[0] - 1

    @property
    def x1(self) -> np.ndarray:
        return self.actions[0]

    @property
    def played(self) -> np.ndarray:
        """``x_1 .. x_T``."""
        return self.actions[:-1]

    def __len__(self) -> int:
        return self.horizon

    def __getitem__(self, t: int) -> np.ndarray:
        """1-based access: ``traj[t]`` is ``x_t`` for ``t`` in ``1..T+1``."""
        if not 1 <= t <= self.horizon + 1:
            raise IndexError(t)
        return self.actions[t - 1]


def run_dynamics(
    schedule: Union[GameSchedule, Game],
    x1,
    T: int | None = None,
    tol: float = BR_TOL,
    max_iter: int = BR_MAX_ITER,
) -> Trajectory:
    """Iterate ``x_{t+1} = br_step(game_t, x_t)`` for ``t = 1..T``.

    A bare game is treated as a constant schedule, in which case ``T`` is
    required.
    """
    if not isinstance(schedule, GameSchedule):
        if T is None:
            raise DomainError("T is required when running a single game")
        schedule = GameSchedule.constant(schedule, T)
    T = schedule.horizon if T is None else int(T)
    if not 1 <= T <= schedule.horizon:
        raise DomainError(f"T must lie in 1..{schedule.horizon}, got {T}")
    sp = schedule.space
    x = sp.check(x1).copy()
    if not np.array_equal(sp.project(x), x):
        raise DomainError("initial action is outside the box")
    actions = np.empty((T + 1, sp.size))
    iters = np.zeros((T, sp.n_agents), dtype=int)
    actions[0] = x
    for t in range(1, T + 1):
        x, iters[t - 1] = _br_step(schedule.game(t), x, tol, max_iter)
        actions[t] = x
    actions.setflags(write=False)
    iters.setflags(write=False)
    return Trajectory(actions=actions, schedule=schedule, inner_iterations=iters)
