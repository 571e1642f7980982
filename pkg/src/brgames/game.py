"""Games, action boxes and per-agent cost/gradient evaluation.

Agents are indexed from 0.  A joint action is a flat float array made of the
agents' action blocks laid out one after another; :class:`BoxSpace` knows the
block boundaries and does all slicing, so the rest of the package never
computes offsets by hand.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DomainError, StructuralError

DEFAULT_FD_STEP = 1e-5


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class BoxSpace:
    """Product of per-agent boxes ``lower <= x <= upper``.

    ``lower`` and ``upper`` are full-length vectors over the joint action;
    ``dims[i]`` is the dimension of agent ``i``'s block.  Infinite bounds are
    allowed.
    """

    dims: tuple[int, ...]
    lower: np.ndarray
    upper: np.ndarray
    offsets: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 1 for d in dims):
            raise StructuralError(f"agent dimensions must be >= 1, got {self.dims}")
        n = sum(dims)
        lower = _frozen(np.broadcast_to(np.asarray(self.lower, dtype=float), (n,)))
        upper = _frozen(np.broadcast_to(np.asarray(self.upper, dtype=float), (n,)))
        if np.isnan(lower).any() or np.isnan(upper).any():
            raise StructuralError("box bounds must not be NaN")
        if np.any(lower > upper):
            raise StructuralError("box lower bound exceeds upper bound")
        if np.isposinf(lower).any() or np.isneginf(upper).any():
            raise StructuralError("box is empty: lower=+inf or upper=-inf")
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        object.__setattr__(self, "offsets", tuple(itertools.accumulate((0,) + dims)))

    @classmethod
    def uniform(cls, dims: Sequence[int] | int, lo: float, hi: float) -> "BoxSpace":
        """Same ``[lo, hi]`` interval on every coordinate.

        An integer ``dims`` means that many scalar agents.
        """
        if isinstance(dims, (int, np.integer)):
            dims = (1,) * int(dims)
        n = sum(dims)
        return cls(tuple(dims), np.full(n, lo), np.full(n, hi))

    @property
    def n_agents(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return self.offsets[-1]

    def slice(self, i: int) -> slice:
        return slice(self.offsets[i], self.offsets[i + 1])

    def check(self, x) -> np.ndarray:
        """Return ``x`` as a float array, raising if its length is wrong."""
        arr = np.asarray(x, dtype=float)
        if arr.shape != (self.size,):
            raise StructuralError(f"joint action must have shape ({self.size},), got {arr.shape}")
        return arr

    def block(self, x, i: int) -> np.ndarray:
        return self.check(x)[self.slice(i)]

    def complement(self, x, i: int) -> np.ndarray:
        x = self.check(x)
        s = self.slice(i)
        return np.concatenate((x[: s.start], x[s.stop :]))

    def join(self, x_i, x_minus_i, i: int) -> np.ndarray:
        """Inverse of (block, complement): rebuild the joint action."""
        x_i = np.atleast_1d(np.asarray(x_i, dtype=float))
        x_minus_i = np.asarray(x_minus_i, dtype=float)
        if x_i.shape != (self.dims[i],) or x_minus_i.shape != (self.size - self.dims[i],):
            raise StructuralError(f"block shapes {x_i.shape}, {x_minus_i.shape} do not fit agent {i}")
        start = self.offsets[i]
        return np.concatenate((x_minus_i[:start], x_i, x_minus_i[start:]))

    def split(self, x) -> list[np.ndarray]:
        x = self.check(x)
        return [x[self.slice(i)] for i in range(self.n_agents)]

    def concat(self, blocks: Sequence) -> np.ndarray:
        if len(blocks) != self.n_agents:
            raise StructuralError(f"expected {self.n_agents} blocks, got {len(blocks)}")
        return self.check(np.concatenate([np.atleast_1d(np.asarray(b, dtype=float)) for b in blocks]))

    def project(self, v) -> np.ndarray:
        return np.clip(self.check(v), self.lower, self.upper)

    def project_block(self, i: int, v) -> np.ndarray:
        s = self.slice(i)
        return np.clip(np.asarray(v, dtype=float), self.lower[s], self.upper[s])

    def contains(self, x, tol: float = 0.0) -> bool:
        x = self.check(x)
        return bool(np.all(x >= self.lower - tol) and np.all(x <= self.upper + tol))

    @property
    def is_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper)))

    def diameters(self) -> np.ndarray:
        """Euclidean diameter of each agent's box (``inf`` when unbounded)."""
        width = self.upper - self.lower
        return np.array([np.linalg.norm(width[self.slice(i)]) for i in range(self.n_agents)])

    @property
    def diameter(self) -> float:
        """Largest per-agent diameter ``D``."""
        return float(self.diameters().max())

    def midpoint(self) -> np.ndarray:
        """Box centre; falls back to the finite bound, or 0, per coordinate."""
        lo, hi = self.lower, self.upper
        both = np.isfinite(lo) & np.isfinite(hi)
        mid = np.where(both, 0.5 * (np.where(both, lo, 0.0) + np.where(both, hi, 0.0)), 0.0)
        mid = np.where(np.isfinite(lo) & ~np.isfinite(hi), lo, mid)
        mid = np.where(~np.isfinite(lo) & np.isfinite(hi), hi, mid)
        return mid

    def block_corners(self, i: int) -> np.ndarray:
        """All ``2**d_i`` corners of agent ``i``'s box, one per row."""
        s = self.slice(i)
        return _corners(self.lower[s], self.upper[s])

    def corners(self) -> np.ndarray:
        return _corners(self.lower, self.upper)

    def same_layout(self, other: "BoxSpace") -> bool:
        return (
            self.dims == other.dims
            and np.array_equal(self.lower, other.lower)
            and np.array_equal(self.upper, other.upper)
        )


def _corners(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise DomainError("corners of an unbounded box are undefined")
    return np.array(list(itertools.product(*zip(lo, hi))), dtype=float).reshape(-1, lo.size)


@dataclass(frozen=True, eq=False)
class QuadraticGame:
    """Game with costs ``0.5 x_i'A_i x_i + x_i'B_i x_{-i} - e_i'x_i + c_i``.

    ``A[i]`` must be symmetric positive definite.  ``B[i]`` has one column
    per coordinate of ``x_{-i}``, ordered like the joint action with agent
    ``i``'s block removed.
    """

    A: tuple[np.ndarray, ...]
    B: tuple[np.ndarray, ...]
    e: tuple[np.ndarray, ...]
    c: tuple[float, ...]
    space: BoxSpace

    def __post_init__(self):
        sp = self.space
        N = sp.n_agents
        if not (len(self.A) == len(self.B) == len(self.e) == len(self.c) == N):
            raise StructuralError(f"need exactly {N} of each of A, B, e, c")
        A, B, e = [], [], []
        for i, d in enumerate(sp.dims):
            Ai = _frozen(np.atleast_2d(self.A[i]))
            Bi = _frozen(np.asarray(self.B[i], dtype=float).reshape(d, sp.size - d))
            ei = _frozen(np.atleast_1d(self.e[i]))
            if Ai.shape != (d, d) or ei.shape != (d,):
                raise StructuralError(f"agent {i}: A has shape {Ai.shape}, e has shape {ei.shape}, expected d={d}")
            if not np.all(np.isfinite(Ai)) or not np.all(np.isfinite(Bi)) or not np.all(np.isfinite(ei)):
                raise StructuralError(f"agent {i}: non-finite coefficients")
            if not np.allclose(Ai, Ai.T, rtol=0.0, atol=1e-12):
                raise StructuralError(f"agent {i}: A is not symmetric")
            try:
                np.linalg.cholesky(Ai)
            except np.linalg.LinAlgError:
                raise StructuralError(f"agent {i}: A is not positive definite") from None
            A.append(Ai)
            B.append(Bi)
            e.append(ei)
        object.__setattr__(self, "A", tuple(A))
        object.__setattr__(self, "B", tuple(B))
        object.__setattr__(self, "e", tuple(e))
        object.__setattr__(self, "c", tuple(float(ci) for ci in self.c))

    @classmethod
    def scalar(cls, a, b, e, space: BoxSpace, c=None) -> "QuadraticGame":
        """Scalar-action game.

        ``b[i]`` is either a scalar (the same coupling to every opponent) or a
        sequence of length ``N-1``.  ``c`` defaults to 1 for every agent.
        """
        N = space.n_agents
        if space.dims != (1,) * N:
            raise StructuralError("scalar games need one-dimensional agents")
        B = [np.broadcast_to(np.asarray(bi, dtype=float), (N - 1,)).reshape(1, N - 1) for bi in b]
        c = [1.0] * N if c is None else c
        return cls(tuple(np.array([[ai]], float) for ai in a), tuple(B), tuple(np.atleast_1d(ei) for ei in e), tuple(c), space)

    @property
    def n_agents(self) -> int:
        return self.space.n_agents

    @cached_property
    def diagonal_A(self) -> tuple[bool, ...]:
        return tuple(bool(np.count_nonzero(Ai - np.diag(np.diag(Ai))) == 0) for Ai in self.A)

    def cost(self, i: int, x) -> float:
        sp = self.space
        x = sp.check(x)
        xi, xo = x[sp.slice(i)], sp.complement(x, i)
        return float(0.5 * xi @ self.A[i] @ xi + xi @ self.B[i] @ xo - self.e[i] @ xi + self.c[i])

    def gradient(self, i: int, x) -> np.ndarray:
        sp = self.space
        x = sp.check(x)
        return self.A[i] @ x[sp.slice(i)] + self.B[i] @ sp.complement(x, i) - self.e[i]

    def offset_vector(self) -> np.ndarray:
        return np.concatenate(self.e)

    def scaled(self, factor: float) -> "QuadraticGame":
        """Multiply every A, B, e and c by ``factor``."""
        f = float(factor)
        return QuadraticGame(
            tuple(f * a for a in self.A), tuple(f * b for b in self.B), tuple(f * v for v in self.e),
            tuple(f * ci for ci in self.c), self.space,
        )

    def with_space(self, space: BoxSpace) -> "QuadraticGame":
        if space.dims != self.space.dims:
            raise StructuralError("replacement box has a different agent layout")
        return QuadraticGame(self.A, self.B, self.e, self.c, space)


CostFn = Callable[[np.ndarray], float]
GradFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class GeneralGame:
    """Game given by arbitrary per-agent cost callables on the joint action.

    Without ``gradients`` the agents' own-action gradients are taken by
    central finite differences with step ``fd_step``.
    """

    costs: tuple[CostFn, ...]
    space: BoxSpace
    gradients: Optional[tuple[GradFn, ...]] = None
    fd_step: float = DEFAULT_FD_STEP

    def __post_init__(self):
        object.__setattr__(self, "costs", tuple(self.costs))
        if len(self.costs) != self.space.n_agents:
            raise StructuralError(f"need {self.space.n_agents} cost functions, got {len(self.costs)}")
        if self.gradients is not None:
            object.__setattr__(self, "gradients", tuple(self.gradients))
            if len(self.gradients) != self.space.n_agents:
                raise StructuralError("need one gradient function per agent")

    @property
    def n_agents(self) -> int:
        return self.space.n_agents

    def cost(self, i: int, x) -> float:
        return float(self.costs[i](self.space.check(x)))

    def gradient(self, i: int, x) -> np.ndarray:
        x = self.space.check(x)
        if self.gradients is None:
            return finite_diff_gradient(self, i, x, self.fd_step)
        g = np.atleast_1d(np.asarray(self.gradients[i](x), dtype=float))
        if g.shape != (self.space.dims[i],):
            raise StructuralError(f"gradient of agent {i} has shape {g.shape}")
        return g


Game = Union[QuadraticGame, GeneralGame]


class GameSchedule:
    """Episode-indexed sequence of games ``t -> game_t``.

    Episodes run ``1..horizon``; ``game(horizon + 1)`` must also be
    available because equilibrium and function variation look one episode
    ahead.
    """

    def __init__(self, horizon: int, provider: Callable[[int], Game], space: BoxSpace, *, constant: bool = False, name: str = ""):
        if int(horizon) < 1:
            raise DomainError(f"horizon must be >= 1, got {horizon}")
        self.horizon = int(horizon)
        self._provider = provider
        self.space = space
        self.is_constant = constant
        self.name = name

    @classmethod
    def constant(cls, game: Game, horizon: int, name: str = "") -> "GameSchedule":
        return cls(horizon, lambda t: game, game.space, constant=True, name=name)

    @property
    def n_agents(self) -> int:
        return self.space.n_agents

    def game(self, t: int) -> Game:
        if not 1 <= t <= self.horizon + 1:
            raise DomainError(f"episode {t} outside 1..{self.horizon + 1}")
        g = self._provider(t)
        if not g.space.same_layout(self.space):
            raise StructuralError(f"episode {t} game does not share the schedule's box")
        return g

    def games(self, last: int | None = None):
        last = self.horizon if last is None else last
        for t in range(1, last + 1):
            yield t, self.game(t)


def cost(game: Game, i: int, x) -> float:
    return game.cost(i, x)


def gradient(game: Game, i: int, x) -> np.ndarray:
    return game.gradient(i, x)


def pseudo_gradient(game: Game, x) -> np.ndarray:
    """Stacked own-action gradients ``(grad_1 C_1(x), ..., grad_N C_N(x))``."""
    return np.concatenate([game.gradient(i, x) for i in range(game.n_agents)])


def project(space: BoxSpace, v) -> np.ndarray:
    return space.project(v)


def finite_diff_gradient(game: Game, i: int, x, h: float = DEFAULT_FD_STEP) -> np.ndarray:
    """Finite-difference estimate of agent ``i``'s own-action gradient.

    Central differences where the box leaves room for a step of ``h`` on
    both sides, one-sided differences otherwise.
    """
    if h <= 0:
        raise DomainError("finite-difference step must be positive")
    sp = game.space
    x = sp.check(x).copy()
    s = sp.slice(i)
    out = np.empty(sp.dims[i])
    for k, j in enumerate(range(s.start, s.stop)):
        xj, lo, hi = x[j], sp.lower[j], sp.upper[j]
        up, down = x.copy(), x.copy()
        if xj - h >= lo and xj + h <= hi:
            up[j], down[j] = xj + h, xj - h
            out[k] = (game.cost(i, up) - game.cost(i, down)) / (2 * h)
        elif xj + h <= hi:
            up[j] = xj + h
            out[k] = (game.cost(i, up) - game.cost(i, x)) / h
        else:
            down[j] = xj - h
            out[k] = (game.cost(i, x) - game.cost(i, down)) / h
    return out
