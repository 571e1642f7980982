"""Monotonicity and Lipschitz constants, and the best-response contraction test.

For a game with strong-monotonicity constant ``m`` and coupling constant
``L`` (Lipschitz constant of each own-gradient in the opponents' actions),
simultaneous best response contracts toward the equilibrium by the factor
``rho = L * sqrt(N - 1) / m`` per step whenever ``rho < 1``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError
from .game import Game, GameSchedule, QuadraticGame, pseudo_gradient
from .linalg import smallest_eigenvalue, spectral_norm

VERDICT_EPS = 1e-9


class Verdict(str, enum.Enum):
    CONTRACTIVE = "Contractive"
    MARGINAL = "Marginal"
    VIOLATED = "Violated"


@dataclass(frozen=True)
class AnalysisReport:
    m: float
    L: float
    rho: float
    n_agents: int
    verdict: Verdict
    L0: Optional[float] = None
    L1: Optional[float] = None
    D: Optional[float] = None
    provenance: str = "exact-quadratic"

    @property
    def strongly_monotone(self) -> bool:
        return self.m > 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        return d


def assemble_jacobian(game: QuadraticGame) -> np.ndarray:
    """Jacobian of the pseudo-gradient: ``A_i`` on the diagonal blocks, ``B_i`` spread off it."""
    sp = game.space
    G = np.zeros((sp.size, sp.size))
    for i in range(sp.n_agents):
        rows = sp.slice(i)
        G[rows, rows] = game.A[i]
        others = [j for j in range(sp.size) if not rows.start <= j < rows.stop]
        G[rows, others] = game.B[i]
    return G


def monotonicity_constant(game: QuadraticGame) -> float:
    """``lambda_min((G + G')/2)``; a value <= 0 means the game is not strongly monotone."""
    G = assemble_jacobian(game)
    return smallest_eigenvalue(0.5 * (G + G.T))


def coupling_lipschitz(game: QuadraticGame) -> float:
    return max(spectral_norm(Bi) for Bi in game.B)


def contraction_factor(m: float, L: float, n_agents: int) -> float:
    if n_agents <= 1:
        return 0.0
    if m <= 0:
        raise DomainError(f"contraction factor needs m > 0, got m={m}")
    return L * math.sqrt(n_agents - 1) / m


def classify(rho: float, eps: float = VERDICT_EPS) -> Verdict:
    if isinstance(rho, AnalysisReport):
        rho = rho.rho
    if rho < 1 - eps:
        return Verdict.CONTRACTIVE
    if rho > 1 + eps:
        return Verdict.VIOLATED
    return Verdict.MARGINAL


def aux_constants(game: QuadraticGame) -> tuple[Optional[float], float, Optional[float]]:
    """``(L0, L1, D)``.

    ``L0`` bounds how fast ``C_i`` changes with the opponents' actions over
    the box.  That gradient is ``B_i' x_i``, linear in ``x_i``, so its norm
    peaks at a corner of agent ``i``'s box.  ``L0`` and ``D`` are ``None`` on
    unbounded boxes.
    """
    L1 = spectral_norm(assemble_jacobian(game))
    sp = game.space
    if not sp.is_bounded:
        return None, L1, None
    L0 = 0.0
    for i in range(sp.n_agents):
        corners = sp.block_corners(i)
        L0 = max(L0, float(np.max(np.linalg.norm(corners @ game.B[i], axis=1))))
    return L0, L1, sp.diameter


def analyze(game: QuadraticGame) -> AnalysisReport:
    m = monotonicity_constant(game)
    L = coupling_lipschitz(game)
    N = game.n_agents
    rho = contraction_factor(m, L, N) if m > 0 else math.inf
    L0, L1, D = aux_constants(game)
    return AnalysisReport(m=m, L=L, rho=rho, n_agents=N, verdict=classify(rho), L0=L0, L1=L1, D=D)


def sampled_monotonicity(
    game: Game,
    samples: int = 10_000,
    seed: int = 0,
    region: Optional[tuple[float, float]] = None,
) -> float:
    """Smallest monotonicity quotient over random pairs of joint actions.

    Each pair ``(x, y)`` contributes ``<g(x) - g(y), x - y> / |x - y|^2``
    where ``g`` is the pseudo-gradient.  Finitely many pairs can only
    overestimate the true ``m``.  Points are drawn uniformly from the box;
    unbounded coordinates are drawn from ``region`` instead.
    """
    if samples < 2:
        raise DomainError("need at least 2 sample pairs")
    sp = game.space
    lo, hi = sp.lower.copy(), sp.upper.copy()
    if not sp.is_bounded:
        if region is None:
            raise DomainError("unbounded box: pass a bounded sampling region")
        lo = np.where(np.isfinite(lo), lo, region[0])
        hi = np.where(np.isfinite(hi), hi, region[1])
    rng = np.random.default_rng(seed)
    X = rng.uniform(lo, hi, size=(samples, sp.size))
    Y = rng.uniform(lo, hi, size=(samples, sp.size))
    best = math.inf
    for x, y in zip(X, Y):
        d = x - y
        dd = float(d @ d)
        if dd == 0.0:
            continue
        q = float((pseudo_gradient(game, x) - pseudo_gradient(game, y)) @ d) / dd
        best = min(best, q)
    if math.isinf(best):
        raise DomainError("all sampled pairs were degenerate")
    return best


@dataclass(frozen=True)
class ScheduleAnalysis:
    """Per-episode constants of a quadratic schedule, episodes ``1..horizon``."""

    m: np.ndarray
    L: np.ndarray
    rho: np.ndarray
    rho_max: float
    verdict: Verdict
    L0: Optional[float]
    D: Optional[float]


def analyze_schedule(schedule: GameSchedule, episodes: Optional[Sequence[int]] = None) -> ScheduleAnalysis:
    """Analyse every episode; ``rho_max`` is the worst contraction factor."""
    ts = list(range(1, schedule.horizon + 1)) if episodes is None else list(episodes)
    if schedule.is_constant:
        rep = analyze(schedule.game(1))
        reps = [rep] * len(ts)
    else:
        reps = [analyze(schedule.game(t)) for t in ts]
    rho = np.array([r.rho for r in reps])
    rho_max = float(rho.max())
    L0s = [r.L0 for r in reps]
    return ScheduleAnalysis(
        m=np.array([r.m for r in reps]),
        L=np.array([r.L for r in reps]),
        rho=rho,
        rho_max=rho_max,
        verdict=classify(rho_max),
        L0=None if L0s[0] is None else max(L0s),
        D=reps[0].D,
    )
