"""Two-firm Cournot games used by the experiments.

Each agent ``i`` has cost ``x_i (a_i x_i / 2 + b_i x_{-i} - e_i) + 1``.
A parameter tuple is ``(a_1, a_2, b_1, b_2, e_1, e_2)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np

from .analysis import Verdict
from .errors import DomainError
from .game import BoxSpace, GameSchedule, QuadraticGame

THETA1 = (1.0, 1.0, 0.6, -0.5, 1.2, 0.8)
THETA2 = (1.0, 1.0, 1.0, -1.0, 1.2, 0.8)
THETA3 = (1.0, 1.0, 2.0, -1.0, 1.2, 0.8)

TV_CURVATURE = 2.0
TV_DEFAULT_T = 1000
REMARK1_TARGET = 0.4


def cournot_game(theta, space: BoxSpace) -> QuadraticGame:
    a1, a2, b1, b2, e1, e2 = theta
    return QuadraticGame.scalar((a1, a2), (b1, b2), (e1, e2), space)


def phase_boundary(T: int) -> int:
    """``floor(T ** 0.6)`` in exact integer arithmetic (largest k with k**5 <= T**3)."""
    k = int(T**0.6)
    while (k + 1) ** 5 <= T**3:
        k += 1
    while k**5 > T**3:
        k -= 1
    return k


def tv_cournot_params(t: int, T: int) -> tuple[float, float]:
    """Coupling ``b_t`` and offset ``e_t`` shared by both firms at episode ``t``.

    Episodes up to ``floor(T**0.6)`` alternate the coupling; later ones
    hold it at 0.3 and let the offset oscillate with decaying amplitude.
    """
    sign = 1.0 if t % 2 == 0 else -1.0
    if t <= phase_boundary(T):
        return 0.3 + 0.1 * sign, 0.4
    return 0.3, 0.4 + 0.1 * sign * t**-0.25


def tv_cournot(T: int = TV_DEFAULT_T, space: Optional[BoxSpace] = None) -> GameSchedule:
    space = space or BoxSpace.uniform(2, 0.0, 2.0)
    a = TV_CURVATURE

    def game(t):
        b, e = tv_cournot_params(t, T)
        return cournot_game((a, a, b, b, e, e), space)

    return GameSchedule(T, game, space, name="tv-cournot")


def remark1_params(t: int) -> tuple[float, float]:
    """Coupling alternates every episode; the offset follows so that ``e / (a + b)`` stays fixed."""
    b = 0.3 + 0.1 * (1.0 if t % 2 == 0 else -1.0)
    return b, REMARK1_TARGET * (TV_CURVATURE + b)


def remark1(T: int = TV_DEFAULT_T, space: Optional[BoxSpace] = None) -> GameSchedule:
    """Costs change every episode while the equilibrium stays at (0.4, 0.4)."""
    space = space or BoxSpace.uniform(2, 0.0, 2.0)
    a = TV_CURVATURE

    def game(t):
        b, e = remark1_params(t)
        return cournot_game((a, a, b, b, e, e), space)

    return GameSchedule(T, game, space, name="remark1")


@dataclass(frozen=True)
class PresetCatalogEntry:
    name: str
    kind: str  # "game" or "schedule"
    default_box: tuple[float, float]
    default_x1: Union[tuple[float, ...], str]
    default_T: int
    expected_verdict: Verdict
    build: Callable[..., Union[QuadraticGame, GameSchedule]]
    description: str = ""


def _theta(theta):
    def build(T=None, space=None):
        return cournot_game(theta, space or BoxSpace.uniform(2, -10.0, 10.0))

    return build


PRESETS: dict[str, PresetCatalogEntry] = {
    "theta1": PresetCatalogEntry(
        "theta1", "game", (-10.0, 10.0), (1.0, 1.0), 100, Verdict.CONTRACTIVE, _theta(THETA1),
        "contractive Cournot game, m > L sqrt(N-1)",
    ),
    "theta2": PresetCatalogEntry(
        "theta2", "game", (-10.0, 10.0), (1.0, 1.0), 100, Verdict.MARGINAL, _theta(THETA2),
        "marginal Cournot game, m = L sqrt(N-1); best response rotates",
    ),
    "theta3": PresetCatalogEntry(
        "theta3", "game", (-10.0, 10.0), (1.0, 1.0), 100, Verdict.VIOLATED, _theta(THETA3),
        "Cournot game with m < L sqrt(N-1); best response diverges",
    ),
    "tv-cournot": PresetCatalogEntry(
        "tv-cournot", "schedule", (0.0, 2.0), "midpoint", TV_DEFAULT_T, Verdict.CONTRACTIVE,
        lambda T=None, space=None: tv_cournot(T or TV_DEFAULT_T, space),
        "time-varying Cournot game, oscillating coupling then decaying offset noise",
    ),
    "remark1": PresetCatalogEntry(
        "remark1", "schedule", (0.0, 2.0), "midpoint", TV_DEFAULT_T, Verdict.CONTRACTIVE,
        lambda T=None, space=None: remark1(T or TV_DEFAULT_T, space),
        "time-varying costs with a fixed equilibrium",
    ),
}


def build_preset(name: str, T: Optional[int] = None, space: Optional[BoxSpace] = None):
    """Game (theta presets) or schedule (time-varying presets) by name."""
    try:
        entry = PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return entry.build(T=T, space=space)


def default_x1(name: str, space: BoxSpace) -> np.ndarray:
    x1 = PRESETS[name].default_x1
    return space.midpoint() if x1 == "midpoint" else np.array(x1, dtype=float)
