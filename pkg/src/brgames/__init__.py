"""Best-response dynamics for strongly monotone games, static and time-varying."""

from .analysis import AnalysisReport, Verdict, analyze, analyze_schedule
from .dynamics import Trajectory, best_response, br_step, run_dynamics
from .equilibrium import EquilibriumResult, equilibrium_path, equilibrium_residual, solve
from .errors import DomainError, SolverError, StructuralError
from .game import BoxSpace, GameSchedule, GeneralGame, QuadraticGame
from .metrics import MetricsReport, compute_metrics
from .presets import PRESETS, build_preset

__all__ = [
    "AnalysisReport", "BoxSpace", "DomainError", "EquilibriumResult", "GameSchedule", "GeneralGame",
    "MetricsReport", "PRESETS", "QuadraticGame", "SolverError", "StructuralError", "Trajectory", "Verdict",
    "analyze", "analyze_schedule", "best_response", "br_step", "build_preset", "compute_metrics",
    "equilibrium_path", "equilibrium_residual", "run_dynamics", "solve",
]

__version__ = "0.1.0"
