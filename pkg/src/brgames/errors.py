"""Exception hierarchy shared by the solvers and the CLI."""

from __future__ import annotations

import numpy as np


class StructuralError(ValueError):
    """A joint action or matrix does not match the game's block layout."""


class DomainError(ValueError):
    """A quantity is requested outside the region where it is defined."""


class SolverError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance.

    The best iterate found and its residual are kept so callers can inspect
    how far the solver got.
    """

    def __init__(self, message: str, best: np.ndarray | None = None, residual: float = float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual


class NotContractiveError(DomainError):
    """Raised by solvers that need the best-response map to be a contraction."""


class InfeasibleInteriorError(SolverError):
    """The unconstrained stationary point lies outside the action box."""


class SingularGameError(SolverError):
    """The pseudo-gradient Jacobian is singular."""
