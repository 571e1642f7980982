"""Small dense symmetric eigenproblems via cyclic Jacobi rotations.

Intended for the desk-scale matrices that show up in game analysis
(a few dozen rows at most).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SolverError

SYMMETRY_TOL = 1e-12
MAX_SWEEPS = 100


def jacobi_eigenvalues(S, tol: float = 1e-15, max_sweeps: int = MAX_SWEEPS) -> np.ndarray:
    """Eigenvalues of a symmetric matrix in ascending order.

    Sweeps rotate away every off-diagonal entry in turn until the
    off-diagonal Frobenius norm is below ``tol`` times the matrix norm.
    """
    S = np.array(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise ValueError("matrix has non-finite entries")
    if np.max(np.abs(S - S.T), initial=0.0) > SYMMETRY_TOL * max(1.0, np.max(np.abs(S), initial=0.0)):
        raise ValueError("matrix is not symmetric")
    a = 0.5 * (S + S.T)
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if n == 1 or scale == 0.0:
        return np.sort(np.diag(a))

    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * scale:
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                # negligible against both diagonal entries: drop it
                if abs(apq) <= 1e-18 * min(abs(a[p, p]), abs(a[q, q])):
                    a[p, q] = a[q, p] = 0.0
                    continue
                h = float(a[q, q] - a[p, p])
                if abs(apq) < 1e-150 * abs(h):
                    t = apq / h
                else:
                    theta = h / (2.0 * apq)
                    t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(theta, 1.0))
                c = 1.0 / math.hypot(t, 1.0)
                s = t * c
                # rotate rows/cols p and q
                ap, aq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                ap, aq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                a[p, q] = a[q, p] = 0.0
    raise SolverError(f"Jacobi iteration did not converge in {max_sweeps} sweeps", best=np.sort(np.diag(a)))


def smallest_eigenvalue(S) -> float:
    return float(jacobi_eigenvalues(S)[0])


def largest_eigenvalue(S) -> float:
    return float(jacobi_eigenvalues(S)[-1])


def spectral_norm(M) -> float:
    """Largest singular value, from the Gram matrix ``M'M``."""
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.size == 0:
        return 0.0
    gram = M.T @ M if M.shape[0] >= M.shape[1] else M @ M.T
    return math.sqrt(max(largest_eigenvalue(gram), 0.0))
