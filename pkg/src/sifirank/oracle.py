"""Reference solutions for the impact fixed point.

``solve_optimal`` minimises ``||M p - p||_2`` over the probability simplex
by projected gradient descent; ``dominant_eigenvector`` is a plain power
method. Both serve as yardsticks for the averaged iteration in
:mod:`sifirank.impact`.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataError, NumericalError

SIMPLEX_ATOL = 1e-12


def project_to_simplex(v):
    """Euclidean projection onto ``{x >= 0, sum(x) = 1}`` (sort and threshold).

    Points already on the simplex are returned unchanged, which makes the
    projection exactly idempotent.
    """
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or len(v) == 0:
        raise DataError("projection needs a non-empty vector")
    if not np.all(np.isfinite(v)):
        raise DataError("cannot project a vector with non-finite entries")
    if np.all(v >= 0) and abs(v.sum() - 1.0) <= SIMPLEX_ATOL:
        return v.copy()
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, len(v) + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1)
    return np.maximum(v - theta, 0.0)


@dataclass(frozen=True)
class StepRule:
    initial: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    max_backtracks: int = 60


@dataclass(frozen=True, eq=False)
class OptimalResult:
    p: np.ndarray
    objective: float
    iterations: int
    converged: bool
    pg_norm: float


def _objective(A, p):
    return float(np.linalg.norm(A @ p))


def solve_optimal(M, step_rule=StepRule(), max_iter=20_000, tol=1e-10, p0=None):
    """Minimise ``||M p - p||_2`` over the probability simplex.

    Projected gradient with Armijo backtracking, started from the uniform
    vector (or ``p0`` if it does better). Stops when the projected-gradient
    step ``||p - proj(p - g)||`` drops below ``tol``; ``converged`` is False
    (with a warning) if ``max_iter`` is hit first.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError(f"need a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise DataError("matrix has non-finite entries")
    n = len(M)
    A = M - np.eye(n)
    p = np.full(n, 1.0 / n)
    f = _objective(A, p)
    if p0 is not None:
        cand = project_to_simplex(p0)
        fc = _objective(A, cand)
        if fc < f:
            p, f = cand, fc
    step = step_rule.initial
    pg = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        Ap = A @ p
        norm = float(np.linalg.norm(Ap))
        if norm < 1e-14:
            return OptimalResult(p, norm, it, True, 0.0)
        g = A.T @ Ap / norm
        pg = float(np.linalg.norm(p - project_to_simplex(p - g)))
        if pg < tol:
            return OptimalResult(p, f, it, True, pg)
        t = step
        for _ in range(step_rule.max_backtracks):
            cand = project_to_simplex(p - t * g)
            fc = _objective(A, cand)
            if fc <= f + step_rule.armijo * float(g @ (cand - p)):
                break
            t *= step_rule.shrink
        else:
            # no admissible step left at machine precision
            return OptimalResult(p, f, it, pg < 1e3 * tol, pg)
        if np.array_equal(cand, p):
            return OptimalResult(p, f, it, True, pg)
        p, f = cand, fc
        step = max(step_rule.initial, 2.0 * t)
    warnings.warn(f"solve_optimal stopped after {max_iter} iterations "
                  f"(projected gradient {pg:.3g})", RuntimeWarning, stacklevel=2)
    return OptimalResult(p, f, it, False, pg)


def relative_error(err_alg, err_opt):
    """``(err_alg - err_opt) / err_opt``."""
    if not err_opt > 0:
        raise NumericalError(f"relative error undefined for optimal objective {err_opt}")
    return (err_alg - err_opt) / err_opt


@dataclass(frozen=True, eq=False)
class EigenResult:
    vector: np.ndarray
    eigenvalue: float
    iterations: int
    converged: bool
    reducible: bool = False


def dominant_eigenvector(M, tol=1e-12, max_iter=100_000, start=None):
    """Plain power iteration with max-norm scaling.

    Returns the iterate rescaled to unit 1-norm and its Rayleigh quotient.
    ``reducible`` is set when some entry of the iterate stays at zero for
    100 consecutive iterations, or for every iteration of a shorter run.
    """
    M = np.asarray(M, dtype=float)
    n = len(M)
    x = np.ones(n) if start is None else np.asarray(start, dtype=float).copy()
    x = x / np.max(np.abs(x))
    zero_run = np.zeros(n, dtype=int)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        y = M @ x
        scale = np.max(np.abs(y))
        if not scale > 0:
            raise NumericalError(f"power iteration collapsed to zero at iteration {it}")
        y = y / scale
        zero_run = np.where(y == 0, zero_run + 1, 0)
        done = np.max(np.abs(y - x)) < tol
        x = y
        if done:
            converged = True
            break
    v = x / np.sum(np.abs(x))
    if v.sum() < 0:
        v = -v
    eig = float(v @ M @ v / (v @ v))
    return EigenResult(v, eig, it, converged, bool(np.any(zero_run >= min(it, 100))))


def averaged_power_method(M, start, tol=1e-6, max_iter=1_000_000):
    """Cesaro average of 1-norm-normalised power iterates.

    Converges for periodic matrices where the plain power method
    oscillates.
    """
    M = np.asarray(M, dtype=float)
    x = np.asarray(start, dtype=float)
    x = x / np.abs(x).sum()
    avg = x.copy()
    it = 0
    for it in range(1, max_iter + 1):
        x = M @ x
        x = x / np.abs(x).sum()
        new = avg + (x - avg) / (it + 1)
        if np.max(np.abs(new - avg)) < tol:
            return new, it
        avg = new
    return avg, it
