"""Impact index by averaged fixed-point iteration.

The recursion is

    p[1]   = W_bc @ r
    p[k+1] = k/(k+1) * W_cc @ p[k] + 1/(k+1) * W_bc @ r

where ``W_cc`` and ``W_bc`` are vulnerability weights with row ``i``
scaled by the closeness and (rescaled) betweenness of institution ``i``.
Writing ``q[k] = k * p[k]`` turns it into ``q[k+1] = W_cc @ q[k] + W_bc @ r``,
so the iteration settles (with ``p`` shrinking like ``1/k``) exactly when
the spectral radius of ``W_cc`` is below one.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, NumericalError
from .network import fmt

BETWEENNESS_FLOOR = 1e-3


@dataclass(frozen=True, eq=False)
class IterationMatrices:
    W_cc: np.ndarray
    W_bc: np.ndarray
    r: np.ndarray

    @property
    def n(self):
        return len(self.r)

    @property
    def direct(self):
        """Direct-effect vector ``W_bc @ r``; the first iterate."""
        return self.W_bc @ self.r


@dataclass(frozen=True, eq=False)
class ImpactVector:
    p: np.ndarray
    iterations: int
    converged: bool
    residual: float
    history: np.ndarray = field(default=None, repr=False)

    def __len__(self):
        return len(self.p)


def rescale_betweenness(bc, floor=BETWEENNESS_FLOOR):
    """Affine map of ``bc`` onto ``[floor, 1]``; a constant vector maps to ones."""
    bc = np.asarray(bc, dtype=float)
    lo, hi = bc.min(), bc.max()
    if hi - lo <= 0:
        return np.ones_like(bc)
    return floor + (1 - floor) * (bc - lo) / (hi - lo)


def build_iteration_matrices(w, cc, bc, r, bc_floor=BETWEENNESS_FLOOR):
    """Row-scale vulnerability weights by closeness and rescaled betweenness."""
    w = np.asarray(w, dtype=float)
    cc, bc, r = (np.asarray(v, dtype=float) for v in (cc, bc, r))
    n = len(r)
    if w.shape != (n, n) or cc.shape != (n,) or bc.shape != (n,):
        raise DataError(
            f"dimension mismatch: w {w.shape}, closeness {cc.shape}, "
            f"betweenness {bc.shape}, ratio {r.shape}")
    bc_scaled = rescale_betweenness(bc, bc_floor) if n else bc
    return IterationMatrices(W_cc=cc[:, None] * w, W_bc=bc_scaled[:, None] * w, r=r)


def iterate_impact(mats, tolerance=1e-5, max_iter=100_000, alpha=None, keep_history=False):
    """Run the averaged fixed-point iteration until successive iterates agree.

    Stops when ``max|p[k+1] - p[k]| < tolerance``. ``iterations`` counts the
    updates performed. With ``alpha`` set, the averaging schedule is
    replaced by the constant weights ``alpha`` and ``1 - alpha``.
    """
    if not tolerance > 0:
        raise ConfigError(f"tolerance must be positive, got {tolerance}")
    if max_iter < 1:
        raise ConfigError(f"max_iter must be at least 1, got {max_iter}")
    if alpha is not None and not 0 <= alpha < 1:
        raise ConfigError(f"fixed alpha must lie in [0, 1), got {alpha}")
    W_cc = mats.W_cc
    direct = mats.direct
    p = direct.copy()
    if not np.all(np.isfinite(p)):
        raise NumericalError("non-finite initial impact vector")
    history = []
    diff = np.inf
    k = 0
    for k in range(1, max_iter + 1):
        a = k / (k + 1) if alpha is None else alpha
        with np.errstate(over="ignore", invalid="ignore"):
            p_next = a * (W_cc @ p) + (1 - a) * direct
        if not np.all(np.isfinite(p_next)):
            raise NumericalError(f"non-finite impact values at iteration {k}")
        diff = float(np.max(np.abs(p_next - p))) if len(p) else 0.0
        p = p_next
        if keep_history:
            history.append(diff)
        if diff < tolerance:
            break
    return ImpactVector(p=p, iterations=k, converged=diff < tolerance, residual=diff,
                        history=np.array(history) if keep_history else None)


def rank_institutions(p):
    """``(node, score)`` pairs by descending score, ties by ascending node id."""
    p = np.asarray(getattr(p, "p", p), dtype=float)
    order = np.lexsort((np.arange(len(p)), -p))
    return [(int(i), float(p[i])) for i in order]


def iteration_matrix(mats, iterations=None, alpha=None):
    """``M = alpha W_cc + (1 - alpha) W_bc diag(r)``.

    ``alpha`` defaults to ``k/(k+1)`` at ``k = iterations``.
    """
    if alpha is None:
        if iterations is None:
            raise ConfigError("give either iterations or alpha")
        alpha = iterations / (iterations + 1)
    return alpha * mats.W_cc + (1 - alpha) * mats.W_bc * mats.r[None, :]


def residual_norm(mats, p, iterations=None, alpha=None):
    """``||M p - p||_2`` for ``p`` rescaled onto the probability simplex."""
    if isinstance(p, ImpactVector):
        if iterations is None and alpha is None:
            iterations = p.iterations
        p = p.p
    p = np.asarray(p, dtype=float)
    total = p.sum()
    if not total > 0:
        raise DataError("impact vector must have a positive sum to be normalised")
    p = p / total
    M = iteration_matrix(mats, iterations, alpha)
    return float(np.linalg.norm(M @ p - p))


def write_impact(impact, path, comments=()):
    ranking = rank_institutions(impact)
    rank_of = {node: pos + 1 for pos, (node, _) in enumerate(ranking)}
    p = getattr(impact, "p", impact)
    with Path(path).open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write("node,impact_index,rank\n")
        for i, v in enumerate(p):
            fh.write(f"{i},{fmt(v)},{rank_of[i]}\n")


def read_impact(path):
    with Path(path).open() as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    rows.sort(key=lambda r: int(r["node"]))
    return np.array([float(r["impact_index"]) for r in rows])
