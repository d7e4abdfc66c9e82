"""Absorbing-Markov-chain baseline ranking.

Flow moves along exposures; making one institution absorbing and timing
how fast flow reaches it measures how much of the system it can soak up.
The inverse is used so that larger means more systemic.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats as sps

from .errors import DataError, EstimationError, UnreachableSinkError
from .network import fmt


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    P: np.ndarray
    dangling: np.ndarray

    @property
    def n(self):
        return len(self.P)


def to_transition(net_or_weights):
    """Row-normalise exposures; rows without out-flow become uniform."""
    w = getattr(net_or_weights, "exposure_matrix", net_or_weights)
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] == 0:
        raise DataError("transition matrix needs a non-empty square weight matrix")
    if np.any(w < 0) or not np.all(np.isfinite(w)):
        raise DataError("weights must be finite and non-negative")
    n = len(w)
    out = w.sum(axis=1)
    dangling = out <= 0
    P = np.where(dangling[:, None], 1.0 / n, w / np.where(dangling, 1.0, out)[:, None])
    return TransitionMatrix(P, dangling)


def _reachers(P, sink):
    """Nodes with a positive-probability path to ``sink``."""
    reach = np.zeros(len(P), dtype=bool)
    reach[sink] = True
    frontier = [sink]
    while frontier:
        nxt = np.flatnonzero((P[:, frontier] > 0).any(axis=1) & ~reach)
        reach[nxt] = True
        frontier = nxt.tolist()
    return reach


def absorption_times(tm, sink):
    """Expected steps to absorption at ``sink`` from every other node.

    Returns ``(nodes, times)``. Raises :class:`UnreachableSinkError` if some
    node cannot reach the sink, which is exactly when ``I - Q`` is singular.
    """
    P = getattr(tm, "P", tm)
    n = len(P)
    if not 0 <= sink < n:
        raise DataError(f"sink {sink} outside 0..{n - 1}")
    others = np.array([i for i in range(n) if i != sink], dtype=int)
    if len(others) == 0:
        raise DataError("a single-node chain has no transient states")
    reach = _reachers(P, sink)
    if not reach.all():
        raise UnreachableSinkError(sink, np.flatnonzero(~reach).tolist())
    Q = P[np.ix_(others, others)]
    t = np.linalg.solve(np.eye(len(others)) - Q, np.ones(len(others)))
    return others, t


def sinkrank(tm, sink, weights=None):
    """Mean absorption time at ``sink`` (weighted by ``weights`` if given)."""
    nodes, t = absorption_times(tm, sink)
    if weights is None:
        return float(t.mean())
    w = np.asarray(weights, dtype=float)[nodes]
    if not w.sum() > 0:
        raise DataError("sinkrank weights must have positive mass off the sink")
    return float(w @ t / w.sum())


def inv_sinkrank(tm, sink, weights=None):
    return 1.0 / sinkrank(tm, sink, weights)


def sinkrank_all(tm, weights=None, inverse=True):
    """Score every node as the sink; unreachable sinks score NaN."""
    P = getattr(tm, "P", tm)
    out = np.empty(len(P))
    for s in range(len(P)):
        try:
            v = sinkrank(P, s, weights)
        except UnreachableSinkError:
            v = np.nan
        out[s] = 1.0 / v if inverse else v
    return out


def rank_correlation(a, b):
    """Spearman rho (average ranks) and Kendall tau-b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1 or len(a) < 3:
        raise DataError("rank correlation needs two equal-length vectors of length >= 3")
    if np.all(a == a[0]) or np.all(b == b[0]):
        raise EstimationError("rank correlation is undefined for a constant vector")
    rho = sps.spearmanr(a, b).statistic
    tau = sps.kendalltau(a, b, variant="b").statistic
    return float(rho), float(tau)


COMPARISON_FIELDS = ("name", "deg_out", "deg_in", "impact_index", "inv_sinkrank",
                     "total_received", "total_sent", "equity")


@dataclass(frozen=True)
class ComparisonEntry:
    name: str
    deg_out: int
    deg_in: int
    impact_index: float
    inv_sinkrank: float
    total_received: float
    total_sent: float
    equity: float


def comparison_entries(net, sheets, impact, inv_sr, names=None):
    """One row per institution; received/sent are interbank asset/liability totals."""
    p = np.asarray(getattr(impact, "p", impact), dtype=float)
    a = net.adjacency
    names = names or [str(i) for i in range(net.n)]
    return [ComparisonEntry(names[i], int(a[i].sum()), int(a[:, i].sum()), float(p[i]),
                            float(inv_sr[i]), float(sheets.a_int[i]), float(sheets.l_int[i]),
                            float(sheets.capital[i]))
            for i in range(net.n)]


def write_comparison(entries, path, comments=()):
    with Path(path).open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(COMPARISON_FIELDS) + "\n")
        for e in entries:
            fh.write(f"{e.name},{e.deg_out},{e.deg_in},{fmt(e.impact_index)},"
                     f"{fmt(e.inv_sinkrank)},{fmt(e.total_received)},{fmt(e.total_sent)},"
                     f"{fmt(e.equity)}\n")


def read_comparison(path):
    with Path(path).open() as fh:
        rows = list(csv.DictReader(line for line in fh if line.strip() and not line.startswith("#")))
    if not rows or tuple(rows[0]) != COMPARISON_FIELDS:
        raise DataError(f"{path}: expected header {','.join(COMPARISON_FIELDS)}")
    try:
        return [ComparisonEntry(r["name"], int(r["deg_out"]), int(r["deg_in"]),
                                float(r["impact_index"]), float(r["inv_sinkrank"]),
                                float(r["total_received"]), float(r["total_sent"]),
                                float(r["equity"]))
                for r in rows]
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc


def rank_entries(entries, key="impact_index"):
    """Entries by descending ``key``, ties by name."""
    return sorted(entries, key=lambda e: (-getattr(e, key), e.name))
