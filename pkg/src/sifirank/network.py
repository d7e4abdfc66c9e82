"""Directed interbank exposure networks.

An edge ``src -> dst`` with weight ``exposure`` means ``src`` owes
``exposure`` to ``dst``: row sums of the exposure matrix are interbank
liabilities, column sums are interbank assets.
"""
from __future__ import annotations

import csv
import heapq
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError, EstimationError
from .seeding import derive_seed

DISTANCE_MODES = ("unit", "inverse-weight")


@dataclass(frozen=True, eq=False)
class DirectedFinancialNetwork:
    """Immutable directed weighted graph on nodes ``0..n-1``.

    Use :meth:`from_edges` to build one; it validates the edges and merges
    parallel edges by summing their exposures.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    exposure: np.ndarray

    @classmethod
    def from_edges(cls, n, edges):
        """Build a network from ``(src, dst, exposure)`` triples."""
        n = int(n)
        if n < 0:
            raise DataError(f"node count must be non-negative, got {n}")
        merged = {}
        for s, d, x in edges:
            s, d, x = int(s), int(d), float(x)
            if not (0 <= s < n and 0 <= d < n):
                raise DataError(f"edge ({s}, {d}) references a node outside 0..{n - 1}")
            if s == d:
                raise DataError(f"self-loop on node {s}")
            if not math.isfinite(x) or x <= 0:
                raise DataError(f"edge ({s}, {d}) has non-positive exposure {x}")
            merged[(s, d)] = merged.get((s, d), 0.0) + x
        keys = sorted(merged)
        src = np.array([k[0] for k in keys], dtype=np.int64)
        dst = np.array([k[1] for k in keys], dtype=np.int64)
        exposure = np.array([merged[k] for k in keys], dtype=float)
        for arr in (src, dst, exposure):
            arr.setflags(write=False)
        return cls(n, src, dst, exposure)

    @property
    def n_edges(self):
        return len(self.src)

    def edges(self):
        return list(zip(self.src.tolist(), self.dst.tolist(), self.exposure.tolist()))

    @cached_property
    def exposure_matrix(self):
        """Dense ``n x n`` matrix with ``Omega[src, dst] = exposure``."""
        omega = np.zeros((self.n, self.n))
        omega[self.src, self.dst] = self.exposure
        omega.setflags(write=False)
        return omega

    @cached_property
    def adjacency(self):
        a = np.zeros((self.n, self.n), dtype=bool)
        a[self.src, self.dst] = True
        a.setflags(write=False)
        return a

    def with_exposures(self, exposure):
        exposure = np.asarray(exposure, dtype=float)
        if exposure.shape != self.exposure.shape:
            raise DataError("exposure vector does not match the edge count")
        return DirectedFinancialNetwork.from_edges(
            self.n, zip(self.src.tolist(), self.dst.tolist(), exposure.tolist()))

    def same_as(self, other):
        """Exact structural and numerical equality."""
        return (self.n == other.n
                and np.array_equal(self.src, other.src)
                and np.array_equal(self.dst, other.dst)
                and np.array_equal(self.exposure, other.exposure))


@dataclass(frozen=True, eq=False)
class DegreeProfile:
    in_degree: np.ndarray
    out_degree: np.ndarray


@dataclass(frozen=True, eq=False)
class CentralityScores:
    closeness: np.ndarray
    betweenness: np.ndarray


# ---------------------------------------------------------------------------
# generators

def draw_pareto(rng, shape, scale, size):
    """Classical Pareto draws with support ``[scale, inf)``."""
    if not shape > 1:
        raise ConfigError(f"pareto shape must exceed 1 (finite mean), got {shape}")
    if not scale > 0:
        raise ConfigError(f"pareto scale must be positive, got {scale}")
    return scale * (1.0 + rng.pareto(shape, size))


def _orient_and_weight(n, links, rng_seed, pareto_shape, pareto_scale):
    rng = np.random.default_rng(rng_seed)
    flips = rng.random(len(links)) < 0.5
    oriented = [(b, a) if f else (a, b) for (a, b), f in zip(links, flips)]
    wrng = np.random.default_rng(derive_seed(rng_seed, "exposures"))
    x = draw_pareto(wrng, pareto_shape, pareto_scale, len(oriented))
    return DirectedFinancialNetwork.from_edges(
        n, ((a, b, w) for (a, b), w in zip(oriented, x.tolist())))


def ba_links(n, m0, k, rng):
    """Undirected Barabasi-Albert links: ``m0``-clique plus ``k`` links per new node."""
    links = [(i, j) for i in range(m0) for j in range(i + 1, m0)]
    degree = np.zeros(n)
    degree[:m0] = m0 - 1
    for v in range(m0, n):
        weights = degree[:v]
        total = weights.sum()
        prob = weights / total if total > 0 else None
        targets = rng.choice(v, size=k, replace=False, p=prob)
        for t in sorted(targets.tolist()):
            links.append((v, t))
            degree[t] += 1
        degree[v] += k
    return links


def generate_ba(n, m0, k, rng_seed, pareto_shape=2.0, pareto_scale=1.0):
    """Scale-free network by preferential attachment with random orientation.

    Each structural link is oriented by a fair coin and weighted by an
    independent Pareto exposure.
    """
    if not (isinstance(n, (int, np.integer)) and n >= m0 >= k >= 1):
        raise ConfigError(f"need n >= m0 >= k >= 1, got n={n}, m0={m0}, k={k}")
    rng = np.random.default_rng(derive_seed(rng_seed, "ba-structure"))
    links = ba_links(int(n), int(m0), int(k), rng)
    return _orient_and_weight(int(n), links, derive_seed(rng_seed, "ba-orientation"),
                              pareto_shape, pareto_scale)


def generate_complete(n, rng_seed, pareto_shape=2.0, pareto_scale=1.0):
    """Every ordered pair ``(i, j)``, ``i != j``, carries an exposure."""
    if not (isinstance(n, (int, np.integer)) and n >= 2):
        raise ConfigError(f"complete network needs n >= 2, got {n}")
    n = int(n)
    rng = np.random.default_rng(derive_seed(rng_seed, "exposures"))
    x = draw_pareto(rng, pareto_shape, pareto_scale, n * (n - 1))
    pairs = ((i, j) for i in range(n) for j in range(n) if i != j)
    return DirectedFinancialNetwork.from_edges(
        n, ((i, j, w) for (i, j), w in zip(pairs, x.tolist())))


# ---------------------------------------------------------------------------
# degrees and centralities

def degrees(net):
    a = net.adjacency
    return DegreeProfile(in_degree=a.sum(axis=0).astype(int),
                         out_degree=a.sum(axis=1).astype(int))


def edge_lengths(net, distance_mode="unit"):
    """Length of each edge under the chosen distance mode.

    ``inverse-weight`` uses ``max_exposure / exposure`` so the strongest
    exposure has length 1 and weaker ones are longer.
    """
    if distance_mode == "unit":
        return np.ones(net.n_edges)
    if distance_mode == "inverse-weight":
        if net.n_edges == 0:
            return np.ones(0)
        return net.exposure.max() / net.exposure
    raise ConfigError(f"unknown distance mode {distance_mode!r}; use one of {DISTANCE_MODES}")


def _geodesics_unit(adjacency):
    n = len(adjacency)
    a = adjacency.astype(float)
    dist = np.full((n, n), np.inf)
    sigma = np.zeros((n, n))
    frontier = np.eye(n)
    visited = np.eye(n, dtype=bool)
    np.fill_diagonal(dist, 0.0)
    np.fill_diagonal(sigma, 1.0)
    level = 0
    while frontier.any():
        level += 1
        counts = frontier @ a
        new = (counts > 0) & ~visited
        if not new.any():
            break
        frontier = np.where(new, counts, 0.0)
        dist[new] = level
        sigma[new] = counts[new]
        visited |= new
    return dist, sigma


def _geodesics_weighted(net, lengths, rtol=1e-12):
    n = net.n
    succ = [[] for _ in range(n)]
    for s, d, w in zip(net.src.tolist(), net.dst.tolist(), lengths.tolist()):
        succ[s].append((d, w))
    dist = np.full((n, n), np.inf)
    sigma = np.zeros((n, n))
    for source in range(n):
        d_row = dist[source]
        s_row = sigma[source]
        d_row[source] = 0.0
        s_row[source] = 1.0
        done = np.zeros(n, dtype=bool)
        heap = [(0.0, source)]
        while heap:
            du, u = heapq.heappop(heap)
            if done[u]:
                continue
            done[u] = True
            for v, w in succ[u]:
                alt = du + w
                tol = rtol * max(alt, 1.0)
                if alt < d_row[v] - tol:
                    d_row[v] = alt
                    s_row[v] = s_row[u]
                    heapq.heappush(heap, (alt, v))
                elif abs(alt - d_row[v]) <= tol and not done[v]:
                    s_row[v] += s_row[u]
    return dist, sigma


def geodesics(net, distance_mode="unit"):
    """All-pairs shortest distances and shortest-path counts.

    Returns ``(dist, sigma)`` with ``dist[s, t] = inf`` and
    ``sigma[s, t] = 0`` when ``t`` is unreachable from ``s``.
    """
    if distance_mode == "unit":
        return _geodesics_unit(net.adjacency)
    return _geodesics_weighted(net, edge_lengths(net, distance_mode))


def closeness_from_distances(dist):
    n = len(dist)
    cc = np.zeros(n)
    if n < 2:
        return cc
    finite = np.isfinite(dist)
    np.fill_diagonal(finite, False)
    reach = finite.sum(axis=1)
    total = np.where(finite, dist, 0.0).sum(axis=1)
    ok = (reach > 0) & (total > 0)
    cc[ok] = (reach[ok] / (n - 1)) * (reach[ok] / total[ok])
    return cc


def betweenness_from_geodesics(dist, sigma, rtol=1e-9):
    """Pair-pooled betweenness normalized by ``C(n-1, 2)``.

    For an unordered pair ``{j, k}`` the geodesics are the shortest
    ``j -> k`` paths together with the shortest ``k -> j`` paths; node ``i``
    scores the fraction of them that pass through it.
    """
    n = len(dist)
    if n < 3:
        raise ConfigError(f"betweenness needs n >= 3, got {n}")
    pair_total = sigma + sigma.T
    bc = np.zeros(n)
    idx = np.arange(n)
    for i in range(n):
        via = dist[:, i, None] + dist[None, i, :]
        with np.errstate(invalid="ignore"):
            on_path = np.isfinite(via) & (np.abs(via - dist) <= rtol * np.maximum(dist, 1.0))
        through = np.where(on_path, sigma[:, i, None] * sigma[None, i, :], 0.0)
        through[i, :] = 0.0
        through[:, i] = 0.0
        through[idx, idx] = 0.0
        pooled = through + through.T
        with np.errstate(invalid="ignore", divide="ignore"):
            frac = np.where(pair_total > 0, pooled / pair_total, 0.0)
        bc[i] = np.triu(frac, 1).sum()
    return bc / math.comb(n - 1, 2)


def closeness(net, distance_mode="unit"):
    """Closeness with the Wasserman-Faust correction for unreachable nodes.

    ``CC_i = (R_i / (n-1)) * (R_i / sum_j d_ij)`` where ``R_i`` counts the
    nodes reachable from ``i``; equals ``(n-1) / sum_j d_ij`` on strongly
    connected graphs and 0 for nodes that reach nothing.
    """
    dist, _ = geodesics(net, distance_mode)
    return closeness_from_distances(dist)


def betweenness(net, distance_mode="unit"):
    if net.n < 3:
        raise ConfigError(f"betweenness needs n >= 3, got {net.n}")
    dist, sigma = geodesics(net, distance_mode)
    return betweenness_from_geodesics(dist, sigma)


def centrality(net, distance_mode="unit"):
    """Closeness and betweenness from a single all-pairs geodesic pass."""
    dist, sigma = geodesics(net, distance_mode)
    cc = closeness_from_distances(dist)
    bc = betweenness_from_geodesics(dist, sigma) if net.n >= 3 else np.zeros(net.n)
    return CentralityScores(closeness=cc, betweenness=bc)


def power_law_exponent(degree_values):
    """Tail exponent from a least-squares fit of the log-log CCDF.

    Only values >= 1 are used. Returns ``-slope`` of
    ``log P(D >= d)`` against ``log d`` over the distinct values ``d``.
    """
    d = np.asarray(degree_values, dtype=float)
    d = np.sort(d[d >= 1])
    if len(d) < 10:
        raise EstimationError(f"need at least 10 positive degrees, got {len(d)}")
    values, first = np.unique(d, return_index=True)
    if len(values) < 2:
        raise EstimationError("degree values are all equal; slope undefined")
    ccdf = (len(d) - first) / len(d)
    slope, _ = np.polyfit(np.log(values), np.log(ccdf), 1)
    return float(-slope)


# ---------------------------------------------------------------------------
# CSV interfaces

def fmt(x):
    """17 significant digits, enough for an exact float round-trip."""
    return format(float(x), ".17g")


def _data_lines(handle):
    for line in handle:
        if line.strip() and not line.startswith("#"):
            yield line


def write_edge_list(net, path, comments=()):
    path = Path(path)
    with path.open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(f"# n={net.n}\n")
        fh.write("src,dst,exposure\n")
        for s, d, x in net.edges():
            fh.write(f"{s},{d},{fmt(x)}\n")


def read_edge_list(path, n=None):
    """Load an edge-list CSV written by :func:`write_edge_list`.

    The node count comes from ``n``, else a ``# n=...`` comment, else the
    largest node id plus one.
    """
    path = Path(path)
    declared = None
    text = path.read_text().splitlines()
    for line in text:
        if line.startswith("# n="):
            declared = int(line[4:].strip())
    rows = list(csv.DictReader(_data_lines(text)))
    if rows and set(rows[0]) != {"src", "dst", "exposure"}:
        raise DataError(f"{path}: expected header src,dst,exposure")
    try:
        edges = [(int(r["src"]), int(r["dst"]), float(r["exposure"])) for r in rows]
    except (TypeError, ValueError) as exc:
        raise DataError(f"{path}: {exc}") from None
    if n is None:
        n = declared
    if n is None:
        n = 1 + max((max(s, d) for s, d, _ in edges), default=-1)
    return DirectedFinancialNetwork.from_edges(n, edges)


@dataclass(frozen=True, eq=False)
class BankSummary:
    """Per-bank summary rows as published for a payment network."""

    name: list
    deg_out: np.ndarray
    deg_in: np.ndarray
    total_received: np.ndarray
    total_sent: np.ndarray
    equity: np.ndarray


BANK_SUMMARY_FIELDS = ("name", "deg_out", "deg_in", "total_received", "total_sent", "equity")


def read_bank_summary(path):
    """Load bank summaries; extra columns (e.g. scores) are ignored."""
    with Path(path).open() as fh:
        rows = list(csv.DictReader(_data_lines(fh)))
    missing = [f for f in BANK_SUMMARY_FIELDS if not rows or f not in rows[0]]
    if missing:
        raise DataError(f"{path}: missing column(s) {','.join(missing)}")
    try:
        return BankSummary(
            name=[r["name"] for r in rows],
            deg_out=np.array([int(r["deg_out"]) for r in rows]),
            deg_in=np.array([int(r["deg_in"]) for r in rows]),
            total_received=np.array([float(r["total_received"]) for r in rows]),
            total_sent=np.array([float(r["total_sent"]) for r in rows]),
            equity=np.array([float(r["equity"]) for r in rows]),
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
