"""Empirical distributions of impact scores and SIFI classification.

Covers the ECDF with its DKW band, quantile thresholds and their
order-statistic confidence intervals, binomial and Poisson tail
probabilities for SIFI counts, bucket classification with log-odds, and
the degree-perturbation experiment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import gammaln, logsumexp

from .balance import BalanceParams, derive_balance_sheets
from .errors import ConfigError, DataError, EstimationError
from .network import DirectedFinancialNetwork, draw_pareto, fmt
from .seeding import derive_seed

PROB_CLAMP = 1e-9
DEFAULT_BUCKETS = (0.5, 0.9)


@dataclass(frozen=True, eq=False)
class EmpiricalDistribution:
    sorted_samples: np.ndarray

    @property
    def n(self):
        return len(self.sorted_samples)

    def __call__(self, x):
        return evaluate(self, x)


def ecdf(samples):
    x = np.sort(np.asarray(samples, dtype=float).ravel())
    if len(x) == 0:
        raise DataError("empirical distribution needs at least one sample")
    if not np.all(np.isfinite(x)):
        raise DataError("samples contain non-finite values")
    x.setflags(write=False)
    return EmpiricalDistribution(x)


def evaluate(dist, x):
    """``#(samples <= x) / n``; scalar in, scalar out."""
    counts = np.searchsorted(dist.sorted_samples, x, side="right")
    out = counts / dist.n
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True, eq=False)
class DkwBand:
    """Simultaneous ``1 - alpha_prime`` band around an ECDF."""

    dist: EmpiricalDistribution
    alpha_prime: float
    epsilon: float

    def lower(self, x):
        return np.maximum(np.asarray(evaluate(self.dist, x)) - self.epsilon, 0.0)

    def upper(self, x):
        return np.minimum(np.asarray(evaluate(self.dist, x)) + self.epsilon, 1.0)


def dkw_epsilon(n, alpha_prime):
    if not 0 < alpha_prime < 1:
        raise ConfigError(f"alpha_prime must lie in (0, 1), got {alpha_prime}")
    return math.sqrt(math.log(2 / alpha_prime) / (2 * n))


def dkw_band(dist, alpha_prime=0.05):
    return DkwBand(dist, alpha_prime, dkw_epsilon(dist.n, alpha_prime))


def quantile(dist, p):
    """Smallest sample ``x`` with ``F(x) >= p``."""
    if not 0 < p <= 1:
        raise ConfigError(f"quantile level must lie in (0, 1], got {p}")
    n = dist.n
    # first order index i (1-based) with i/n >= p, compared as i >= p*n
    i = max(math.ceil(p * n), 1)
    # undo float noise such as 0.7 * 10 = 7.000000000000001
    while i > 1 and (i - 1) / n >= p:
        i -= 1
    while i < n and i / n < p:
        i += 1
    return float(dist.sorted_samples[i - 1])


def _log_binom_pmf(n, q, i):
    i = np.asarray(i, dtype=float)
    if q == 0.0:
        return np.where(i == 0, 0.0, -np.inf)
    if q == 1.0:
        return np.where(i == n, 0.0, -np.inf)
    return (gammaln(n + 1) - gammaln(i + 1) - gammaln(n - i + 1)
            + i * math.log(q) + (n - i) * math.log1p(-q))


def binomial_tail(n, q, r):
    """``P(Bin(n, q) >= r)`` summed in log space."""
    if not 0 <= q <= 1:
        raise ConfigError(f"success probability must lie in [0, 1], got {q}")
    if r <= 0:
        return 1.0
    if r > n:
        return 0.0
    i = np.arange(r, n + 1)
    return float(min(math.exp(logsumexp(_log_binom_pmf(n, q, i))), 1.0))


def binomial_cdf(n, q, k):
    """``P(Bin(n, q) <= k)``."""
    if k < 0:
        return 0.0
    if k >= n:
        return 1.0
    i = np.arange(0, k + 1)
    return float(min(math.exp(logsumexp(_log_binom_pmf(n, q, i))), 1.0))


def prob_at_least_r(dist, u, r):
    """Probability that at least ``r`` of ``n`` draws fall at or below ``u``.

    The success probability is the ECDF value at ``u``.
    """
    if not 0 <= r <= dist.n:
        raise ConfigError(f"r must lie in [0, {dist.n}], got {r}")
    return binomial_tail(dist.n, evaluate(dist, u), r)


def quantile_ci(dist_or_n, p, alpha_prime=0.05):
    """Order-statistic indices ``(k, l)`` bracketing the ``p``-quantile.

    ``X_(k) <= u_p`` and ``X_(l) >= u_p`` each hold with probability at
    least ``1 - alpha_prime / 2``:

        k = max{i : P(Bin(n, p) >= i) >= 1 - alpha'/2}
        l = min{i : P(Bin(n, p) <= i - 1) >= 1 - alpha'/2}
    """
    n = dist_or_n if isinstance(dist_or_n, (int, np.integer)) else dist_or_n.n
    if not 0 < p < 1:
        raise ConfigError(f"quantile level must lie in (0, 1), got {p}")
    if not 0 < alpha_prime < 1:
        raise ConfigError(f"alpha_prime must lie in (0, 1), got {alpha_prime}")
    target = 1 - alpha_prime / 2
    k = next((i for i in range(n, 0, -1) if binomial_tail(n, p, i) >= target), None)
    l = next((i for i in range(1, n + 1) if binomial_cdf(n, p, i - 1) >= target), None)
    if k is None or l is None:
        raise EstimationError(
            f"{n} samples are too few for a {100 * (1 - alpha_prime):g}% interval "
            f"around the {p} quantile")
    return k, l


def poisson_tail(n, q_tail, k):
    """``P(Poisson(n * q_tail) <= k)``."""
    if not 0 <= q_tail <= 1:
        raise ConfigError(f"q_tail must lie in [0, 1], got {q_tail}")
    if k < 0:
        return 0.0
    lam = n * q_tail
    if lam == 0:
        return 1.0
    j = np.arange(0, int(k) + 1)
    logs = -lam + j * math.log(lam) - gammaln(j + 1)
    return float(min(math.exp(logsumexp(logs)), 1.0))


def log_odds(p):
    p = np.clip(np.asarray(p, dtype=float), PROB_CLAMP, 1 - PROB_CLAMP)
    out = np.log(p) - np.log1p(-p)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True, eq=False)
class SifiClassification:
    thresholds: np.ndarray
    buckets: np.ndarray
    probabilities: np.ndarray
    log_odds: np.ndarray
    impact: np.ndarray = field(repr=False, default=None)
    degenerate: bool = False


def classify(p, bucket_quantiles=DEFAULT_BUCKETS, samples=None):
    """Bucket institutions by quantile thresholds of their impact scores.

    ``bucket_i`` counts the thresholds strictly below ``p_i``. ``P(SIFI)_i``
    is the share of node ``i``'s own Monte Carlo samples (rows of
    ``samples``) above the top threshold, or the indicator ``p_i > u_top``
    without samples; it is clamped to ``[1e-9, 1 - 1e-9]``. A constant
    score vector puts everyone in bucket 0 and sets ``degenerate``.
    """
    p = np.asarray(getattr(p, "p", p), dtype=float)
    qs = np.asarray(bucket_quantiles, dtype=float)
    if qs.ndim != 1 or len(qs) == 0 or np.any(qs <= 0) or np.any(qs >= 1) \
            or np.any(np.diff(qs) <= 0):
        raise ConfigError(f"bucket quantiles must be strictly increasing in (0, 1), got {qs}")
    dist = ecdf(p)
    thresholds = np.array([quantile(dist, q) for q in qs])
    degenerate = bool(p.max() == p.min())
    if degenerate:
        buckets = np.zeros(len(p), dtype=int)
    else:
        buckets = (p[:, None] > thresholds[None, :]).sum(axis=1)
    top = thresholds[-1]
    if samples is None:
        prob = (p > top).astype(float)
    else:
        s = np.asarray(samples, dtype=float)
        if s.ndim != 2 or s.shape[1] != len(p):
            raise DataError(f"samples must be runs x {len(p)}, got {s.shape}")
        prob = (s > top).mean(axis=0)
    prob = np.clip(prob, PROB_CLAMP, 1 - PROB_CLAMP)
    return SifiClassification(thresholds, buckets, prob, log_odds(prob), p, degenerate)


def write_classification(cls, path, comments=()):
    with Path(path).open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write("node,impact,bucket,p_sifi,log_odds\n")
        for i in range(len(cls.buckets)):
            fh.write(f"{i},{fmt(cls.impact[i])},{cls.buckets[i]},{fmt(cls.probabilities[i])},"
                     f"{fmt(cls.log_odds[i])}\n")


# ---------------------------------------------------------------- perturbation

EDIT_KINDS = ("add_out", "add_in", "remove_out", "remove_in")


def edit_degree(net, target, kind, m, rng_seed=0, pareto_shape=2.0, pareto_scale=1.0):
    """Add or remove ``m`` in- or out-edges at ``target``.

    New counterparties are uniform among nodes not yet linked in that
    direction, and new exposures follow the given Pareto law. Removed edges
    are chosen uniformly among the existing ones.
    """
    if kind not in EDIT_KINDS:
        raise ConfigError(f"unknown edit {kind!r}; expected one of {EDIT_KINDS}")
    if not 0 <= target < net.n:
        raise ConfigError(f"target {target} outside 0..{net.n - 1}")
    if m < 0:
        raise ConfigError(f"edit size must be >= 0, got {m}")
    if m == 0:
        return net
    rng = np.random.default_rng(rng_seed)
    src, dst, x = net.src, net.dst, net.exposure
    outgoing = kind.endswith("out")
    mine = src == target if outgoing else dst == target
    if kind.startswith("remove"):
        idx = np.flatnonzero(mine)
        if len(idx) < m:
            raise ConfigError(f"node {target} has {len(idx)} {kind[7:]}-edges, cannot remove {m}")
        keep = np.ones(net.n_edges, dtype=bool)
        keep[rng.choice(idx, size=m, replace=False)] = False
        return DirectedFinancialNetwork.from_edges(net.n, zip(src[keep], dst[keep], x[keep]))
    linked = set((dst if outgoing else src)[mine].tolist()) | {target}
    free = np.array([j for j in range(net.n) if j not in linked], dtype=np.int64)
    if len(free) < m:
        raise ConfigError(f"node {target} has only {len(free)} non-neighbours, cannot add {m}")
    new = rng.choice(free, size=m, replace=False)
    new_x = draw_pareto(rng, pareto_shape, pareto_scale, m)
    tgt = np.full(m, target, dtype=np.int64)
    add_src, add_dst = (tgt, new) if outgoing else (new, tgt)
    return DirectedFinancialNetwork.from_edges(
        net.n, zip(np.concatenate([src, add_src]), np.concatenate([dst, add_dst]),
                   np.concatenate([x, new_x])))


@dataclass(frozen=True, eq=False)
class PerturbationResult:
    delta_log_odds: float
    log_odds_original: float
    log_odds_edited: float
    p_original: float
    p_edited: float
    edited: DirectedFinancialNetwork = field(repr=False, default=None)


def sifi_log_odds(net, balance, mc_cfg, runs, target, balance_seed=0, phi=1.0,
                  bucket_quantiles=DEFAULT_BUCKETS, tolerance=1e-5):
    """Log-odds that ``target`` lands above the top threshold under shocks."""
    from .shockmc import monte_carlo_impact

    sheets = derive_balance_sheets(net, balance.cap_low, balance.cap_high,
                                   balance.ext_multiplier, balance_seed)
    mc = monte_carlo_impact(net, sheets, mc_cfg, runs, phi=phi, tolerance=tolerance)
    cls = classify(mc.mean_impact, bucket_quantiles, mc.samples)
    return float(cls.probabilities[target]), float(cls.log_odds[target])


def perturbation_experiment(net, target, kind, m, mc_cfg, runs=100, balance=BalanceParams(),
                            balance_seed=0, edit_seed=0, phi=1.0,
                            bucket_quantiles=DEFAULT_BUCKETS, tolerance=1e-5):
    """Change in the target's SIFI log-odds caused by a degree edit.

    Both networks get balance sheets from the same simulator parameters and
    seed, and the same shock seeds, so the edit is the only difference.
    """
    edited = edit_degree(net, target, kind, m, edit_seed, balance.pareto_shape,
                         balance.pareto_scale)
    if edited is net:
        p0, lo0 = sifi_log_odds(net, balance, mc_cfg, runs, target, balance_seed, phi,
                                bucket_quantiles, tolerance)
        return PerturbationResult(0.0, lo0, lo0, p0, p0, edited)
    p0, lo0 = sifi_log_odds(net, balance, mc_cfg, runs, target, balance_seed, phi,
                            bucket_quantiles, tolerance)
    p1, lo1 = sifi_log_odds(edited, balance, mc_cfg, runs, target, balance_seed, phi,
                            bucket_quantiles, tolerance)
    return PerturbationResult(lo1 - lo0, lo0, lo1, p0, p1, edited)


@dataclass(frozen=True)
class ExperimentRow:
    edit_kind: str
    m: int
    runs: int
    mean_delta_log_odds: float
    sign_agreement_fraction: float


EXPECTED_SIGN = {"add_out": 1, "add_in": -1, "remove_out": -1, "remove_in": 1}


def summarise_deltas(kind, m, runs, deltas):
    """Mean delta and the share of replications with the expected sign."""
    d = np.asarray(deltas, dtype=float)
    agree = float(np.mean(np.sign(d) == EXPECTED_SIGN[kind]))
    return ExperimentRow(kind, m, runs, float(d.mean()), agree)


def write_experiment(rows, path, comments=()):
    with Path(path).open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write("edit_kind,m,runs,mean_delta_log_odds,sign_agreement_fraction\n")
        for r in rows:
            fh.write(f"{r.edit_kind},{r.m},{r.runs},{fmt(r.mean_delta_log_odds)},"
                     f"{fmt(r.sign_agreement_fraction)}\n")


def seed_for_replication(root, rep):
    return derive_seed(root, "replication", rep)
