"""Deposit shocks, Monte Carlo bands and SIFI buckets.

A tenth of the institutions lose deposits in each run. The impact index is
recomputed per run, summarised per institution with a percentile band, and
institutions are bucketed by quantile thresholds of the mean score. The
uncertainty of the top threshold itself is shown two ways: a DKW band
around the empirical CDF and an order-statistic interval for the quantile.

    python demos/shocks_and_classification.py [runs]
"""
import sys

import numpy as np

from sifirank import ShockConfig, classify, derive_balance_sheets, dkw_band, ecdf, generate_ba
from sifirank.shockmc import monte_carlo_impact
from sifirank.stats import poisson_tail, prob_at_least_r, quantile, quantile_ci

runs = int(sys.argv[1]) if len(sys.argv) > 1 else 100

net = generate_ba(50, 3, 2, rng_seed=1)
sheets = derive_balance_sheets(net, rng_seed=1)
cfg = ShockConfig(fraction_hit=0.1, magnitude_mean=10.0, magnitude_sd=5.0, rng_seed=1)
mc = monte_carlo_impact(net, sheets, cfg, runs=runs)
print(f"{mc.runs} runs, {mc.failed} failed")

cls = classify(mc.mean_impact, (0.5, 0.9), mc.samples)
print(f"thresholds: median {cls.thresholds[0]:.3e}, 90% {cls.thresholds[1]:.3e}")
print(f"bucket sizes: {np.bincount(cls.buckets, minlength=3).tolist()}")

print("\ninstitutions with the highest SIFI probability")
print(" node  mean impact  95% band                 P(SIFI)  log-odds")
for i in np.argsort(-cls.probabilities, kind="stable")[:8]:
    print(f" {i:4d}  {mc.mean_impact[i]:.3e}    [{mc.ci_low[i]:.2e}, {mc.ci_high[i]:.2e}]"
          f"  {cls.probabilities[i]:.2f}     {cls.log_odds[i]:+.2f}")

# Pool all per-run scores to describe the cross-sectional distribution
dist = ecdf(mc.samples.ravel())
band = dkw_band(dist, alpha_prime=0.05)
u90 = quantile(dist, 0.9)
print(f"\npooled scores: n={dist.n}, DKW half-width {band.epsilon:.4f}")
print(f"90% quantile {u90:.3e}, band at that point "
      f"[{band.lower(u90):.3f}, {band.upper(u90):.3f}]")
k, l = quantile_ci(dist, 0.9, 0.05)
s = dist.sorted_samples
print(f"95% interval for the 90% quantile: X_({k}) = {s[k - 1]:.3e} .. X_({l}) = {s[l - 1]:.3e}")

# How many of 50 institutions exceed the threshold, exact and Poisson
scores = ecdf(mc.mean_impact)
u = quantile(scores, 0.9)
tail = 1 - scores(u)
print(f"\nP(at least 45 of 50 at or below u): {prob_at_least_r(scores, u, 45):.4f}")
print(f"Poisson estimate of at most 5 above u: {poisson_tail(50, tail, 5):.4f}")
