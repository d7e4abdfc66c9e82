from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, stats as sps

from sifirank import derive_balance_sheets, generate_ba
from sifirank.errors import ConfigError, NumericalError
from sifirank.shockmc import (ShockConfig, apply_shocks, monte_carlo_impact, n_shocked,
                              write_runs, write_summary)


def test_full_fraction_zero_sd():
    eps = apply_shocks(7, ShockConfig(1.0, 3.0, 0.0))
    assert np.array_equal(eps, np.full(7, -3.0))


def test_shocked_count():
    eps = apply_shocks(100, ShockConfig(0.1, 2.0, 1.0, rng_seed=4))
    assert np.count_nonzero(eps) == 10 and np.all(eps <= 0)
    assert n_shocked(30, 0.1) == 3  # 0.1 * 30 is 3.0000000000000004 in floating point
    assert n_shocked(25, 0.1) == 3


def test_shocks_deterministic(small_ba):
    _, sh = small_ba
    cfg = ShockConfig(0.2, 1.0, 0.5, rng_seed=17)
    assert np.array_equal(apply_shocks(sh, cfg), apply_shocks(sh, cfg))
    assert not np.array_equal(apply_shocks(sh, cfg), apply_shocks(sh, ShockConfig(0.2, 1.0, 0.5, rng_seed=18)))


@pytest.mark.parametrize("kwargs", [{"fraction_hit": 0.0}, {"fraction_hit": 1.2},
                                    {"magnitude_sd": -1.0}, {"sign": "positive"},
                                    {"magnitude_mean": float("nan")}])
def test_config_errors(kwargs):
    with pytest.raises(ConfigError):
        ShockConfig(**kwargs)


def test_too_few_nodes_hit():
    with pytest.raises(ConfigError):
        apply_shocks(5, ShockConfig(0.1))


def test_zero_magnitude_runs_identical(small_ba):
    net, sh = small_ba
    s = monte_carlo_impact(net, sh, ShockConfig(0.2, 0.0, 0.0, rng_seed=1), runs=10)
    assert np.array_equal(s.ci_low, s.ci_high) and np.array_equal(s.mean_impact, s.ci_low)
    assert s.runs == 10 and s.failed == 0


def test_ci_contains_mean_ba50():
    net = generate_ba(50, 3, 2, 0)
    s = monte_carlo_impact(net, derive_balance_sheets(net, rng_seed=0),
                           ShockConfig(0.1, 10.0, 5.0, rng_seed=0), runs=100)
    assert np.all(s.ci_low <= s.mean_impact) and np.all(s.mean_impact <= s.ci_high)
    assert s.samples.shape == (100, 50)


@given(st.integers(0, 10_000), st.floats(0.05, 0.5), st.floats(0, 30))
def test_ci_ordering_property(seed, frac, mean):
    net = generate_ba(20, 3, 2, seed % 7)
    sh = derive_balance_sheets(net, rng_seed=seed % 7)
    s = monte_carlo_impact(net, sh, ShockConfig(frac, mean, mean / 2, rng_seed=seed), runs=5)
    assert np.all(s.ci_low <= s.mean_impact) and np.all(s.mean_impact <= s.ci_high)


def test_run_results_independent_of_run_count(small_ba):
    net, sh = small_ba
    cfg = ShockConfig(0.2, 5.0, 2.0, rng_seed=3)
    a = monte_carlo_impact(net, sh, cfg, runs=5)
    b = monte_carlo_impact(net, sh, cfg, runs=8)
    assert np.array_equal(a.samples, b.samples[:5])


def test_fraction_grid_is_used(small_ba):
    net, sh = small_ba
    s = monte_carlo_impact(net, sh, ShockConfig(0.1, 5.0, 2.0), runs=40, fraction_grid=[0.1, 0.5])
    assert set(s.fractions.tolist()) == {0.1, 0.5}
    with pytest.raises(ConfigError):
        monte_carlo_impact(net, sh, ShockConfig(0.1), runs=1)


class FlakyModel:
    """Fails every run whose first shock draw is below a cut."""

    def __init__(self, n, cut):
        self.n, self.cut = n, cut

    def impact(self, eps, tolerance, max_iter):
        if eps.min() < self.cut:
            raise NumericalError("synthetic failure")
        return SimpleNamespace(p=np.exp(eps), converged=True)


def test_failed_runs_are_counted_and_capped():
    net = SimpleNamespace(n=4)
    cfg = ShockConfig(0.25, 1.0, 1.0, rng_seed=2)
    # half-normal(1, 1): P(|X| > 2.5) is about 0.07, below the 20% cap
    s = monte_carlo_impact(net, None, cfg, runs=200, model=FlakyModel(4, -2.5))
    assert s.failed > 0 and s.runs + s.failed == 200
    with pytest.raises(NumericalError):
        monte_carlo_impact(net, None, cfg, runs=200, model=FlakyModel(4, -0.5))


def test_doubling_magnitude_is_paired_and_recorded():
    # direction is not asserted; the paired difference must be non-zero and reproducible
    diffs = []
    for seed in range(3):
        net = generate_ba(40, 3, 2, seed)
        sh = derive_balance_sheets(net, rng_seed=seed)
        a = monte_carlo_impact(net, sh, ShockConfig(0.1, 5.0, 2.0, rng_seed=seed), runs=20)
        b = monte_carlo_impact(net, sh, ShockConfig(0.1, 10.0, 4.0, rng_seed=seed), runs=20)
        diffs.append(b.mean_impact - a.mean_impact)
    assert all(np.any(d != 0) for d in diffs)
    print("paired mean change after doubling:", [float(d.mean()) for d in diffs])


class ExpModel:
    """Impact equal to exp(eps) per node: an analytic function of each node's shock."""

    def impact(self, eps, tolerance, max_iter):
        return SimpleNamespace(p=np.exp(eps), converged=True)


def test_percentile_interval_coverage_on_analytic_case():
    mu, sd, runs = 1.0, 0.5, 10_000
    cfg = ShockConfig(0.5, mu, sd, rng_seed=5)
    s = monte_carlo_impact(SimpleNamespace(n=2), None, cfg, runs=runs, model=ExpModel())
    # node 0 is hit in half the runs: f = 1 otherwise, exp(-|X|) when hit
    pdf = sps.norm(mu, sd).pdf
    hit_mean = integrate.quad(lambda x: np.exp(-abs(x)) * pdf(x), -np.inf, np.inf)[0]
    true_mean = 0.5 + 0.5 * hit_mean
    assert abs(s.mean_impact[0] - true_mean) < 3 * s.samples[:, 0].std() / np.sqrt(runs)
    assert s.ci_low[0] <= true_mean <= s.ci_high[0]
    # fresh draws land inside the interval at the nominal rate
    fresh = monte_carlo_impact(SimpleNamespace(n=2), None, ShockConfig(0.5, mu, sd, rng_seed=6),
                               runs=runs, model=ExpModel()).samples[:, 0]
    inside = np.mean((fresh >= s.ci_low[0]) & (fresh <= s.ci_high[0]))
    # the interval is built from node 0's atom at 1, so only the lower tail is open
    lower_mass = np.mean(fresh < s.ci_low[0])
    sigma = np.sqrt(2 * 0.025 * 0.975 / runs)
    assert abs(lower_mass - 0.025) < 3 * sigma
    assert inside >= 0.95 - 3 * sigma


def test_csv_writers(tmp_path, small_ba):
    net, sh = small_ba
    s = monte_carlo_impact(net, sh, ShockConfig(0.1, 5.0, 2.0), runs=3)
    write_summary(s, tmp_path / "s.csv", ["hdr"])
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[:2] == ["# hdr", "node,mean,ci_low,ci_high"] and len(lines) == 2 + net.n
    write_runs(s, tmp_path / "r.csv")
    rows = (tmp_path / "r.csv").read_text().splitlines()
    assert rows[0] == "run,fraction_hit,node,impact_index" and len(rows) == 1 + 3 * net.n
    back = np.array([float(r.split(",")[3]) for r in rows[1:]]).reshape(3, net.n)
    assert np.array_equal(back, s.samples)
