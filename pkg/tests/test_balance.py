import numpy as np
import pytest
from hypothesis import given, strategies as st

from sifirank import DirectedFinancialNetwork, derive_balance_sheets, generate_ba, generate_complete
from sifirank.balance import (BalanceSheet, assemble_sheets, read_balance_sheets,
                              simulate_exposures, solvency_index, solvency_indices,
                              solvency_ratio, vulnerability_weights, write_balance_sheets)
from sifirank.errors import ConfigError, DataError

finite = st.floats(-1e3, 1e3, allow_nan=False)


def test_simulated_exposures_support_and_mean():
    net = generate_complete(20, 0)
    sim = simulate_exposures(net, 2.0, 10.0, rng_seed=4)
    assert sim.exposure.min() >= 10.0
    big = generate_complete(320, 1)  # ~10^5 edges
    assert 18 <= simulate_exposures(big, 2.0, 10.0, 2).exposure.mean() <= 22


def test_simulated_exposures_errors_and_empty():
    empty = DirectedFinancialNetwork.from_edges(4, [])
    assert simulate_exposures(empty, 2.0, 1.0, 0) is empty
    with pytest.raises(ConfigError):
        simulate_exposures(generate_complete(3, 0), 1.0, 1.0, 0)


def test_identity_arithmetic():
    s = assemble_sheets([30.0], [100.0], [50.0], [0.01])[0]
    assert s.capital == pytest.approx(1.3)
    assert s.deposits == pytest.approx(78.7)


def test_isolated_node_sheet():
    net = DirectedFinancialNetwork.from_edges(3, [(0, 1, 2.0)])
    sh = derive_balance_sheets(net, rng_seed=1)[2]
    assert sh.a_int == sh.l_int == 0
    assert sh.a_ext > 0 and sh.capital > 0 and sh.deposits >= 0


@pytest.mark.parametrize("seed", range(5))
def test_generated_sheets_are_consistent(seed):
    net = generate_ba(80, 3, 2, seed)
    sh = derive_balance_sheets(net, 0.01, 0.02, rng_seed=seed)
    om = net.exposure_matrix
    assert np.all(sh.identity_gaps() <= 1e-9)
    assert np.array_equal(sh.a_int, om.sum(axis=0))
    assert np.array_equal(sh.l_int, om.sum(axis=1))
    assert sh.a_int.sum() == pytest.approx(sh.l_int.sum()) == pytest.approx(net.exposure.sum())
    ratio = sh.capital / sh.total_assets
    assert np.all((ratio >= 0.01 - 1e-15) & (ratio <= 0.02 + 1e-15))
    assert np.all(sh.deposits >= 0) and np.all(sh.a_ext >= 0)


def test_sheets_deterministic():
    net = generate_ba(30, 3, 2, 1)
    a, b = derive_balance_sheets(net, rng_seed=5), derive_balance_sheets(net, rng_seed=5)
    assert np.array_equal(a.deposits, b.deposits)


def test_sheet_errors():
    net = generate_ba(10, 3, 2, 0)
    with pytest.raises(ConfigError):
        derive_balance_sheets(net, 0.02, 0.01)
    # no external assets: pure debtors cannot balance their books
    with pytest.raises(ConfigError):
        derive_balance_sheets(net, external_asset_multiplier=0.0, max_redraws=3)


def test_solvency_examples():
    sheet = BalanceSheet(a_ext=30, a_int=100, l_int=50, deposits=60, capital=20)
    s0 = solvency_index(sheet, 0.0)
    assert s0.chi == pytest.approx(1.4) and s0.solvency_index == 1.0
    s1 = solvency_index(sheet, 1.0)
    assert s1.chi == pytest.approx(-0.6) and s1.solvency_index == pytest.approx(-0.6)
    flat = solvency_index(BalanceSheet(30, 100, 0, 60, 70), 0.5)
    assert flat.solvency_index == 1.0 and flat.flagged
    with pytest.raises(ConfigError):
        solvency_index(sheet, 1.5)


def test_vectorised_solvency_matches_scalar(small_ba):
    net, sh = small_ba
    shocks = np.linspace(-5, 5, net.n)
    chi, solv, flagged = solvency_indices(sh, 0.4, shocks)
    for i in range(net.n):
        st_ = solvency_index(sh[i], 0.4, shocks[i])
        assert solv[i] == pytest.approx(st_.solvency_index)
        assert flagged[i] == st_.flagged


@given(st.floats(0, 1), st.floats(0, 1), finite, st.floats(0, 100))
def test_solvency_monotone(phi_a, phi_b, shock, bump):
    sheet = BalanceSheet(a_ext=40, a_int=70, l_int=55, deposits=50, capital=5)
    lo, hi = sorted((phi_a, phi_b))
    assert solvency_index(sheet, hi, shock).solvency_index <= solvency_index(sheet, lo, shock).solvency_index
    assert solvency_index(sheet, lo, shock + bump).solvency_index >= solvency_index(sheet, lo, shock).solvency_index


def test_vulnerability_examples():
    net = DirectedFinancialNetwork.from_edges(3, [(0, 1, 50.0), (1, 2, 150.0)])
    sheets = assemble_sheets([500.0] * 3, net.exposure_matrix.sum(0), net.exposure_matrix.sum(1),
                             [0.2, 100 / 650, 0.2])
    w = vulnerability_weights(net, sheets)
    assert w[0, 1] == pytest.approx(50 / sheets.capital[0])
    assert w[1, 2] == 1.0
    assert w[0, 2] == 0 and w[2, 0] == 0


def test_vulnerability_bad_capital():
    net = DirectedFinancialNetwork.from_edges(2, [(0, 1, 1.0)])
    sheets = assemble_sheets([1.0, 1.0], [0.0, 1.0], [1.0, 0.0], [0.01, 0.01])
    bad = type(sheets)(sheets.a_ext, sheets.a_int, sheets.l_int, sheets.deposits,
                       np.array([0.01, 0.0]))
    with pytest.raises(DataError, match="node 1"):
        vulnerability_weights(net, bad)


@given(st.floats(0.1, 10))
def test_vulnerability_scale_covariance(c):
    net = generate_ba(15, 3, 2, 3)
    sh = derive_balance_sheets(net, rng_seed=3)
    w = net.exposure_matrix / sh.capital[:, None]
    scaled = net.with_exposures(net.exposure * c)
    sh2 = type(sh)(sh.a_ext * c, sh.a_int * c, sh.l_int * c, sh.deposits * c, sh.capital * c)
    w2 = scaled.exposure_matrix / sh2.capital[:, None]
    assert np.allclose(w, w2, rtol=1e-12)
    assert np.allclose(vulnerability_weights(net, sh), vulnerability_weights(scaled, sh2), rtol=1e-12)


def test_vulnerability_pattern_and_range(small_ba):
    net, sh = small_ba
    w = vulnerability_weights(net, sh)
    assert np.array_equal(w > 0, net.adjacency)
    assert np.all((w >= 0) & (w <= 1))


def test_solvency_ratio_examples():
    net = DirectedFinancialNetwork.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
    r = solvency_ratio(net, np.ones(3))
    assert r[0] == 0.5 and r[1] == 1.0 and r[2] == 0.0
    comp = generate_complete(6, 0)
    assert np.allclose(solvency_ratio(comp, np.full(6, 0.7)), 1 / 5)


def test_solvency_ratio_fallback():
    net = DirectedFinancialNetwork.from_edges(3, [(0, 1, 1.0), (0, 2, 1.0)])
    r, fb = solvency_ratio(net, np.array([0.5, -1.0, 0.0]), return_fallback=True)
    assert r[0] == 0.5 and fb.tolist() == [True, False, False]


def test_sheet_csv_round_trip(tmp_path, small_ba):
    _, sh = small_ba
    write_balance_sheets(sh, tmp_path / "b.csv", ["x"])
    back = read_balance_sheets(tmp_path / "b.csv")
    for f in ("a_ext", "a_int", "l_int", "deposits", "capital"):
        assert np.array_equal(getattr(back, f), getattr(sh, f))
    (tmp_path / "bad.csv").write_text("node,a\n0,1\n")
    with pytest.raises(DataError):
        read_balance_sheets(tmp_path / "bad.csv")
