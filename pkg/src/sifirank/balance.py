"""Balance sheets, solvency and vulnerability.

Sheets are stored column-wise in :class:`BalanceSheets`; indexing it yields
a per-institution :class:`BalanceSheet`.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataError
from .network import draw_pareto, fmt

IDENTITY_RTOL = 1e-9


@dataclass(frozen=True)
class BalanceSheet:
    a_ext: float
    a_int: float
    l_int: float
    deposits: float
    capital: float

    @property
    def total_assets(self):
        return self.a_ext + self.a_int

    def identity_gap(self):
        """Relative violation of ``A^E + A^int = L^int + L^D + Cpa``."""
        lhs = self.a_ext + self.a_int
        rhs = self.l_int + self.deposits + self.capital
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-300)


@dataclass(frozen=True, eq=False)
class BalanceSheets:
    a_ext: np.ndarray
    a_int: np.ndarray
    l_int: np.ndarray
    deposits: np.ndarray
    capital: np.ndarray

    def __len__(self):
        return len(self.capital)

    def __getitem__(self, i):
        return BalanceSheet(float(self.a_ext[i]), float(self.a_int[i]), float(self.l_int[i]),
                            float(self.deposits[i]), float(self.capital[i]))

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    @property
    def total_assets(self):
        return self.a_ext + self.a_int

    def identity_gaps(self):
        lhs = self.a_ext + self.a_int
        rhs = self.l_int + self.deposits + self.capital
        scale = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1e-300)
        return np.abs(lhs - rhs) / scale


@dataclass(frozen=True)
class BalanceParams:
    """Parameters of the balance-sheet simulator.

    The default external-asset multiplier keeps the interbank book small
    relative to total assets. With capital at 1-2% of total assets this is
    what keeps capital buffers above interbank liabilities, the regime in
    which the impact recursion contracts.
    """

    pareto_shape: float = 2.0
    pareto_scale: float = 1.0
    cap_low: float = 0.01
    cap_high: float = 0.02
    ext_multiplier: float = 200.0


@dataclass(frozen=True)
class SolvencyState:
    chi: float
    solvency_index: float
    phi: float
    shock: float
    flagged: bool = False


def simulate_exposures(net, pareto_shape, pareto_scale, rng_seed):
    """Replace every exposure by an independent Pareto draw."""
    rng = np.random.default_rng(rng_seed)
    x = draw_pareto(rng, pareto_shape, pareto_scale, net.n_edges)
    if net.n_edges == 0:
        return net
    return net.with_exposures(x)


def assemble_sheets(a_ext, a_int, l_int, capital_ratio):
    """Close the accounts: capital from total assets, deposits as residual."""
    a_ext, a_int, l_int, u = (np.asarray(v, dtype=float) for v in (a_ext, a_int, l_int, capital_ratio))
    capital = u * (a_ext + a_int)
    deposits = a_ext + a_int - l_int - capital
    return BalanceSheets(a_ext, a_int, l_int, deposits, capital)


def _external_base(net):
    omega = net.exposure_matrix
    a = net.adjacency
    deg_in = a.sum(axis=0)
    deg_out = a.sum(axis=1)
    incident = deg_in + deg_out
    volume = omega.sum(axis=0) + omega.sum(axis=1)
    fallback = net.exposure.mean() if net.n_edges else 1.0
    mean_exposure = np.where(incident > 0, volume / np.maximum(incident, 1), fallback)
    return mean_exposure * np.maximum(np.maximum(deg_in, deg_out), 1)


def derive_balance_sheets(net, capital_ratio_low=0.01, capital_ratio_high=0.02,
                          external_asset_multiplier=200.0, rng_seed=0, max_redraws=100):
    """Simulate balance sheets consistent with the exposure matrix.

    Interbank assets and liabilities are column and row sums of the
    exposures. External assets are ``multiplier * mean_exposure *
    max(deg_in, deg_out) * U[0.5, 1.5]``, capital is a uniform
    ``[low, high]`` fraction of total assets and deposits balance the
    accounts. Nodes left with negative deposits get fresh draws, at most
    ``max_redraws`` times.
    """
    if not 0 < capital_ratio_low <= capital_ratio_high < 1:
        raise ConfigError(
            f"need 0 < cap_low <= cap_high < 1, got {capital_ratio_low}, {capital_ratio_high}")
    if not external_asset_multiplier >= 0:
        raise ConfigError(f"external asset multiplier must be >= 0, got {external_asset_multiplier}")
    rng = np.random.default_rng(rng_seed)
    omega = net.exposure_matrix
    a_int = omega.sum(axis=0)
    l_int = omega.sum(axis=1)
    base = _external_base(net)
    noise = rng.uniform(0.5, 1.5, net.n)
    u = rng.uniform(capital_ratio_low, capital_ratio_high, net.n)
    for _ in range(max_redraws + 1):
        sheets = assemble_sheets(external_asset_multiplier * base * noise, a_int, l_int, u)
        bad = sheets.deposits < 0
        if not bad.any():
            return sheets
        noise[bad] = rng.uniform(0.5, 1.5, bad.sum())
        u[bad] = rng.uniform(capital_ratio_low, capital_ratio_high, bad.sum())
    raise ConfigError(
        f"deposits stay negative for nodes {np.flatnonzero(bad).tolist()} after "
        f"{max_redraws} redraws; raise the external asset multiplier")


def solvency_indices(sheets, phi, shocks=0.0):
    """Vectorised solvency index.

    ``chi = ((1-phi) A^int + A^E - L^D + shock) / L^int`` and
    ``solv = min(chi, 1)``. Nodes without interbank liabilities get
    ``solv = 1`` and are flagged. Returns ``(chi, solv, flagged)``.
    """
    if not 0 <= phi <= 1:
        raise ConfigError(f"loss given default phi must lie in [0, 1], got {phi}")
    shocks = np.broadcast_to(np.asarray(shocks, dtype=float), sheets.capital.shape)
    numer = (1 - phi) * sheets.a_int + sheets.a_ext - sheets.deposits + shocks
    flagged = sheets.l_int <= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        chi = np.where(flagged, np.inf, numer / np.where(flagged, 1.0, sheets.l_int))
    solv = np.where(flagged, 1.0, np.minimum(chi, 1.0))
    return chi, solv, flagged


def solvency_index(sheet, phi, shock=0.0):
    if not 0 <= phi <= 1:
        raise ConfigError(f"loss given default phi must lie in [0, 1], got {phi}")
    if sheet.l_int <= 0:
        return SolvencyState(chi=float("inf"), solvency_index=1.0, phi=phi, shock=shock, flagged=True)
    chi = ((1 - phi) * sheet.a_int + sheet.a_ext - sheet.deposits + shock) / sheet.l_int
    return SolvencyState(chi=chi, solvency_index=min(chi, 1.0), phi=phi, shock=shock)


def vulnerability_weights(net, sheets):
    """``w_ij = min(Omega_ij / Cpa_i, 1)`` on edges, 0 elsewhere."""
    capital = np.asarray(sheets.capital, dtype=float)
    if len(capital) != net.n:
        raise DataError(f"{len(capital)} balance sheets for {net.n} nodes")
    bad = np.flatnonzero(~(capital > 0))
    if len(bad):
        raise DataError(f"non-positive capital at node {int(bad[0])}")
    return np.minimum(net.exposure_matrix / capital[:, None], 1.0)


def solvency_ratio(net, solvency, return_fallback=False):
    """Relative solvency of each node to its creditors.

    ``r_i = s_i / sum_{j: i->j} s_j`` with ``s = max(solv, 0)``. Nodes
    without out-edges get 0; a non-positive denominator falls back to
    ``1 / deg_out(i)``.
    """
    s = np.clip(np.asarray(solvency, dtype=float), 0.0, None)
    if s.shape != (net.n,):
        raise DataError(f"solvency vector has shape {s.shape}, expected ({net.n},)")
    a = net.adjacency
    deg_out = a.sum(axis=1)
    denom = a.astype(float) @ s
    has_out = deg_out > 0
    fallback = has_out & ~(denom > 0)
    r = np.zeros(net.n)
    ok = has_out & ~fallback
    r[ok] = s[ok] / denom[ok]
    r[fallback] = 1.0 / deg_out[fallback]
    if return_fallback:
        return r, fallback
    return r


SHEET_FIELDS = ("node", "a_ext", "a_int", "l_int", "deposits", "capital")


def write_balance_sheets(sheets, path, comments=()):
    with Path(path).open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(SHEET_FIELDS) + "\n")
        for i, s in enumerate(sheets):
            fh.write(f"{i},{fmt(s.a_ext)},{fmt(s.a_int)},{fmt(s.l_int)},"
                     f"{fmt(s.deposits)},{fmt(s.capital)}\n")


def read_balance_sheets(path):
    with Path(path).open() as fh:
        rows = list(csv.DictReader(line for line in fh if line.strip() and not line.startswith("#")))
    if not rows or tuple(rows[0]) != SHEET_FIELDS:
        raise DataError(f"{path}: expected header {','.join(SHEET_FIELDS)}")
    rows.sort(key=lambda r: int(r["node"]))
    if [int(r["node"]) for r in rows] != list(range(len(rows))):
        raise DataError(f"{path}: node ids must be 0..n-1")
    cols = {f: np.array([float(r[f]) for r in rows]) for f in SHEET_FIELDS[1:]}
    return BalanceSheets(**cols)
