"""Network + balance sheets -> impact index, with shock-independent parts cached."""
from __future__ import annotations

import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .balance import solvency_indices, solvency_ratio, vulnerability_weights
from .errors import NumericalError
from .impact import BETWEENNESS_FLOOR, build_iteration_matrices, iterate_impact, residual_norm
from .network import centrality, degrees, fmt
from .oracle import relative_error, solve_optimal


class ImpactModel:
    """Everything the impact index needs, with centralities computed once.

    Weights and centralities do not depend on deposit shocks, so Monte
    Carlo runs only redo the solvency -> ratio -> iteration steps.
    """

    def __init__(self, net, sheets, phi=1.0, distance_mode="unit", bc_floor=BETWEENNESS_FLOOR,
                 centralities=None):
        self.net = net
        self.sheets = sheets
        self.phi = phi
        self.distance_mode = distance_mode
        self.bc_floor = bc_floor
        self.w = vulnerability_weights(net, sheets)
        self.centralities = centralities or centrality(net, distance_mode)

    def solvency(self, shocks=0.0):
        return solvency_indices(self.sheets, self.phi, shocks)[1]

    def matrices(self, shocks=0.0):
        r = solvency_ratio(self.net, self.solvency(shocks))
        c = self.centralities
        return build_iteration_matrices(self.w, c.closeness, c.betweenness, r, self.bc_floor)

    def impact(self, shocks=0.0, tolerance=1e-5, max_iter=100_000, alpha=None):
        return iterate_impact(self.matrices(shocks), tolerance, max_iter, alpha)


@dataclass(frozen=True)
class ComparisonRow:
    network_kind: str
    n: int
    interconnections: int
    max_in: int
    max_out: int
    tolerance: float
    iterations: int
    cpu_time_s: float
    err_alg: float
    err_opt: float
    rel_err: float


COMPARISON_FIELDS = ("network_kind", "n", "interconnections", "tolerance", "iterations",
                     "cpu_time_s", "err_alg", "err_opt", "rel_err")


def compare_methods(model, tolerances=(1e-3, 1e-4, 1e-5), network_kind="custom",
                    max_iter=100_000, shocks=0.0):
    """Averaged iteration versus the simplex least-squares optimum, per tolerance.

    The optimum is computed for the same matrix ``M`` the iteration ends on
    (``alpha = k/(k+1)`` at its final ``k``). If that optimum is exactly
    zero the absolute error is reported as ``rel_err``.
    """
    mats = model.matrices(shocks)
    deg = degrees(model.net)
    rows = []
    for tol in tolerances:
        t0 = time.process_time()
        res = iterate_impact(mats, tol, max_iter)
        cpu = time.process_time() - t0
        if not res.converged:
            raise NumericalError(f"iteration did not reach tolerance {tol} in {max_iter} steps")
        err_alg = residual_norm(mats, res)
        alpha = res.iterations / (res.iterations + 1)
        M = alpha * mats.W_cc + (1 - alpha) * mats.W_bc * mats.r[None, :]
        opt = solve_optimal(M, p0=res.p / res.p.sum())
        try:
            rel = relative_error(err_alg, opt.objective)
        except NumericalError:
            rel = err_alg - opt.objective
        rows.append(ComparisonRow(network_kind, model.net.n, model.net.n_edges,
                                  int(deg.in_degree.max(initial=0)),
                                  int(deg.out_degree.max(initial=0)), tol, res.iterations,
                                  cpu, err_alg, opt.objective, rel))
    return rows


def write_comparison(rows, path, comments=()):
    with Path(path).open("w", newline="") as fh:
        for c in comments:
            fh.write(f"# {c}\n")
        fh.write(",".join(COMPARISON_FIELDS) + "\n")
        for r in rows:
            fh.write(f"{r.network_kind},{r.n},{r.interconnections},{fmt(r.tolerance)},"
                     f"{r.iterations},{fmt(r.cpu_time_s)},{fmt(r.err_alg)},"
                     f"{fmt(r.err_opt)},{fmt(r.rel_err)}\n")


def summary_stats(values):
    v = np.asarray(values, dtype=float)
    return {"mean": float(v.mean()), "min": float(v.min()), "max": float(v.max())}
