"""Config-driven assembly of networks, balance sheets and experiments.

Every random component draws from its own named sub-seed of the root
seed, so changing one part of an experiment leaves the others intact.
"""
from __future__ import annotations

import numpy as np

from .balance import BalanceParams, derive_balance_sheets
from .model import ImpactModel
from .network import generate_ba, generate_complete, read_edge_list
from .seeding import derive_seed
from .shockmc import ShockConfig, monte_carlo_impact
from .stats import classify, ecdf, perturbation_experiment, quantile, summarise_deltas


def balance_params(cfg):
    return BalanceParams(cfg.exposures.pareto_shape, cfg.exposures.pareto_scale,
                         cfg.balance.cap_low, cfg.balance.cap_high, cfg.balance.ext_multiplier)


def shock_config(cfg, seed=None):
    s = cfg.shocks
    root = cfg.seed if seed is None else seed
    return ShockConfig(s.fraction_hit, s.magnitude_mean, s.magnitude_sd, s.sign,
                       derive_seed(root, "shocks"))


def build_network(cfg, seed=None):
    nc, ex = cfg.network, cfg.exposures
    root = cfg.seed if seed is None else seed
    if nc.kind == "file":
        return read_edge_list(nc.path)
    net_seed = derive_seed(root, "network")
    if nc.kind == "complete":
        return generate_complete(nc.n, net_seed, ex.pareto_shape, ex.pareto_scale)
    return generate_ba(nc.n, nc.m0, nc.k, net_seed, ex.pareto_shape, ex.pareto_scale)


def build_sheets(cfg, net, seed=None):
    root = cfg.seed if seed is None else seed
    b = cfg.balance
    return derive_balance_sheets(net, b.cap_low, b.cap_high, b.ext_multiplier,
                                 derive_seed(root, "balance"))


def build_model(cfg, net=None, sheets=None, seed=None):
    net = build_network(cfg, seed) if net is None else net
    sheets = build_sheets(cfg, net, seed) if sheets is None else sheets
    return ImpactModel(net, sheets, cfg.solvency.phi, cfg.solver.distance_mode)


def run_monte_carlo(cfg, model):
    grid = cfg.shocks.fraction_grid or None
    return monte_carlo_impact(model.net, model.sheets, shock_config(cfg), cfg.runs, grid,
                              tolerance=cfg.solver.tolerance, max_iter=cfg.solver.max_iter,
                              model=model)


def border_target(p, bucket_quantiles):
    """Highest-ranked node that is not above the top threshold.

    Its SIFI probability is neither pinned at 0 nor at 1, so degree edits
    have room to move it either way.
    """
    p = np.asarray(p, dtype=float)
    top = quantile(ecdf(p), bucket_quantiles[-1])
    below = np.flatnonzero(p <= top)
    order = below[np.lexsort((below, -p[below]))]
    return int(order[0])


def perturbation_deltas(cfg, kind, progress=None):
    """One delta log-odds per replication; replication ``r`` uses sub-seed ``r``."""
    pc = cfg.perturbation
    params = balance_params(cfg)
    deltas = []
    for rep in range(pc.replications):
        seed = derive_seed(cfg.seed, "replication", rep)
        net = build_network(cfg, seed)
        bseed = derive_seed(seed, "balance")
        model = build_model(cfg, net, seed=seed)
        target = pc.target
        if target < 0:
            p = model.impact(tolerance=cfg.solver.tolerance, max_iter=cfg.solver.max_iter).p
            target = border_target(p, cfg.classification.bucket_quantiles)
        res = perturbation_experiment(
            net, target, kind, pc.m, shock_config(cfg, seed), cfg.runs, params,
            balance_seed=bseed, edit_seed=derive_seed(seed, "edit"), phi=cfg.solvency.phi,
            bucket_quantiles=cfg.classification.bucket_quantiles,
            tolerance=cfg.solver.tolerance)
        deltas.append(res.delta_log_odds)
        if progress:
            progress(rep, res)
    return np.array(deltas)


def run_perturbation(cfg, progress=None):
    return [summarise_deltas(kind, cfg.perturbation.m, cfg.runs,
                             perturbation_deltas(cfg, kind, progress))
            for kind in cfg.perturbation.edits]


def classify_from_mc(cfg, model):
    mc = run_monte_carlo(cfg, model)
    return classify(mc.mean_impact, cfg.classification.bucket_quantiles, mc.samples), mc


__all__ = ["balance_params", "shock_config", "build_network", "build_sheets", "build_model",
           "run_monte_carlo", "border_target", "perturbation_deltas", "run_perturbation",
           "classify_from_mc"]
