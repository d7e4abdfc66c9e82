"""Command-line front end.

Each subcommand loads a config, runs one experiment and writes its table
to ``--out``. Every output starts with ``#`` lines carrying the config hash
and seed. Exit codes: 0 ok, 1 config, 2 I/O or malformed input, 3 numeric.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from . import __version__
from .balance import read_balance_sheets, write_balance_sheets
from .config import load_config
from .errors import DataError, NumericalError, SifiRankError
from .impact import rank_institutions, write_impact
from .model import compare_methods, write_comparison
from .network import degrees, read_edge_list, write_edge_list
from .pipeline import build_model, build_network, build_sheets, classify_from_mc, run_perturbation
from .shockmc import write_runs, write_summary
from .sinkrank import comparison_entries, sinkrank_all, to_transition
from .sinkrank import write_comparison as write_sinkrank
from .stats import write_classification, write_experiment


class Context:
    def __init__(self, args):
        self.args = args
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg = cfg.with_seed(args.seed)
        self.cfg = cfg
        self.out = Path(args.out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.header = [f"sifirank {__version__} {args.command}",
                       f"config_hash={cfg.hash()}", f"seed={cfg.seed}"]

    def path(self, stem):
        return self.out / f"{stem}.{self.args.format}"

    def model(self):
        net = read_edge_list(self.args.network) if self.args.network else None
        sheets = read_balance_sheets(self.args.balance) if self.args.balance else None
        if net is None:
            net = build_network(self.cfg)
        if sheets is not None and len(sheets) != net.n:
            raise DataError(f"{len(sheets)} balance sheets for {net.n} nodes")
        return build_model(self.cfg, net, sheets)

    def emit(self, stem, rows, csv_writer, obj):
        """Write ``obj`` as CSV (via ``csv_writer``) or JSON, by ``--format``."""
        path = self.path(stem)
        if self.args.format == "csv":
            csv_writer(obj, path, self.header)
        else:
            meta = {"tool": self.header[0], "config_hash": self.cfg.hash(), "seed": self.cfg.seed}
            with path.open("w") as fh:
                json.dump({"meta": meta, "rows": rows}, fh, indent=1)
                fh.write("\n")
        print(f"wrote {path}")
        return path


def _rows(items):
    return [dataclasses.asdict(x) for x in items]


def cmd_generate(ctx):
    net = build_network(ctx.cfg)
    sheets = build_sheets(ctx.cfg, net)
    deg = degrees(net)
    edges = [{"src": s, "dst": d, "exposure": x} for s, d, x in net.edges()]
    ctx.emit("network", {"n": net.n, "edges": edges}, write_edge_list, net)
    fields = ("a_ext", "a_int", "l_int", "deposits", "capital")
    rows = [{"node": i, **{f: float(getattr(sheets, f)[i]) for f in fields}} for i in range(net.n)]
    ctx.emit("balance", rows, write_balance_sheets, sheets)
    print(f"size={net.n} interconnections={net.n_edges} "
          f"max_in={int(deg.in_degree.max(initial=0))} max_out={int(deg.out_degree.max(initial=0))}")


def cmd_rank(ctx):
    model = ctx.model()
    res = model.impact(tolerance=ctx.cfg.solver.tolerance, max_iter=ctx.cfg.solver.max_iter)
    if not res.converged:
        exc = NumericalError(f"impact iteration did not converge in {res.iterations} steps")
        exc.module = "impact"
        raise exc
    ranking = rank_institutions(res)
    rank_of = {node: pos + 1 for pos, (node, _) in enumerate(ranking)}
    rows = [{"node": i, "impact_index": float(v), "rank": rank_of[i]} for i, v in enumerate(res.p)]
    ctx.emit("impact", rows, write_impact, res)
    print(f"iterations={res.iterations} top={ranking[0][0]}")


def cmd_compare(ctx):
    model = ctx.model()
    rows = compare_methods(model, ctx.cfg.comparison.tolerances, ctx.cfg.network.kind,
                           ctx.cfg.solver.max_iter)
    ctx.emit("compare", _rows(rows), write_comparison, rows)
    for r in rows:
        print(f"tol={r.tolerance:g} iterations={r.iterations} rel_err={r.rel_err:.4g}")


def cmd_classify(ctx):
    model = ctx.model()
    cls, mc = classify_from_mc(ctx.cfg, model)
    rows = [{"node": i, "impact": float(cls.impact[i]), "bucket": int(cls.buckets[i]),
             "p_sifi": float(cls.probabilities[i]), "log_odds": float(cls.log_odds[i])}
            for i in range(len(cls.buckets))]
    ctx.emit("classification", rows, write_classification, cls)
    summary = [{"node": i, "mean": float(m), "ci_low": float(lo), "ci_high": float(hi)}
               for i, (m, lo, hi) in enumerate(zip(mc.mean_impact, mc.ci_low, mc.ci_high))]
    ctx.emit("mc_summary", summary, write_summary, mc)
    if ctx.args.per_run:
        long = [{"run": int(r), "fraction_hit": float(f), "node": i, "impact_index": float(v)}
                for r, f, p in zip(mc.run_ids, mc.fractions, mc.samples) for i, v in enumerate(p)]
        ctx.emit("mc_runs", long, write_runs, mc)
    print(f"runs={mc.runs} failed={mc.failed} top_bucket={int(np.sum(cls.buckets == cls.buckets.max()))}"
          f"{' degenerate' if cls.degenerate else ''}")


def cmd_perturb(ctx):
    rows = run_perturbation(ctx.cfg)
    ctx.emit("perturbation", _rows(rows), write_experiment, rows)
    for r in rows:
        print(f"{r.edit_kind}: mean_delta={r.mean_delta_log_odds:.4g} "
              f"sign_agreement={r.sign_agreement_fraction:.2f}")


def cmd_sinkrank(ctx):
    model = ctx.model()
    res = model.impact(tolerance=ctx.cfg.solver.tolerance, max_iter=ctx.cfg.solver.max_iter)
    inv = sinkrank_all(to_transition(model.net))
    entries = comparison_entries(model.net, model.sheets, res, inv)
    ctx.emit("sinkrank", _rows(entries), write_sinkrank, entries)


COMMANDS = {
    "generate": (cmd_generate, "simulate a network and its balance sheets"),
    "rank": (cmd_rank, "impact index and ranking"),
    "compare": (cmd_compare, "averaged iteration versus the simplex optimum"),
    "classify": (cmd_classify, "Monte Carlo impact, buckets and SIFI log-odds"),
    "perturb": (cmd_perturb, "degree-perturbation experiment"),
    "sinkrank": (cmd_sinkrank, "impact index next to inverse SinkRank"),
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML experiment config (defaults if omitted)")
    common.add_argument("--seed", type=int, help="root seed, overrides the config")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--network", type=Path, help="edge-list CSV to use instead of generating")
    common.add_argument("--balance", type=Path, help="balance-sheet CSV to use instead of simulating")
    parser = argparse.ArgumentParser(prog="sifirank", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text)
        if name == "classify":
            p.add_argument("--per-run", action="store_true", help="also write per-run impacts")
    return parser


def _origin(exc):
    """Innermost package module in the traceback, e.g. ``stats``."""
    name = getattr(exc, "module", "sifirank")
    for frame, _ in traceback.walk_tb(exc.__traceback__):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("sifirank.") and mod != "sifirank.cli":
            name = mod.split(".", 1)[1]
    return name


def main(argv=None):
    args = build_parser().parse_args(argv)
    func = COMMANDS[args.command][0]
    try:
        func(Context(args))
    except SifiRankError as exc:
        print(f"sifirank {args.command}: [{_origin(exc)}] {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"sifirank {args.command}: I/O error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
