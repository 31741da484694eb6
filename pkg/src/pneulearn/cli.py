"""Command-line front end: single trials, learning runs, learning-gain
sweeps, and GA tuning, all driven by one YAML config and emitting CSV.

Exit codes: 0 success, 2 config error, 3 diverged run, 4 search failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys

import numpy as np
import yaml

from .config import (ConfigError, ExperimentConfig, build_setup, dump_genes,
                     load_config)
from .ga import evolve
from .ilc import DivergenceError, LearningCurve, run_learning, run_trial
from .pid import UltimateGainNotFound, find_ultimate_gain, zn_tune
from .plant import PneumaticSimulator
from .signals import Signal

TRACE_COLUMNS = ("t", "y_d", "y_k", "e_k", "u_l", "u_f", "u_total",
                 "x_v", "P_a", "P_b")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_SEARCH = 4


def _write_csv(path: str, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([str(v) for v in row])


def _trace_rows(record, reference: Signal):
    t_s = reference.T_s
    y_d = reference.samples
    aux = record.aux
    n = len(reference)
    blank = np.zeros(n)
    x_v = aux.get("x_v", blank)
    p_a = aux.get("P_a", blank)
    p_b = aux.get("P_b", blank)
    for i in range(n):
        yield (i * t_s, y_d[i], record.y_k.samples[i], record.e_k.samples[i],
               record.u_l.samples[i], record.u_f.samples[i],
               record.u_total.samples[i], x_v[i], p_a[i], p_b[i])


def _summary_rows(curve: LearningCurve):
    for idx, rec in enumerate(curve.records):
        ratio = "" if idx == 0 else curve.ratios[idx - 1]
        yield (rec.k, rec.rms, ratio)


def _resolve_bootstrap(cfg: ExperimentConfig, out_dir: str):
    """Bootstrap PID gains: explicit from config, or tuned at the stability
    limit and recorded to zn_tuning.yaml for reproducibility."""
    if cfg.bootstrap_mode == "explicit":
        return cfg.bootstrap_gains
    up = find_ultimate_gain(
        lambda: PneumaticSimulator(cfg.plant, substeps=cfg.substeps),
        step_ref=cfg.zn_step_to, cfg=cfg.zn_search, y_start=cfg.zn_step_start)
    gains = zn_tune(up)
    with open(os.path.join(out_dir, "zn_tuning.yaml"), "w") as fh:
        yaml.safe_dump({
            "K_u": up.K_u, "T_u": up.T_u,
            "gains": {"K_p": gains.K_p, "K_i": gains.K_i, "K_D": gains.K_D},
        }, fh, sort_keys=False)
    return gains


def _prepare(args) -> tuple:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.out is not None:
        overrides["output_dir"] = args.out
    cfg = load_config(args.config, overrides)
    os.makedirs(cfg.output_dir, exist_ok=True)
    return cfg, cfg.output_dir


def cmd_simulate(args) -> int:
    """One feedback-only trial (zero feedforward table); writes trace.csv."""
    cfg, out = _prepare(args)
    setup = build_setup(cfg)
    setup.iterations = 1
    u_l = Signal(np.zeros(len(setup.reference)), setup.T_s)
    record = run_trial(setup, u_l, trial_index=1)
    _write_csv(os.path.join(out, "trace.csv"), TRACE_COLUMNS,
               _trace_rows(record, setup.reference))
    print(f"rms: {record.rms!r}")
    print(f"wrote {os.path.join(out, 'trace.csv')}")
    return EXIT_OK


def cmd_learn(args) -> int:
    """Full learning run; writes summary.csv and the final trial trace."""
    cfg, out = _prepare(args)
    gains = _resolve_bootstrap(cfg, out) if cfg.pid_bootstrap else cfg.bootstrap_gains
    setup = build_setup(cfg, bootstrap_gains=gains)
    curve = run_learning(setup)
    _write_csv(os.path.join(out, "summary.csv"), ("k", "rms", "ratio"),
               _summary_rows(curve))
    final = curve.records[-1]
    _write_csv(os.path.join(out, f"trace_iter{final.k}.csv"), TRACE_COLUMNS,
               _trace_rows(final, setup.reference))
    for rec in curve.records:
        print(f"iteration {rec.k}: rms {rec.rms!r}")
    return EXIT_OK


def cmd_sweep_alpha(args) -> int:
    """Learning runs over several learning gains, one long-format CSV."""
    cfg, out = _prepare(args)
    alphas = [float(a) for a in args.alphas.split(",")] if args.alphas else \
        [0.1, 0.3, 0.6, 1.0, 1.4, 1.8]
    for a in alphas:
        if not 0.0 < a < 2.0:
            raise ConfigError(
                f"alpha {a} rejected: the learning update is only contractive "
                f"for gains in (0, 2)")
    rows = []
    for a in alphas:
        setup = build_setup(cfg)
        setup.alpha = a
        curve = run_learning(setup)
        for rec in curve.records:
            rows.append((a, rec.k, rec.rms))
    _write_csv(os.path.join(out, "sweep.csv"), ("alpha", "k", "rms"), rows)
    print(f"wrote {os.path.join(out, 'sweep.csv')}")
    return EXIT_OK


def cmd_tune(args) -> int:
    """GA search over the membership genes; writes the best controller and
    the per-generation history."""
    cfg, out = _prepare(args)
    gains = _resolve_bootstrap(cfg, out)
    base = build_setup(cfg, bootstrap_gains=gains)
    base.use_pid_bootstrap = True
    best, history = evolve(cfg.ga, base)
    genes = best.to_sfdc()
    dump_genes(genes, cfg.universes, os.path.join(out, "best_genes.yaml"))
    rows = []
    for g, (bf, mf, bg) in enumerate(zip(history.best_fitness,
                                         history.mean_fitness,
                                         history.best_genes)):
        rows.append((g, bf, mf, *bg))
    _write_csv(os.path.join(out, "ga_history.csv"),
               ("generation", "best", "mean",
                "S_I1", "S_I2", "S_O1", "D_I1", "D_I2", "D_O1"), rows)
    print(f"best fitness: {history.best_fitness[-1]!r}")
    print(f"wrote {os.path.join(out, 'best_genes.yaml')}")
    if args.chain_learn:
        cfg.genes = genes
        setup = build_setup(cfg, bootstrap_gains=gains)
        curve = run_learning(setup)
        _write_csv(os.path.join(out, "summary.csv"), ("k", "rms", "ratio"),
                   _summary_rows(curve))
        print(f"chained learn, final rms {curve.records[-1].rms!r}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pneulearn",
        description="Learning-control experiments on a simulated pneumatic servo")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, extra in (
            ("simulate", cmd_simulate, ()),
            ("learn", cmd_learn, ()),
            ("sweep-alpha", cmd_sweep_alpha, ("alphas",)),
            ("tune", cmd_tune, ("chain_learn",))):
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="YAML config path")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        if "alphas" in extra:
            p.add_argument("--alphas", default=None,
                           help="comma-separated learning gains")
        if "chain_learn" in extra:
            p.add_argument("--chain-learn", action="store_true",
                           help="re-run learning with the tuned controller")
        p.set_defaults(fn=fn)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as err:
        print(f"diverged: {err}", file=sys.stderr)
        return EXIT_DIVERGED
    except UltimateGainNotFound as err:
        print(f"search failed: {err}", file=sys.stderr)
        return EXIT_SEARCH


if __name__ == "__main__":
    sys.exit(main())
