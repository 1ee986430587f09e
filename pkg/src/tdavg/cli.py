"""Command-line entry point: ``tdavg {simulate,compare,scaling,bound-check} --config FILE``.

Exit codes: 0 success, 1 experiment FAIL, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .analysis import (
    GronwallBound,
    averaging_scaling_experiment,
    compare,
    compare_at_H,
    fit_scaling_exponent,
    gronwall_check,
    estimate_lipschitz,
    run_region,
    scaling_experiment,
)
from .config import ExperimentConfig, load_config
from .errors import ConfigError, DegenerateDataError, TdavgError
from .integrate import full_system, integrate

log = logging.getLogger("tdavg")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def fmt(v) -> str:
    return format(float(v), ".17g")


def write_csv(path: Path, header, rows) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[float(v) for v in row] for row in r]
    return header, np.array(rows, dtype=np.float64).reshape(len(rows), len(header))


def write_json(path: Path, data: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return path


def read_scaling_csv(path):
    header, data = read_csv(path)
    if header != ["H_star", "sup_err"]:
        raise ConfigError(f"{path}: not a scaling report (header {header})")
    return [tuple(row) for row in data]


# ------------------------------------------------------------------ commands


def cmd_simulate(cfg: ExperimentConfig, out_dir: Path) -> Path:
    model = cfg.build_model()
    s0 = cfg.state
    traj = integrate(full_system(model), s0, s0.t + cfg.t_end, cfg.integrator)
    if not traj.ok:
        log.warning("simulation flagged: %s", traj.status)
    header = ["t", "H", *model.state_names]
    rows = (np.concatenate(([t], s)) for t, s in zip(traj.t, traj.s))
    path = write_csv(out_dir / "trajectory.csv", header, rows)
    log.info("wrote %d samples to %s", len(traj), path)
    return path


def _comparison(cfg: ExperimentConfig):
    model = cfg.build_model()
    kw = dict(integrator=cfg.integrator, quad=cfg.quadrature, n_samples=cfg.samples)
    if cfg.H_star is not None:
        run = compare_at_H(model, cfg.state, cfg.H_star, cfg.gamma, cfg.L, **kw)
    elif cfg.t_star is not None:
        run = compare(model, cfg.t_star, cfg.gamma, cfg.L, initial_state=cfg.state, **kw)
    else:
        raise ConfigError("compare needs either H_star or t_star")
    return model, run


def cmd_compare(cfg: ExperimentConfig, out_dir: Path):
    _, run = _comparison(cfg)
    rows = zip(run.times, run.error_xy, run.error_xz, run.error_yz)
    path = write_csv(out_dir / "comparison.csv", ["t", "err_xy", "err_xz", "err_yz"], rows)
    summary = run.summary()
    summary["H_star_requested"] = cfg.H_star
    write_json(out_dir / "comparison_summary.json", summary)
    return path, summary


def cmd_scaling(cfg: ExperimentConfig, out_dir: Path):
    model = cfg.build_model()
    if len(cfg.H_star_list) < 4:
        raise DegenerateDataError(
            f"scaling fit needs at least 4 H_star values, got {len(cfg.H_star_list)}"
        )
    kw = dict(integrator=cfg.integrator, quad=cfg.quadrature, n_samples=cfg.samples)
    if cfg.scaling_mode == "classical":
        report = averaging_scaling_experiment(
            model, cfg.state.x, cfg.H_star_list, cfg.L, cfg.state.t, **kw
        )
    else:
        report = scaling_experiment(model, cfg.state, cfg.H_star_list, cfg.gamma, cfg.L, **kw)
    path = write_csv(out_dir / "scaling.csv", ["H_star", "sup_err"], report.samples)
    summary = report.summary()
    summary["verdict"] = "PASS" if report.passed else "FAIL"
    write_json(out_dir / "scaling_summary.json", summary)
    return path, report


def refit_scaling(path):
    """Re-read a scaling CSV and refit the exponent."""
    return fit_scaling_exponent(read_scaling_csv(path))


def cmd_bound_check(cfg: ExperimentConfig, out_dir: Path):
    model, run = _comparison(cfg)
    b = cfg.bounds
    lo, hi = run_region(run)
    sup_f1, sup_f2 = model.sup_norms(lo, hi)
    sup_f1 = b.sup_f1 if b.sup_f1 is not None else sup_f1
    sup_f2 = b.sup_f2 if b.sup_f2 is not None else sup_f2
    if sup_f1 is None or sup_f2 is None:
        raise ConfigError(f"model {model.name!r} has no analytic sup bounds; set bounds.sup_f1/sup_f2")
    c_L = b.c_L if b.c_L is not None else model.lipschitz_f1
    if c_L is None:
        c_L = estimate_lipschitz(model, (lo, hi), cfg.lipschitz_samples, cfg.seed)
    try:
        bound = GronwallBound(run.H_star, c_L, sup_f1, sup_f2)
    except ValueError as exc:
        raise ConfigError(f"bounds: {exc}") from None
    report = gronwall_check(run, bound)
    dt = run.times - run.t_star
    rows = zip(run.times, run.error_xy, bound(dt), report.ratios)
    path = write_csv(out_dir / "bound_check.csv", ["t", "err_xy", "bound", "ratio"], rows)
    summary = {
        "H_star": run.H_star,
        "t_star": run.t_star,
        "c_L": bound.c_L,
        "sup_f1": bound.sup_f1,
        "sup_f2": bound.sup_f2,
        "max_ratio": report.max_ratio,
        "violations": report.violations,
        "verdict": "PASS" if report.passed else "FAIL",
    }
    write_json(out_dir / "bound_check_summary.json", summary)
    return path, report


# ------------------------------------------------------------------ main


def _parser():
    p = argparse.ArgumentParser(
        prog="tdavg",
        description="Averaging experiments for oscillatory systems with a decaying perturbation parameter.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("simulate", "compare", "scaling", "bound-check"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", "-c", required=True, help="YAML experiment file")
        sp.add_argument("--out", "-o", help="output directory (overrides output_dir)")
        sp.add_argument("--verbose", "-v", action="count", default=0)
        sp.add_argument("--quiet", "-q", action="store_true")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    level = logging.ERROR if args.quiet else (logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        out_dir = Path(args.out or cfg.output_dir)
        if args.command == "simulate":
            path = cmd_simulate(cfg, out_dir)
            print(f"trajectory: {path}")
            return EXIT_OK
        if args.command == "compare":
            path, summary = cmd_compare(cfg, out_dir)
            print(f"comparison: {path}")
            print(
                f"t_star={fmt(summary['t_star'])} H_star={fmt(summary['H_star'])} "
                f"sup|x-y|={summary['sup_err_xy']:.6g} sup|x-z|={summary['sup_err_xz']:.6g} "
                f"sup|y-z|={summary['sup_err_yz']:.6g}"
            )
            return EXIT_OK
        if args.command == "scaling":
            path, report = cmd_scaling(cfg, out_dir)
            verdict = "PASS" if report.passed else "FAIL"
            print(f"scaling: {path}")
            print(
                f"fitted exponent {report.fitted_exponent:.4f} vs theoretical "
                f"{report.theoretical_exponent:.4f} (tolerance {report.tolerance}): {verdict}"
            )
            return EXIT_OK if report.passed else EXIT_FAIL
        path, report = cmd_bound_check(cfg, out_dir)
        verdict = "PASS" if report.passed else "FAIL"
        print(f"bound check: {path}")
        print(f"max error/bound ratio {report.max_ratio:.6g}: {verdict}")
        return EXIT_OK if report.passed else EXIT_FAIL
    except (ConfigError, DegenerateDataError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TdavgError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
