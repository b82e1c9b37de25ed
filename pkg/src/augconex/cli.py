"""Benchmark command line.

Subcommands:
  solve   one run on one seeded instance, emitting a trace CSV
  sweep   seed / lambda / K grids with rate fits
  bounds  print the iteration-count bound for a target accuracy
  verify  check the schedule side conditions over a horizon

Flags mirror ExperimentConfig one to one; --config loads the same fields
from JSON and explicit flags win over the file.  The output directory can
be overridden with the AUGCONEX_OUTDIR environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import qcqp
from .experiments import ExperimentConfig, run_experiment, sweep
from .schedules import (
    CONVEX,
    MODES,
    ScheduleParams,
    build_schedule,
    iteration_bound,
    verify_conditions,
)

_CONFIG_FLAGS = {
    "mode": dict(choices=MODES),
    "n": dict(type=int),
    "m": dict(type=int),
    "K": dict(type=int),
    "l1_weight": dict(type=float, names=("--l1-weight", "--lambda")),
    "sigma": dict(type=float),
    "rho_1": dict(type=float, names=("--rho-1", "--rho1")),
    "B": dict(type=float),
    "radius": dict(type=float, names=("--radius", "--D-x")),
    "variant": dict(choices=qcqp.VARIANTS),
    "inner_tol": dict(type=float),
    "inner_t_max": dict(type=int),
    "shift": dict(type=float),
    "workers": dict(type=int),
    "output_dir": dict(),
    "tag": dict(),
}


def _add_config_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--config", help="JSON file with ExperimentConfig fields")
    for name, spec in _CONFIG_FLAGS.items():
        names = spec.get("names", ("--" + name.replace("_", "-"),))
        kwargs = {k: v for k, v in spec.items() if k != "names"}
        parser.add_argument(*names, dest=name, default=None, **kwargs)
    parser.add_argument("--seeds", default=None,
                        help="comma-separated seed list, e.g. 0,1,2")
    parser.add_argument("--with-reference", dest="with_reference",
                        action="store_true", default=None)


def _merge_config(args) -> ExperimentConfig:
    fields = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            fields.update(json.load(fh))
    for name in list(_CONFIG_FLAGS) + ["with_reference"]:
        value = getattr(args, name, None)
        if value is not None:
            fields[name] = value
    if args.seeds is not None:
        fields["seeds"] = tuple(int(s) for s in str(args.seeds).split(",") if s != "")
    elif "seeds" in fields:
        fields["seeds"] = tuple(fields["seeds"])
    return ExperimentConfig.from_dict(fields)


def _parse_grid(text):
    return [int(v) for v in text.split(",") if v != ""] if text else None


def _parse_grid_float(text):
    return [float(v) for v in text.split(",") if v != ""] if text else None


def _schedule_params(cfg: ExperimentConfig, seed: int, dual_norm_bound: float,
                     y1_dist: float | None) -> ScheduleParams:
    from .schedules import STRONGLY_CONVEX

    inst = qcqp.generate_qcqp(
        n=cfg.n, m=cfg.m, l1_weight=cfg.l1_weight, radius=cfg.radius,
        strongly_convex=(cfg.mode == STRONGLY_CONVEX), seed=seed, shift=cfg.shift,
    )
    problem = qcqp.to_problem(inst, cfg.variant, sigma=cfg.sigma)
    return ScheduleParams(
        mode=cfg.mode, horizon=cfg.K, smoothness=problem.smoothness,
        aggregates=problem.aggregates(), radius=cfg.radius, rho_1=cfg.rho_1,
        B=cfg.B, dual_norm_bound=dual_norm_bound, y1_dist=y1_dist,
    )


def cmd_solve(args) -> int:
    cfg = _merge_config(args)
    if args.seed is not None:
        cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "seeds": [args.seed]})
    cfg = ExperimentConfig.from_dict({**cfg.to_dict(), "seeds": [cfg.seeds[0]]})
    summary = run_experiment(cfg)
    if summary["errors"]:
        print(next(iter(summary["errors"].values())), file=sys.stderr)
        return 1
    seed, result = next(iter(summary["per_seed"].items()))
    print(
        f"seed {seed}: psi0={result['psi0']:.8g} feas_gap={result['feas_gap']:.3e} "
        f"sparsity={result['sparsity']} trace={result['trace_file']}"
    )
    print(f"summary: {summary['summary_file']}")
    return 0


def cmd_sweep(args) -> int:
    cfg = _merge_config(args)
    out = sweep(cfg, K_grid=_parse_grid(args.K_grid), lambda_grid=_parse_grid_float(args.lambda_grid))
    for lam, fits in out["fits"].items():
        parts = [f"{name}={value:+.3f}" if value is not None else f"{name}=n/a"
                 for name, value in fits.items()] or ["no fits (need >= 3 K values)"]
        print(f"{lam}: " + ", ".join(parts))
    print(f"experiments written: {len(out['experiments'])}")
    return 0


def cmd_bounds(args) -> int:
    cfg = _merge_config(args)
    params = _schedule_params(cfg, seed=cfg.seeds[0],
                              dual_norm_bound=args.dual_norm_bound,
                              y1_dist=args.y1_dist)
    K_eps = iteration_bound(params, args.eps)
    print(f"mode={cfg.mode} eps={args.eps:g}: K_eps={K_eps}")
    return 0


def cmd_verify(args) -> int:
    cfg = _merge_config(args)
    params = _schedule_params(cfg, seed=cfg.seeds[0],
                              dual_norm_bound=args.dual_norm_bound, y1_dist=None)
    report = verify_conditions(params, schedule=build_schedule(params))
    print(report.summary())
    return 0 if report.all_passed else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="augconex",
                                     description="sparse-QCQP benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="single seeded run")
    _add_config_flags(p_solve)
    p_solve.add_argument("--seed", type=int, default=None)
    p_solve.set_defaults(fn=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="seed/lambda/K grids")
    _add_config_flags(p_sweep)
    p_sweep.add_argument("--K-grid", dest="K_grid", default=None,
                         help="comma-separated K values")
    p_sweep.add_argument("--lambda-grid", dest="lambda_grid", default=None,
                         help="comma-separated l1 weights")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_bounds = sub.add_parser("bounds", help="iteration bound for target eps")
    _add_config_flags(p_bounds)
    p_bounds.add_argument("--eps", type=float, required=True)
    p_bounds.add_argument("--dual-norm-bound", dest="dual_norm_bound",
                          type=float, default=0.0)
    p_bounds.add_argument("--y1-dist", dest="y1_dist", type=float, default=None)
    p_bounds.set_defaults(fn=cmd_bounds)

    p_verify = sub.add_parser("verify", help="schedule side-condition report")
    _add_config_flags(p_verify)
    p_verify.add_argument("--dual-norm-bound", dest="dual_norm_bound",
                          type=float, default=0.0)
    p_verify.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
