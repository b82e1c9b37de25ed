"""Experiment orchestration: seeded benchmark runs, seed aggregation,
rate fits and inner-iteration histograms.

Every seed names one i.i.d. instance (and its noise stream); a run of an
experiment generates the instance, derives constants, builds the schedule,
solves, and emits one trace CSV per seed plus a machine-readable summary.
"""

from __future__ import annotations

import json
import os
import traceback
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import qcqp
from .schedules import CONVEX, MODES, STRONGLY_CONVEX, ScheduleParams, build_schedule
from .solver import momentum_point, run as solver_run
from .trace import RunTrace, trace_from_run, write_trace_csv

OUTPUT_DIR_ENV = "AUGCONEX_OUTDIR"


class InsufficientDataError(ValueError):
    """Too few positive gap points remain to fit a rate."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark configuration; flags of the CLI mirror these fields."""

    mode: str = CONVEX
    n: int = 50
    m: int = 5
    K: int = 256
    l1_weight: float = 0.0
    sigma: float = 0.0
    rho_1: float | None = None
    B: float = 1.0
    radius: float = 10.0
    variant: str = qcqp.PROX_L1
    seeds: tuple = (0,)
    inner_tol: float = 1e-12
    inner_t_max: int = 50
    shift: float = 1.0
    with_reference: bool = False
    workers: int = 1
    output_dir: str = "runs"
    tag: str = "exp"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.variant not in qcqp.VARIANTS:
            raise ValueError(f"variant must be one of {qcqp.VARIANTS}")
        if self.K < 2:
            raise ValueError("K must be at least 2")
        if not self.seeds:
            raise ValueError("seeds must be nonempty")
        for name in ("l1_weight", "sigma", "B", "radius", "shift"):
            v = getattr(self, name)
            if not np.isfinite(v):
                raise ValueError(f"{name} must be finite")

    def resolved_output_dir(self) -> str:
        return os.environ.get(OUTPUT_DIR_ENV, self.output_dir)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        return d

    @staticmethod
    def from_dict(d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "seeds" in d:
            d["seeds"] = tuple(d["seeds"])
        return ExperimentConfig(**d)


def run_seed(cfg: ExperimentConfig, seed: int) -> RunTrace:
    """Generate the seed's instance, solve, and return the trace."""
    inst = qcqp.generate_qcqp(
        n=cfg.n, m=cfg.m, l1_weight=cfg.l1_weight, radius=cfg.radius,
        strongly_convex=(cfg.mode == STRONGLY_CONVEX), seed=seed, shift=cfg.shift,
    )
    problem = qcqp.to_problem(inst, cfg.variant, sigma=cfg.sigma)
    params = ScheduleParams(
        mode=cfg.mode, horizon=cfg.K, smoothness=problem.smoothness,
        aggregates=problem.aggregates(), radius=cfg.radius, rho_1=cfg.rho_1, B=cfg.B,
    )
    schedule = build_schedule(params)
    result = solver_run(
        problem, schedule, x1=np.zeros(cfg.n), seed=_noise_seed(seed),
        inner_tol=cfg.inner_tol, inner_t_max=cfg.inner_t_max,
    )
    trace = trace_from_run(result)
    if cfg.with_reference:
        x_ref, psi0_ref = qcqp.reference_solution(inst, horizon=cfg.K,
                                                  variant=cfg.variant, B=cfg.B)
        mp = momentum_point(trace.x_final, trace.x_prev, trace.tau_prev)
        trace.momentum_distance = float(np.linalg.norm(mp - x_ref))
    return trace


def _noise_seed(seed: int) -> int:
    # Decouple the noise stream from the instance recipe.
    return int(seed) + 1_000_000


def _seed_worker(cfg_dict: dict, seed: int):
    cfg = ExperimentConfig.from_dict(cfg_dict)
    try:
        return seed, run_seed(cfg, seed), None
    except Exception:  # error is recorded per seed, the sweep continues
        return seed, None, traceback.format_exc()


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run every seed, write one trace CSV per seed and one summary.

    Per-seed failures are captured in the summary ('errors') without
    aborting the remaining seeds.  Seed-mean objective and feasibility
    curves are the arithmetic means of the per-seed per-iteration values.
    """
    outdir = cfg.resolved_output_dir()
    os.makedirs(outdir, exist_ok=True)

    outcomes = {}
    errors = {}
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            futures = [pool.submit(_seed_worker, cfg.to_dict(), s) for s in cfg.seeds]
            results = [f.result() for f in futures]
    else:
        results = [_seed_worker(cfg.to_dict(), s) for s in cfg.seeds]
    for seed, trace, err in results:
        if err is not None:
            errors[seed] = err
        else:
            outcomes[seed] = trace
            write_trace_csv(os.path.join(outdir, _trace_name(cfg, seed)), trace)

    summary = {
        "config": cfg.to_dict(),
        "errors": {str(s): e for s, e in errors.items()},
        "per_seed": {},
    }
    psi_curves, feas_curves, inner_all = [], [], []
    for seed, trace in outcomes.items():
        summary["per_seed"][str(seed)] = {
            "psi0": trace.final_objective,
            "feas_gap": trace.final_feasibility,
            "sparsity": trace.sparsity,
            "oracle_calls": trace.oracle_calls,
            "momentum_distance": trace.momentum_distance,
            "trace_file": _trace_name(cfg, seed),
        }
        psi_curves.append([r.psi0 for r in trace.rows])
        feas_curves.append([r.feas_gap for r in trace.rows])
        inner_all.extend(int(r.inner_iters) for r in trace.rows)
    if outcomes:
        summary["mean_psi0_curve"] = np.mean(psi_curves, axis=0).tolist()
        summary["mean_feas_curve"] = np.mean(feas_curves, axis=0).tolist()
        summary["inner_histogram"] = {str(k): v for k, v in sorted(histogram(inner_all).items())}
    path = os.path.join(outdir, f"summary_{cfg.tag}_K{cfg.K}.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")
    summary["summary_file"] = path
    return summary


def _trace_name(cfg: ExperimentConfig, seed: int) -> str:
    return f"trace_{cfg.tag}_K{cfg.K}_seed{seed}.csv"


def fit_rate(points) -> float:
    """Least-squares slope of log(gap) against log(K).

    Nonpositive gaps are excluded; fewer than three surviving points raise
    InsufficientDataError.
    """
    ks, gaps = [], []
    for K, gap in points:
        if gap > 0:
            ks.append(float(K))
            gaps.append(float(gap))
    if len(ks) < 3:
        raise InsufficientDataError(
            f"need at least 3 positive gap points, have {len(ks)}"
        )
    slope = np.polyfit(np.log(ks), np.log(gaps), 1)[0]
    return float(slope)


def histogram(values) -> dict:
    """Frequency map of inner-iteration counts."""
    return dict(Counter(int(v) for v in values))


def sweep(cfg: ExperimentConfig, K_grid=None, lambda_grid=None) -> dict:
    """Run a grid of (K, lambda) experiments and fit rates across K.

    The optimality-gap fit uses |psi0(x_K) - psi0*| and needs references
    (cfg.with_reference); the feasibility fit is always attempted.
    """
    K_grid = [cfg.K] if not K_grid else list(K_grid)
    lambda_grid = [cfg.l1_weight] if lambda_grid is None else list(lambda_grid)
    out = {"experiments": [], "fits": {}}
    for lam in lambda_grid:
        feas_points, gap_points = [], []
        for K in K_grid:
            sub = replace(cfg, K=K, l1_weight=lam, tag=f"{cfg.tag}_lam{lam:g}")
            summary = run_experiment(sub)
            out["experiments"].append(summary)
            seeds_ok = summary["per_seed"]
            if not seeds_ok:
                continue
            feas_points.append((K, float(np.mean([v["feas_gap"] for v in seeds_ok.values()]))))
            if cfg.with_reference:
                gaps = []
                for seed_str, v in seeds_ok.items():
                    inst = qcqp.generate_qcqp(
                        n=cfg.n, m=cfg.m, l1_weight=lam, radius=cfg.radius,
                        strongly_convex=(cfg.mode == STRONGLY_CONVEX),
                        seed=int(seed_str), shift=cfg.shift,
                    )
                    _, psi0_ref = qcqp.reference_solution(inst, horizon=max(K_grid),
                                                          variant=cfg.variant, B=cfg.B)
                    gaps.append(v["psi0"] - psi0_ref)
                gap_points.append((K, abs(float(np.mean(gaps)))))
        fits = {}
        if len(feas_points) >= 3:
            try:
                fits["feasibility_slope"] = fit_rate(feas_points)
            except InsufficientDataError:
                fits["feasibility_slope"] = None
        if len(gap_points) >= 3:
            try:
                fits["optimality_slope"] = fit_rate(gap_points)
            except InsufficientDataError:
                fits["optimality_slope"] = None
        out["fits"][f"lambda={lam:g}"] = fits
    return out
