"""Run traces and their CSV round trip.

One CSV per (seed, config) with the fixed column order
(k, psi0, feas_gap, inner_iters, tau, rho, eta, L, wall_ms), UTF-8, LF line
endings and '.' decimal separator.  Floats are written with repr-level
precision so parsing a written trace reproduces it field for field.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

CSV_COLUMNS = ("k", "psi0", "feas_gap", "inner_iters", "tau", "rho", "eta", "L", "wall_ms")


@dataclass
class TraceRow:
    k: int
    psi0: float
    feas_gap: float
    inner_iters: int
    tau: float
    rho: float
    eta: float
    L: float
    wall_ms: float


@dataclass
class RunTrace:
    """Per-iteration rows plus the terminal summary of one run.

    Keeps the last two iterates and the final tau so the momentum point can
    be formed after the fact, and carries the run's audit counters.
    """

    rows: list
    x_final: np.ndarray
    x_prev: np.ndarray
    tau_prev: float
    sparsity: int
    oracle_calls: int
    min_multiplier: float
    max_slack: float
    momentum_distance: float | None = None

    def __post_init__(self):
        ks = [row.k for row in self.rows]
        if ks != sorted(set(ks)):
            raise ValueError("trace rows must be strictly increasing in k")

    @property
    def inner_iterations(self) -> np.ndarray:
        return np.array([row.inner_iters for row in self.rows], dtype=int)

    @property
    def final_feasibility(self) -> float:
        return self.rows[-1].feas_gap

    @property
    def final_objective(self) -> float:
        return self.rows[-1].psi0


def trace_from_run(result, sparsity_threshold: float = 1e-10) -> RunTrace:
    """Build a RunTrace from a solver RunResult."""
    rows = [
        TraceRow(
            k=i + 1,
            psi0=r.objective,
            feas_gap=r.feasibility,
            inner_iters=r.inner_iterations,
            tau=r.steps.tau,
            rho=r.steps.rho,
            eta=r.steps.eta,
            L=r.steps.L,
            wall_ms=r.wall_time * 1e3,
        )
        for i, r in enumerate(result.reports)
    ]
    sparsity = int(np.count_nonzero(np.abs(result.x_final) < sparsity_threshold))
    return RunTrace(
        rows=rows,
        x_final=result.x_final,
        x_prev=result.x_prev,
        tau_prev=result.tau_prev,
        sparsity=sparsity,
        oracle_calls=result.oracle_calls,
        min_multiplier=result.min_multiplier,
        max_slack=result.max_slack,
    )


def write_trace_csv(path, trace: RunTrace):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in trace.rows:
            writer.writerow([
                row.k, repr(row.psi0), repr(row.feas_gap), row.inner_iters,
                repr(row.tau), repr(row.rho), repr(row.eta), repr(row.L),
                repr(row.wall_ms),
            ])


def read_trace_rows(path) -> list:
    """Parse a trace CSV back into rows (the file holds no terminal state)."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected trace columns {header}")
        for rec in reader:
            rows.append(TraceRow(
                k=int(rec[0]), psi0=float(rec[1]), feas_gap=float(rec[2]),
                inner_iters=int(rec[3]), tau=float(rec[4]), rho=float(rec[5]),
                eta=float(rec[6]), L=float(rec[7]), wall_ms=float(rec[8]),
            ))
    return rows
