"""Outer loop of the augmented constraint-extrapolation method and the inner
fixed-point computation of its joint slack/primal update.

Each outer iteration freezes one stochastic gradient sample together with the
constraint values and Jacobian at the extrapolated point; the implicit
(s, x) update is then the unique fixed point of a prox operator F built from
those frozen quantities, found by plain iteration (F contracts whenever
L >= 2*rho*(M_g + M_chi)^2).  No oracle is re-evaluated inside the loop, so
one run costs exactly K - 1 stochastic gradient samples.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .problem import DomainError, ProblemInstance
from .prox import ProxRequest, composite_prox, negative_part, positive_part
from .schedules import Schedule, StepSizes


class InternalConsistencyError(RuntimeError):
    """Closed-form dual recovery disagrees with the extrapolated update."""


@dataclass
class SolverState:
    """Live iterates after outer iteration k."""

    k: int
    x: np.ndarray
    x_prev: np.ndarray
    x_hat: np.ndarray
    s: np.ndarray
    y: np.ndarray
    y_tilde: np.ndarray
    y_bar: np.ndarray
    V: np.ndarray


@dataclass(frozen=True)
class InnerWorkspace:
    """Frozen per-iteration data driving the fixed-point loop.

    ``U`` collects every w-independent piece of the extrapolated constraint
    residual; ``sampled_grad`` is the single stochastic gradient drawn for
    this outer iteration and reused by every F application.
    """

    U: np.ndarray
    sampled_grad: np.ndarray
    g_hat: np.ndarray
    J_hat: np.ndarray
    x_hat: np.ndarray
    rho: float
    L: float
    tau: float
    y_tilde: np.ndarray
    V_prev: np.ndarray


@dataclass
class IterationReport:
    """Per-iteration record emitted by ``step``."""

    inner_iterations: int
    inner_residual: float
    hit_cap: bool
    objective: float
    feasibility: float
    steps: StepSizes
    wall_time: float


def init(inst: ProblemInstance, x1: np.ndarray, y1: np.ndarray | None = None) -> SolverState:
    """State before the first iteration: x_hat = x_1, y_tilde = y_bar = y_1,
    s_1 = 0 and V_1 = g(x_1) + chi(x_1)."""
    x1 = np.asarray(x1, dtype=float)
    if not inst.domain.contains(x1):
        raise DomainError("x1 lies outside the domain")
    m = inst.n_constraints
    y1 = np.zeros(m) if y1 is None else np.asarray(y1, dtype=float)
    if y1.shape != (m,):
        raise ValueError("y1 has the wrong length")
    return SolverState(
        k=1,
        x=x1.copy(),
        x_prev=x1.copy(),
        x_hat=x1.copy(),
        s=np.zeros(m),
        y=y1.copy(),
        y_tilde=y1.copy(),
        y_bar=y1.copy(),
        V=inst.psi(x1),
    )


def build_workspace(state: SolverState, inst: ProblemInstance, steps: StepSizes,
                    rng: np.random.Generator) -> InnerWorkspace:
    """Draw the iteration's stochastic sample and freeze everything the inner
    loop needs.  This is the only point where oracles are invoked."""
    x_hat = state.x_hat
    g_hat = np.asarray(inst.constraint_values(x_hat), dtype=float)
    J_hat = np.asarray(inst.constraint_jacobian(x_hat), dtype=float)
    sample = np.asarray(inst.stochastic_grad(x_hat, rng), dtype=float)
    U = g_hat - J_hat.T @ x_hat - (1.0 - steps.tau) * state.V + state.y_tilde / steps.rho
    return InnerWorkspace(
        U=U,
        sampled_grad=sample,
        g_hat=g_hat,
        J_hat=J_hat,
        x_hat=x_hat.copy(),
        rho=steps.rho,
        L=steps.L,
        tau=steps.tau,
        y_tilde=state.y_tilde.copy(),
        V_prev=state.V.copy(),
    )


def _residual(ws: InnerWorkspace, inst: ProblemInstance, w: np.ndarray) -> np.ndarray:
    """Extrapolated constraint residual U + J_hat^T w + chi(w)."""
    r = ws.U + ws.J_hat.T @ w
    if inst.chi is not None:
        r = r + inst.chi_values(w)
    return r


def apply_F(w: np.ndarray, ws: InnerWorkspace, inst: ProblemInstance) -> np.ndarray:
    """One application of the fixed-point operator.

    The candidate multiplier rho*[residual]_+ enters both as the weight on
    the constraint composites and through the linear term of the prox.
    """
    weights = ws.rho * positive_part(_residual(ws, inst, w))
    linear = ws.sampled_grad + ws.J_hat @ weights
    return composite_prox(
        inst, ProxRequest(weights=weights, linear=linear, center=ws.x_hat, curvature=ws.L)
    )


def inner_fixed_point(ws: InnerWorkspace, inst: ProblemInstance,
                      tol: float = 1e-12, t_max: int = 50):
    """Iterate w <- F(w) from w_0 = x_hat until the step is below
    tol*max(1, ||w||) or t_max applications have been made.

    Returns (x_next, iterations, last_residual, hit_cap).  Hitting the cap is
    reported, not fatal; with the contraction premise in force the error
    halves (at least) per application.
    """
    w = ws.x_hat.copy()
    res = np.inf
    for t in range(1, t_max + 1):
        w_new = apply_F(w, ws, inst)
        res = float(np.linalg.norm(w_new - w))
        stop = res <= tol * max(1.0, float(np.linalg.norm(w)))
        w = w_new
        if stop:
            return w, t, res, False
    return w, t_max, res, True


def recover_s_y(x_next: np.ndarray, ws: InnerWorkspace, inst: ProblemInstance,
                consistency_tol: float = 1e-8):
    """Closed-form slack and multiplier at the inner solution.

    s is the negative part and y is rho times the positive part of the same
    residual vector, so y/rho + s reconstructs the residual exactly and
    <y, s> = 0 by disjoint supports.  The multiplier is cross-checked
    against its extrapolated dual-update definition.
    """
    a = _residual(ws, inst, x_next)
    s_next = negative_part(a)
    y_next = ws.rho * positive_part(a)
    # Same quantity through the dual-update route, from the frozen state.
    chi_next = inst.chi_values(x_next) if inst.chi is not None else 0.0
    ell_g = ws.g_hat + ws.J_hat.T @ (x_next - ws.x_hat)
    V_tilde = ell_g + chi_next - s_next
    y_check = ws.y_tilde + ws.rho * (V_tilde - (1.0 - ws.tau) * ws.V_prev)
    err = float(np.linalg.norm(y_next - y_check))
    if err > consistency_tol * max(1.0, float(np.linalg.norm(y_next))):
        raise InternalConsistencyError(
            f"multiplier recovery mismatch {err:.3e} exceeds {consistency_tol:.1e}"
        )
    return s_next, y_next


def step(state: SolverState, inst: ProblemInstance, schedule: Schedule,
         rng: np.random.Generator, inner_tol: float = 1e-12,
         inner_t_max: int = 50) -> tuple[SolverState, IterationReport]:
    """Advance the outer loop by one iteration.

    Draws one stochastic sample, solves the implicit (s, x) update through
    the fixed-point loop, recovers the multiplier, applies the extrapolated
    dual step and the momentum step.
    """
    t0 = time.perf_counter()
    k = state.k
    steps = schedule.at(k)
    ws = build_workspace(state, inst, steps, rng)
    x_next, iters, res, hit_cap = inner_fixed_point(ws, inst, inner_tol, inner_t_max)
    s_next, y_next = recover_s_y(x_next, ws, inst)

    chi_next = inst.chi_values(x_next) if inst.chi is not None else 0.0
    ell_g = ws.g_hat + ws.J_hat.T @ (x_next - state.x_hat)
    V_tilde = ell_g + chi_next - s_next
    g_next = np.asarray(inst.constraint_values(x_next), dtype=float)
    V_next = g_next + chi_next - s_next
    y_tilde_next = state.y_tilde + steps.eta * (V_tilde - (1.0 - steps.tau) * state.V)
    y_bar_next = (1.0 - steps.tau) * state.y_bar + steps.tau * y_next
    x_hat_next = x_next + steps.beta_next * (x_next - state.x)

    new_state = SolverState(
        k=k + 1,
        x=x_next,
        x_prev=state.x,
        x_hat=x_hat_next,
        s=s_next,
        y=y_next,
        y_tilde=y_tilde_next,
        y_bar=y_bar_next,
        V=V_next,
    )
    objective = float(inst.objective_value(x_next)) + inst.chi0_value(x_next)
    feasibility = float(np.linalg.norm(positive_part(g_next + chi_next)))
    report = IterationReport(
        inner_iterations=iters,
        inner_residual=res,
        hit_cap=hit_cap,
        objective=objective,
        feasibility=feasibility,
        steps=steps,
        wall_time=time.perf_counter() - t0,
    )
    return new_state, report


@dataclass
class RunResult:
    """Last iterate plus everything needed to audit a run."""

    x_final: np.ndarray
    x_prev: np.ndarray
    tau_prev: float
    state: SolverState
    reports: list
    oracle_calls: int
    min_multiplier: float
    max_slack: float

    @property
    def inner_iterations(self) -> np.ndarray:
        return np.array([r.inner_iterations for r in self.reports], dtype=int)


def run(inst: ProblemInstance, schedule: Schedule, x1: np.ndarray,
        y1: np.ndarray | None = None, seed: int | np.random.Generator = 0,
        inner_tol: float = 1e-12, inner_t_max: int = 50) -> RunResult:
    """Execute K - 1 outer iterations and return the last iterate.

    The RNG stream is owned by the run; reruns with equal seeds reproduce
    the trajectory exactly.  ``min_multiplier``/``max_slack`` track the sign
    invariants over the whole run.
    """
    K = schedule.horizon
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    state = init(inst, x1, y1)
    reports = []
    min_mult, max_slack = np.inf, -np.inf
    counting = _CountingOracle(inst.stochastic_grad)
    inst_counted = _with_oracle(inst, counting)
    for _ in range(1, K):
        state, report = step(state, inst_counted, schedule, rng, inner_tol, inner_t_max)
        reports.append(report)
        if state.y.size:
            min_mult = min(min_mult, float(state.y.min()))
            max_slack = max(max_slack, float(state.s.max()))
    calls = counting.calls
    return RunResult(
        x_final=state.x,
        x_prev=state.x_prev,
        tau_prev=schedule.at(K - 1).tau,
        state=state,
        reports=reports,
        oracle_calls=calls,
        min_multiplier=min_mult,
        max_slack=max_slack,
    )


class _CountingOracle:
    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x, rng):
        self.calls += 1
        return self.fn(x, rng)


def _with_oracle(inst: ProblemInstance, oracle) -> ProblemInstance:
    from dataclasses import replace

    return replace(inst, stochastic_grad=oracle)


def momentum_point(x_final: np.ndarray, x_prev: np.ndarray, tau_prev: float) -> np.ndarray:
    """Affine combination (1/tau)*[x_K - (1 - tau)*x_{K-1}] whose distance to
    the optimum carries the accelerated strongly convex guarantee."""
    if not 0.0 < tau_prev <= 1.0:
        raise ValueError("tau_prev must lie in (0, 1]")
    return (np.asarray(x_final, dtype=float) - (1.0 - tau_prev) * np.asarray(x_prev, dtype=float)) / tau_prev
