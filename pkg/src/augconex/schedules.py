"""Per-iteration step-size policies, their side conditions, and the
iteration-count bounds attached to each policy.

Two policies are provided.  The convex policy uses

    tau_k  = 2/(k+1),   rho_k = rho_1*(k+1) for k >= 2,   eta_k = rho_1*k^2/K,
    beta_{k+1} = (1 - tau_k)*tau_{k+1}/tau_k,
    L_k = L = 2*(L_f + B*L_g + rho_1*K*(M_g + M_chi)^2)
              + K*sqrt(120*K*(H*^2 + 2*(H_f^2 + sigma^2)))/(120*D_x),

and the strongly convex policy uses

    tau_1 = 1,  tau_{k+1} = (tau_k/2)*(sqrt(tau_k^2 + 4) - tau_k),
    rho_k = rho_1/tau_k^2 with rho_1 = mu_f/(2*(M_g + M_chi)^2),
    eta_k = rho_k,  L_k = 2*(L_f + B*L_g + rho_k*(M_g + M_chi)^2),
    beta_{k+1} = (1 - tau_k)*tau_k*L_k/(tau_k^2*L_k + L_{k+1}*tau_{k+1}).

The constant H* is a dual-norm-dependent quantity; since no algorithm can
observe the true dual norm, it is evaluated from a user-supplied bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .problem import AggregateConstants, SmoothnessProfile

CONVEX = "convex"
STRONGLY_CONVEX = "strongly-convex"
MODES = (CONVEX, STRONGLY_CONVEX)


@dataclass(frozen=True)
class ScheduleParams:
    """Everything needed to materialize a step-size schedule.

    ``rho_1`` is free in convex mode (default 1.0); in strongly convex mode
    it is derived as mu_f/(strong_rho1_factor*(M_g + M_chi)^2) and an
    explicit value is accepted only when M_g + M_chi = 0, where the formula
    is undefined.  ``y1_dist`` feeds the iteration bounds (distance from y_1
    to the dual comparison point); when omitted it is derived from
    ``dual_norm_bound`` assuming y_1 = 0.
    """

    mode: str
    horizon: int
    smoothness: SmoothnessProfile
    aggregates: AggregateConstants
    radius: float
    rho_1: float | None = None
    B: float = 1.0
    dual_norm_bound: float = 0.0
    y1_dist: float | None = None
    strong_rho1_factor: float = 2.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.horizon < 2:
            raise ValueError("horizon K must be at least 2")
        if self.B < 1.0:
            raise ValueError("B must be at least 1")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.dual_norm_bound < 0:
            raise ValueError("dual_norm_bound must be nonnegative")
        if self.mode == STRONGLY_CONVEX and self.smoothness.mu_f <= 0:
            raise ValueError("strongly convex policy requires mu_f > 0")
        if self.rho_1 is not None and self.rho_1 <= 0:
            raise ValueError("rho_1 must be positive")

    @property
    def coupling(self) -> float:
        """M_g + M_chi, the Lipschitz modulus coupling primal and dual."""
        return self.aggregates.M_g + self.aggregates.M_chi

    def resolved_rho1(self) -> float:
        if self.mode == CONVEX:
            return 1.0 if self.rho_1 is None else self.rho_1
        M = self.coupling
        if M == 0.0:
            if self.rho_1 is None:
                raise ValueError(
                    "strongly convex rho_1 is undefined with M_g + M_chi = 0; "
                    "supply rho_1 explicitly"
                )
            return self.rho_1
        return self.smoothness.mu_f / (self.strong_rho1_factor * M**2)


@dataclass(frozen=True)
class StepSizes:
    """Schedule values consumed by one outer iteration."""

    tau: float
    rho: float
    eta: float
    L: float
    beta_next: float


def h_star(params: ScheduleParams) -> float:
    """L_g*D_x*[bound + 1 - B]_+ + H_g*(bound + 1) with the dual norm
    replaced by ``dual_norm_bound``."""
    bound = params.dual_norm_bound
    agg = params.aggregates
    return agg.L_g * params.radius * max(bound + 1.0 - params.B, 0.0) + agg.H_g * (
        bound + 1.0
    )


class Schedule:
    """Precomputed schedule arrays for k = 1..K.

    Immutable after construction; the one-step lookahead needed by the
    extrapolation weight is why the arrays are materialized up front.
    """

    def __init__(self, params: ScheduleParams):
        self.params = params
        K = params.horizon
        rho1 = params.resolved_rho1()
        sm, agg = params.smoothness, params.aggregates
        M2 = params.coupling**2
        ks = np.arange(1, K + 1, dtype=float)

        if params.mode == CONVEX:
            tau = 2.0 / (ks + 1.0)
            rho = np.where(ks >= 2, rho1 * (ks + 1.0), rho1)
            eta = rho1 * ks**2 / K
            hs = h_star(params)
            noise = K * math.sqrt(120.0 * K * (hs**2 + 2.0 * (sm.H_f**2 + sm.sigma**2)))
            noise /= 120.0 * params.radius
            L = np.full(K, 2.0 * (sm.L_f + params.B * agg.L_g + rho1 * K * M2) + noise)
            beta = np.zeros(K)
            beta[:-1] = (1.0 - tau[:-1]) * tau[1:] / tau[:-1]
        else:
            tau = np.empty(K)
            tau[0] = 1.0
            for i in range(K - 1):
                t = tau[i]
                tau[i + 1] = 0.5 * t * (math.sqrt(t * t + 4.0) - t)
            rho = rho1 / tau**2
            eta = rho.copy()
            L = 2.0 * (sm.L_f + params.B * agg.L_g + rho * M2)
            beta = np.zeros(K)
            beta[:-1] = (
                (1.0 - tau[:-1]) * tau[:-1] * L[:-1]
                / (tau[:-1] ** 2 * L[:-1] + L[1:] * tau[1:])
            )

        self.rho_1 = rho1
        self.tau = tau
        self.rho = rho
        self.eta = eta
        self.L = L
        self.beta = beta  # beta[k-1] holds beta_{k+1}

    @property
    def horizon(self) -> int:
        return self.params.horizon

    def at(self, k: int) -> StepSizes:
        """Schedule values for outer iteration k, 1 <= k <= K - 1."""
        if not 1 <= k < self.horizon:
            raise ValueError(f"iteration index {k} outside 1..{self.horizon - 1}")
        i = k - 1
        return StepSizes(
            tau=float(self.tau[i]),
            rho=float(self.rho[i]),
            eta=float(self.eta[i]),
            L=float(self.L[i]),
            beta_next=float(self.beta[i]),
        )


@lru_cache(maxsize=64)
def _cached_schedule(params: ScheduleParams) -> Schedule:
    return Schedule(params)


def build_schedule(params: ScheduleParams) -> Schedule:
    return _cached_schedule(params)


def convex_schedule(params: ScheduleParams, k: int) -> StepSizes:
    if params.mode != CONVEX:
        raise ValueError("params.mode must be 'convex'")
    return build_schedule(params).at(k)


def strongly_convex_schedule(params: ScheduleParams, k: int) -> StepSizes:
    if params.mode != STRONGLY_CONVEX:
        raise ValueError("params.mode must be 'strongly-convex'")
    return build_schedule(params).at(k)


def _leq(lhs, rhs, rtol=1e-10):
    scale = max(1.0, abs(lhs), abs(rhs))
    return lhs <= rhs + rtol * scale


@dataclass
class ConditionReport:
    """Outcome of the schedule side-condition sweep.

    ``failures`` maps condition name to the sorted iteration indices where
    it failed; an empty mapping means every condition held over 2..K-1.
    """

    mode: str
    K: int
    checked: tuple
    failures: dict

    @property
    def all_passed(self) -> bool:
        return all(len(v) == 0 for v in self.failures.values())

    def summary(self) -> str:
        lines = [f"schedule conditions, mode={self.mode}, K={self.K}"]
        for name in self.checked:
            bad = self.failures[name]
            status = "pass" if not bad else f"FAIL at k={bad[:5]}{'...' if len(bad) > 5 else ''}"
            lines.append(f"  {name}: {status}")
        return "\n".join(lines)


def verify_conditions(params: ScheduleParams, K: int | None = None,
                      schedule: Schedule | None = None) -> ConditionReport:
    """Numerically check the policy side conditions for k = 2..K-1.

    Convex mode checks eta_k/2 <= rho_k, the lower bound on L_k and the
    eta monotonicity recursion.  Strongly convex mode checks the two
    extrapolation-weight inequalities, eta_k < 2*rho_k, the exact eta
    recursion (relative 1e-10) and the contraction premise on L_k.
    The report lists failures per condition; passing is the absence of any.
    """
    K = params.horizon if K is None else K
    if schedule is None:
        if K != params.horizon:
            params = ScheduleParams(**{**params.__dict__, "horizon": K})
        schedule = build_schedule(params)
    sm, agg = params.smoothness, params.aggregates
    M2 = params.coupling**2
    tau, rho, eta, L = schedule.tau, schedule.rho, schedule.eta, schedule.L
    mu = sm.mu_f
    B = params.B

    failures: dict[str, list[int]] = {}

    def record(name, k, ok):
        failures.setdefault(name, [])
        if not ok:
            failures[name].append(k)

    for k in range(2, K):
        i = k - 1
        if params.mode == CONVEX:
            record("eta_half_le_rho", k, _leq(eta[i] / 2.0, rho[i]))
            record("L_lower_bound", k,
                   _leq(2.0 * (sm.L_f + B * agg.L_g + rho[i] * M2), L[i]))
            record("eta_recursion", k, _leq(1.0 / eta[i], (1.0 - tau[i]) / eta[i - 1]))
        else:
            m_k = L[i] / L[i - 1]
            lhs1 = L[i - 1] * (1.0 - tau[i]) * tau[i - 1] ** 2 + mu * (1.0 - tau[i]) * tau[i]
            record("extrapolation_first", k, _leq((L[i] - mu) * tau[i] ** 2, lhs1))
            lhs2 = L[i - 1] * (tau[i - 1] ** 2 + m_k * tau[i]) * m_k * tau[i]
            record("extrapolation_second", k, _leq((L[i] - mu) * tau[i - 1] ** 2, lhs2))
            record("eta_lt_two_rho", k, eta[i] < 2.0 * rho[i])
            lhs = 1.0 / eta[i]
            rhs = (1.0 - tau[i]) / eta[i - 1]
            record("eta_recursion_exact", k,
                   abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs), abs(rhs)))
            record("L_contraction", k, _leq(2.0 * rho[i] * M2, L[i]))

    checked = tuple(failures.keys())
    return ConditionReport(mode=params.mode, K=K, checked=checked, failures=failures)


def iteration_bound(params: ScheduleParams, eps: float) -> int:
    """Iterations sufficient for an (eps, eps)-optimal solution under the
    policy matching ``params.mode``, rounded up to an integer.

    Evaluates the max-of-terms expression attached to each policy.  Terms
    with a vanishing numerator over a vanishing denominator are dropped.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    sm = params.smoothness
    agg = params.aggregates
    D = params.radius
    M2 = params.coupling**2
    hs = h_star(params)
    noise2 = sm.H_f**2 + sm.sigma**2
    LfBLg = sm.L_f + params.B * agg.L_g

    def ratio(num, den):
        if num == 0.0:
            return 0.0
        if den == 0.0:
            return math.inf
        return num / den

    if params.mode == CONVEX:
        rho1 = params.resolved_rho1()
        y1_dist = params.y1_dist
        if y1_dist is None:
            y1_dist = params.dual_norm_bound + 1.0  # y_1 = 0 against the shifted dual point
        t1 = (
            (130.0 * D) ** 2 * (hs**2 + 2.0 * noise2) / (0.3 * eps**2)
            + (400.0 * D) ** 2 * (hs**2 + 2.0 * noise2) / (120.0 * eps**2)
            + 1.0
        )
        t2 = 10.0 * y1_dist**2 / (eps * rho1) + 520.0 * D**2 * rho1 * M2 / eps + 2.0
        t3 = ratio(5.0 * noise2, eps * rho1 * M2) ** (1.0 / 3.0) + 1.0
        t4 = math.sqrt(260.0 * D**2 * LfBLg / eps) + 1.0
        t5 = (3000.0 * D**2 * (hs**2 + 8.0 * noise2) / eps**2) ** (1.0 / 3.0)
        bound = max(t1, t2, t3, t4, t5)
    else:
        mu = sm.mu_f
        eta1 = params.resolved_rho1()  # eta_1 = rho_1 under this policy
        y1_dist = params.y1_dist
        if y1_dist is None:
            y1_dist = params.dual_norm_bound
        t1 = (
            8.0 * D * math.sqrt(LfBLg / eps)
            + 2.0 * math.sqrt(2.0) * ratio(y1_dist, math.sqrt(eta1 * eps))
            + 4.0 * math.sqrt(2.0 * (hs**2 + 2.0 * noise2) / (mu * eps))
        )
        t2 = 16.0 * (hs**2 + 2.0 * noise2) / (mu * eps)
        bound = max(t1, t2)
    if not math.isfinite(bound):
        raise ValueError("iteration bound is infinite for these constants")
    return max(2, math.ceil(bound))
