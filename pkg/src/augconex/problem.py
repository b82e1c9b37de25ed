"""Constrained problem model: oracles, constants, domains and gap metrics.

The problem solved throughout is

    min  psi_0(x) = f(x) + chi_0(x)
    s.t. psi_i(x) = g_i(x) + chi_i(x) <= 0,   i = 1..m,
         x in X,

over a compact Euclidean ball X, where f may only be available through a
noisy first-order oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

# Relative slack accepted on ||x|| <= radius after projections.
DOMAIN_RTOL = 1e-9


class DomainError(ValueError):
    """Point lies outside the feasible domain beyond tolerance."""


def _check_nonneg(name, value):
    if not np.all(np.isfinite(value)):
        raise ValueError(f"{name} must be finite")
    if np.any(np.asarray(value) < 0):
        raise ValueError(f"{name} must be nonnegative")


@dataclass(frozen=True)
class SmoothnessProfile:
    """Objective constants: Lipschitz-smooth modulus, nonsmooth modulus,
    strong-convexity modulus, and the stochastic-oracle noise bound.

    ``sigma`` bounds the Euclidean norm of the gradient-oracle deviation,
    i.e. E||F(x, xi) - f'(x)||^2 <= sigma^2.
    """

    L_f: float
    H_f: float = 0.0
    mu_f: float = 0.0
    sigma: float = 0.0

    def __post_init__(self):
        for name in ("L_f", "H_f", "mu_f", "sigma"):
            _check_nonneg(name, getattr(self, name))


@dataclass(frozen=True)
class ConstraintProfile:
    """Per-constraint constants, all length-m sequences."""

    L_g: tuple
    H_g: tuple
    M_g: tuple
    M_chi: tuple

    def __post_init__(self):
        lengths = {len(self.L_g), len(self.H_g), len(self.M_g), len(self.M_chi)}
        if len(lengths) != 1:
            raise ValueError("per-constraint sequences must share one length")
        for name in ("L_g", "H_g", "M_g", "M_chi"):
            _check_nonneg(name, np.asarray(getattr(self, name), dtype=float))

    @property
    def m(self) -> int:
        return len(self.L_g)

    @staticmethod
    def from_arrays(L_g, H_g, M_g, M_chi) -> "ConstraintProfile":
        return ConstraintProfile(
            tuple(float(v) for v in L_g),
            tuple(float(v) for v in H_g),
            tuple(float(v) for v in M_g),
            tuple(float(v) for v in M_chi),
        )


@dataclass(frozen=True)
class AggregateConstants:
    """Root-sum-square aggregates of the per-constraint constants."""

    L_g: float
    H_g: float
    M_g: float
    M_chi: float


def aggregate_constants(profile: ConstraintProfile) -> AggregateConstants:
    """Aggregate per-constraint constants into their Euclidean norms.

    Empty profiles (m = 0) aggregate to zeros.
    """
    return AggregateConstants(
        L_g=float(np.linalg.norm(profile.L_g)),
        H_g=float(np.linalg.norm(profile.H_g)),
        M_g=float(np.linalg.norm(profile.M_g)),
        M_chi=float(np.linalg.norm(profile.M_chi)),
    )


@dataclass(frozen=True)
class Ball:
    """Euclidean ball {x : ||x|| <= radius} centered at the origin."""

    radius: float

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius > 0):
            raise ValueError("radius must be positive and finite")

    def project(self, x: np.ndarray) -> np.ndarray:
        nrm = float(np.linalg.norm(x))
        if nrm <= self.radius:
            return np.asarray(x, dtype=float)
        return np.asarray(x, dtype=float) * (self.radius / nrm)

    def contains(self, x: np.ndarray, rtol: float = DOMAIN_RTOL) -> bool:
        return float(np.linalg.norm(x)) <= self.radius * (1.0 + rtol)


@dataclass(frozen=True)
class ProblemInstance:
    """Oracle bundle plus constants for one constrained problem.

    The composite terms are restricted to the shipped class: chi_0 is
    ``l1_weight * ||.||_1`` (zero weight disables it) and the constraint
    composites chi_i are identically zero when ``chi`` is None.  Oracles are
    pure given (x, rng); instances are immutable and shareable.
    """

    dim: int
    n_constraints: int
    objective_value: Callable[[np.ndarray], float]
    objective_grad: Callable[[np.ndarray], np.ndarray]
    stochastic_grad: Callable[[np.ndarray, np.random.Generator], np.ndarray]
    constraint_values: Callable[[np.ndarray], np.ndarray]
    constraint_jacobian: Callable[[np.ndarray], np.ndarray]
    smoothness: SmoothnessProfile
    constraints: ConstraintProfile
    domain: Ball
    l1_weight: float = 0.0
    chi: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.l1_weight < 0:
            raise ValueError("l1_weight must be nonnegative")
        if self.constraints.m != self.n_constraints:
            raise ValueError("constraint profile length does not match m")

    def chi0_value(self, x: np.ndarray) -> float:
        if self.l1_weight == 0.0:
            return 0.0
        return self.l1_weight * float(np.abs(x).sum())

    def chi_values(self, x: np.ndarray) -> np.ndarray:
        if self.chi is None:
            return np.zeros(self.n_constraints)
        return np.asarray(self.chi(x), dtype=float)

    def psi(self, x: np.ndarray) -> np.ndarray:
        """Constraint vector psi(x) = g(x) + chi(x)."""
        return np.asarray(self.constraint_values(x), dtype=float) + self.chi_values(x)

    def aggregates(self) -> AggregateConstants:
        return aggregate_constants(self.constraints)


@dataclass(frozen=True)
class PrimalDualPoint:
    """Primal point with slack and multiplier vectors (s <= 0, y >= 0)."""

    x: np.ndarray
    s: np.ndarray
    y: np.ndarray

    def validate(self, atol: float = 0.0):
        if np.any(self.s > atol):
            raise ValueError("slack s must be componentwise nonpositive")
        if np.any(self.y < -atol):
            raise ValueError("multiplier y must be componentwise nonnegative")


def eval_objective(inst: ProblemInstance, x: np.ndarray) -> float:
    """psi_0(x) = f(x) + chi_0(x); rejects points outside the domain."""
    if not inst.domain.contains(x):
        raise DomainError(
            f"||x|| = {np.linalg.norm(x):.6g} exceeds radius {inst.domain.radius:.6g}"
        )
    return float(inst.objective_value(x)) + inst.chi0_value(x)


def feasibility_gap(inst: ProblemInstance, x: np.ndarray) -> float:
    """Euclidean norm of the componentwise constraint violations ||[psi(x)]_+||."""
    return float(np.linalg.norm(np.maximum(inst.psi(x), 0.0)))


def lagrangian(inst: ProblemInstance, point: PrimalDualPoint) -> float:
    """Slack Lagrangian psi_0(x) + <y, psi(x) - s>.

    With s = 0 this reduces to the classical Lagrangian of the problem.
    """
    x = np.asarray(point.x, dtype=float)
    value = float(inst.objective_value(x)) + inst.chi0_value(x)
    if inst.n_constraints:
        value += float(np.dot(point.y, inst.psi(x) - point.s))
    return value


def optimality_gap(inst: ProblemInstance, x: np.ndarray, ref_value: float) -> float:
    """Signed objective excess psi_0(x) - ref_value.

    Slightly negative values are legitimate for infeasible x; callers that
    need a magnitude should take ``abs`` themselves.
    """
    return eval_objective(inst, x) - float(ref_value)
