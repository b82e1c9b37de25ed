"""Closed-form proximal and projection primitives.

All operations are pure functions on numpy arrays and safe to call
concurrently.  The composite prox supports the shipped composite class:
chi_0 in {0, lam*||.||_1} with chi identically zero, over a Euclidean ball.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .problem import ProblemInstance


class UnsupportedCompositeError(ValueError):
    """Composite class has no closed-form prox in this library."""


def positive_part(a: np.ndarray) -> np.ndarray:
    """Componentwise max(a, 0)."""
    return np.maximum(a, 0.0)


def negative_part(a: np.ndarray) -> np.ndarray:
    """Componentwise min(a, 0); positive_part(a) + negative_part(a) == a."""
    return np.minimum(a, 0.0)


def project_l2_ball(x: np.ndarray, radius: float) -> np.ndarray:
    """Nearest point of the origin-centered ball of the given radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    x = np.asarray(x, dtype=float)
    nrm = float(np.linalg.norm(x))
    if nrm <= radius:
        return x
    return x * (radius / nrm)


def soft_threshold(x: np.ndarray, lam: float) -> np.ndarray:
    """Componentwise sign(x) * max(|x| - lam, 0), the l1 prox."""
    if lam < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=float)
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def prox_l1_over_ball(x: np.ndarray, lam: float, radius: float) -> np.ndarray:
    """Minimizer of lam*||u||_1 + 0.5*||u - x||^2 over ||u|| <= radius.

    Soft-threshold first, then rescale onto the ball if the unconstrained
    solution falls outside; the thresholded support and proportions are
    preserved by the rescaling.  A fully-thresholded input maps to zero.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    u = soft_threshold(x, lam)
    nrm = float(np.linalg.norm(u))
    if nrm > radius:
        u = u * (radius / nrm)
    return u


@dataclass(frozen=True)
class ProxRequest:
    """Arguments of the composite prox: nonnegative weights on chi, a linear
    term, the quadratic center and its curvature."""

    weights: np.ndarray
    linear: np.ndarray
    center: np.ndarray
    curvature: float

    def __post_init__(self):
        if self.curvature <= 0 or not np.isfinite(self.curvature):
            raise ValueError("curvature must be positive and finite")
        if np.any(np.asarray(self.weights) < 0):
            raise ValueError("weights must be nonnegative")


def composite_prox(inst: ProblemInstance, req: ProxRequest) -> np.ndarray:
    """argmin over the domain of
    chi_0(x) + <w, chi(x)> + <v, x> + (eta/2)*||x - center||^2.

    Dispatches on the composite class: the l1 objective composite maps to
    ``prox_l1_over_ball`` and the bare case to a ball projection.  Nonzero
    constraint composites would need an inner iterative solver and are
    rejected.
    """
    if inst.chi is not None:
        raise UnsupportedCompositeError("nonzero constraint composites are not supported")
    eta = float(req.curvature)
    shifted = np.asarray(req.center, dtype=float) - np.asarray(req.linear, dtype=float) / eta
    radius = inst.domain.radius
    if inst.l1_weight > 0.0:
        return prox_l1_over_ball(shifted, inst.l1_weight / eta, radius)
    return project_l2_ball(shifted, radius)
