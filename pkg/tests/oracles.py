"""Independent oracles used to check closed-form kernels and solver updates.

Nothing here shares code with the library paths under test: the l1-over-ball
prox is checked against proximal Dykstra splitting and a KKT residual, the
scalar prox against grid search, the slack update against bounded scalar
minimization, and the unconstrained solver path against a directly coded
accelerated gradient loop.
"""

import numpy as np


def dykstra_l1_ball(target, lam, radius, max_iter=20000, tol=1e-13):
    """prox of lam*||.||_1 + indicator of the radius-ball at `target`,
    computed by Boyle-Dykstra alternating prox iterations."""
    x = np.asarray(target, dtype=float).copy()
    p = np.zeros_like(x)
    q = np.zeros_like(x)
    for t in range(max_iter):
        y = np.sign(x + p) * np.maximum(np.abs(x + p) - lam, 0.0)
        p = x + p - y
        z = y + q
        nrm = np.linalg.norm(z)
        x_new = z if nrm <= radius else z * (radius / nrm)
        q = z - x_new
        if t > 2 and np.linalg.norm(x_new - x) <= tol * max(1.0, np.linalg.norm(x_new)):
            return x_new
        x = x_new
    return x


def l1_ball_kkt_residual(x, target, lam, radius):
    """First-order optimality residual for min lam*||u||_1 + 0.5||u-target||^2
    over the ball: distance from (target - x) to lam*d||x||_1 + N_ball(x)."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(target, dtype=float) - x
    nonzero = np.abs(x) > 0
    if np.linalg.norm(x) < radius * (1.0 - 1e-9):
        theta = 0.0
    else:
        den = float(x[nonzero] @ x[nonzero])
        if den > 0:
            theta = max(0.0, float(x[nonzero] @ (r[nonzero] - lam * np.sign(x[nonzero]))) / den)
        else:
            theta = 0.0
    resid = np.where(
        nonzero,
        r - theta * x - lam * np.sign(x),
        np.maximum(np.abs(r - theta * x) - lam, 0.0),
    )
    return float(np.linalg.norm(resid))


def scalar_prox_grid(x, lam, points=200_001, refinements=3):
    """Grid-search minimizer of lam*|t| + 0.5*(t - x)^2, with the grid
    refined around the current argmin until spacing is well below 1e-6."""
    span = abs(x) + lam + 1.0
    lo, hi = -span, span
    best = 0.0
    for _ in range(refinements):
        ts = np.linspace(lo, hi, points)
        vals = lam * np.abs(ts) + 0.5 * (ts - x) ** 2
        best = float(ts[np.argmin(vals)])
        width = (hi - lo) / (points - 1)
        lo, hi = best - 2 * width, best + 2 * width
    return best


def slack_update_bruteforce(y_tilde, rho, center, points=50_001, stages=3):
    """Componentwise solve of min_{s <= 0} <-y_tilde, s> + (rho/2)||center - s||^2
    by staged grid search over [lo, 0] (scalar optimizers bottom out near
    sqrt(eps) relative accuracy, a grid refined three times does not)."""
    s = np.empty_like(np.asarray(center, dtype=float))
    for i, (yt, c) in enumerate(zip(np.asarray(y_tilde, float), np.asarray(center, float))):
        lo = min(c - 10.0 * (abs(c) + 1.0), -10.0 * (abs(yt) / rho + 1.0))
        hi = 0.0
        best = 0.0
        for _ in range(stages):
            ts = np.linspace(lo, hi, points)
            vals = -yt * ts + 0.5 * rho * (c - ts) ** 2
            best = float(ts[np.argmin(vals)])
            width = (hi - lo) / (points - 1)
            lo, hi = best - 2 * width, min(best + 2 * width, 0.0)
        s[i] = best
    return s


def accelerated_gradient(grad, project, x1, L_seq, beta_seq, iterations):
    """Directly coded momentum gradient loop: x_{k+1} = P(x_hat - grad/L_k),
    x_hat_{k+1} = x_{k+1} + beta_{k+1} (x_{k+1} - x_k)."""
    x = np.asarray(x1, dtype=float).copy()
    x_hat = x.copy()
    iterates = []
    for k in range(iterations):
        x_next = project(x_hat - grad(x_hat) / L_seq[k])
        x_hat = x_next + beta_seq[k] * (x_next - x)
        x = x_next
        iterates.append(x.copy())
    return iterates
