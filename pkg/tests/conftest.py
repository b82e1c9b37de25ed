import numpy as np
import pytest

from augconex import (
    Ball,
    ConstraintProfile,
    InnerWorkspace,
    ProblemInstance,
    SmoothnessProfile,
)


def make_quadratic_problem(A0, b0, radius, l1_weight=0.0, sigma=0.0, mu_f=None,
                           constraint_A=None, constraint_b=None, constraint_c=None):
    """Hand-wired ProblemInstance for quadratic objectives, m >= 0 constraints."""
    A0 = np.asarray(A0, dtype=float)
    b0 = np.asarray(b0, dtype=float)
    n = A0.shape[0]
    if constraint_A is None:
        Ag = np.zeros((0, n, n))
        bg = np.zeros((0, n))
        c = np.zeros(0)
    else:
        Ag = np.asarray(constraint_A, dtype=float)
        bg = np.asarray(constraint_b, dtype=float)
        c = np.asarray(constraint_c, dtype=float)
    m = Ag.shape[0]

    def objective_value(x):
        return 0.5 * float(x @ (A0 @ x)) + float(b0 @ x)

    def objective_grad(x):
        return A0 @ x + b0

    def stochastic_grad(x, rng):
        return objective_grad(x) + sigma * rng.standard_normal(n)

    def constraint_values(x):
        if m == 0:
            return np.zeros(0)
        return 0.5 * np.einsum("i,mij,j->m", x, Ag, x) + bg @ x - c

    def constraint_jacobian(x):
        if m == 0:
            return np.zeros((n, 0))
        return (np.einsum("mij,j->mi", Ag, x) + bg).T

    spectral = [np.linalg.norm(M, 2) for M in Ag]
    smooth = SmoothnessProfile(
        L_f=float(np.linalg.norm(A0, 2)),
        H_f=0.0,
        mu_f=float(np.linalg.eigvalsh(A0)[0]) if mu_f is None else mu_f,
        sigma=sigma * np.sqrt(n),
    )
    profile = ConstraintProfile.from_arrays(
        L_g=spectral,
        H_g=np.zeros(m),
        M_g=[radius * s + np.linalg.norm(bv) for s, bv in zip(spectral, bg)],
        M_chi=np.zeros(m),
    )
    return ProblemInstance(
        dim=n, n_constraints=m,
        objective_value=objective_value, objective_grad=objective_grad,
        stochastic_grad=stochastic_grad, constraint_values=constraint_values,
        constraint_jacobian=constraint_jacobian, smoothness=smooth,
        constraints=profile, domain=Ball(radius=radius), l1_weight=l1_weight,
    )


def make_workspace(inst, x_hat, y_tilde, V_prev, rho, L, tau, rng=None):
    """Consistent InnerWorkspace built from raw state, as the solver would."""
    rng = rng or np.random.default_rng(0)
    g_hat = np.asarray(inst.constraint_values(x_hat), dtype=float)
    J_hat = np.asarray(inst.constraint_jacobian(x_hat), dtype=float)
    sample = np.asarray(inst.stochastic_grad(x_hat, rng), dtype=float)
    U = g_hat - J_hat.T @ x_hat - (1.0 - tau) * V_prev + np.asarray(y_tilde) / rho
    return InnerWorkspace(
        U=U, sampled_grad=sample, g_hat=g_hat, J_hat=J_hat, x_hat=np.asarray(x_hat, float),
        rho=rho, L=L, tau=tau, y_tilde=np.asarray(y_tilde, float),
        V_prev=np.asarray(V_prev, float),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)
