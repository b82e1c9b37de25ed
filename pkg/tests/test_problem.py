import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from augconex import (
    Ball,
    ConstraintProfile,
    DomainError,
    PrimalDualPoint,
    SmoothnessProfile,
    aggregate_constants,
    eval_objective,
    feasibility_gap,
    lagrangian,
    optimality_gap,
)
from conftest import make_quadratic_problem


def profile_from_M(M_g):
    m = len(M_g)
    return ConstraintProfile.from_arrays(np.zeros(m), np.zeros(m), M_g, np.zeros(m))


class TestAggregateConstants:
    def test_three_four_five(self):
        agg = aggregate_constants(profile_from_M([3.0, 4.0]))
        assert agg.M_g == pytest.approx(5.0, rel=1e-12)

    def test_all_zero(self):
        agg = aggregate_constants(
            ConstraintProfile.from_arrays(np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3))
        )
        assert (agg.L_g, agg.H_g, agg.M_g, agg.M_chi) == (0.0, 0.0, 0.0, 0.0)

    def test_unit_quadruple(self):
        # root-sum-square of (1,1,1,1), computed directly
        expected = float(np.sqrt(np.sum(np.ones(4) ** 2)))
        agg = aggregate_constants(profile_from_M([1.0, 1.0, 1.0, 1.0]))
        assert agg.M_g == pytest.approx(expected, rel=1e-12)
        assert expected == 2.0

    def test_empty_profile(self):
        agg = aggregate_constants(profile_from_M([]))
        assert agg.M_g == 0.0

    @given(st.lists(st.floats(0.0, 1e6), min_size=1, max_size=6), st.floats(1e-6, 1e3))
    @settings(max_examples=60, deadline=None)
    def test_monotone_in_entries(self, entries, bump):
        base = aggregate_constants(profile_from_M(entries)).M_g
        entries2 = list(entries)
        entries2[0] += bump
        assert aggregate_constants(profile_from_M(entries2)).M_g >= base


class TestProfiles:
    def test_negative_entries_rejected(self):
        with pytest.raises(ValueError):
            SmoothnessProfile(L_f=-1.0)
        with pytest.raises(ValueError):
            profile_from_M([-0.5])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ConstraintProfile.from_arrays([1.0], [1.0, 2.0], [1.0], [1.0])


class TestDomain:
    def test_projection_stays_in_ball(self, rng):
        ball = Ball(radius=2.5)
        for _ in range(200):
            x = rng.standard_normal(7) * rng.uniform(0, 10)
            assert np.linalg.norm(ball.project(x)) <= 2.5 + 1e-12

    def test_interior_untouched(self):
        ball = Ball(radius=3.0)
        x = np.array([1.0, -1.0])
        assert ball.project(x) is not None
        np.testing.assert_array_equal(ball.project(x), x)


def identity_problem(l1_weight, radius=10.0):
    return make_quadratic_problem(np.eye(2), np.zeros(2), radius, l1_weight=l1_weight)


class TestObjective:
    def test_identity_quadratic_with_l1(self):
        prob = identity_problem(1.0)
        assert eval_objective(prob, np.array([1.0, 0.0])) == pytest.approx(1.5, rel=1e-12)

    def test_zero_point(self):
        prob = identity_problem(1.0)
        assert eval_objective(prob, np.zeros(2)) == 0.0

    def test_zero_weight_reduces_to_quadratic(self, rng):
        prob = identity_problem(0.0)
        x = rng.standard_normal(2)
        assert eval_objective(prob, x) == pytest.approx(0.5 * float(x @ x), rel=1e-12)

    def test_domain_violation_raises(self):
        prob = identity_problem(0.0, radius=1.0)
        with pytest.raises(DomainError):
            eval_objective(prob, np.array([2.0, 0.0]))


def constrained_problem():
    # one ball-like quadratic constraint and one linear-ish one
    return make_quadratic_problem(
        np.eye(2), np.array([-1.0, 0.0]), radius=5.0,
        constraint_A=[np.eye(2), np.zeros((2, 2))],
        constraint_b=[np.zeros(2), np.array([1.0, 1.0])],
        constraint_c=[0.5, 1.0],
    )


class TestFeasibilityGap:
    def test_feasible_point(self):
        prob = constrained_problem()
        assert feasibility_gap(prob, np.zeros(2)) == 0.0

    def test_single_violation_norm(self):
        # psi = (3, -4) -> gap 3, by construction of the evaluation point
        prob = make_quadratic_problem(
            np.eye(2), np.zeros(2), radius=10.0,
            constraint_A=[np.zeros((2, 2)), np.zeros((2, 2))],
            constraint_b=[np.array([1.0, 0.0]), np.array([0.0, 1.0])],
            constraint_c=[0.0, 5.0],
        )
        x = np.array([3.0, 1.0])
        np.testing.assert_allclose(prob.psi(x), [3.0, -4.0])
        assert feasibility_gap(prob, x) == pytest.approx(3.0)

    def test_zero_gap_iff_componentwise_feasible(self, rng):
        prob = constrained_problem()
        for _ in range(100):
            x = prob.domain.project(rng.standard_normal(2) * 3)
            gap = feasibility_gap(prob, x)
            feasible = bool(np.all(prob.psi(x) <= 1e-15))
            assert (gap == 0.0) == feasible


class TestLagrangian:
    def test_zero_multiplier(self, rng):
        prob = constrained_problem()
        x = rng.standard_normal(2)
        s = -np.abs(rng.standard_normal(2))
        p = PrimalDualPoint(x=x, s=s, y=np.zeros(2))
        expected = 0.5 * float(x @ x) - x[0]
        assert lagrangian(prob, p) == pytest.approx(expected, rel=1e-12)

    def test_slack_equal_psi_cancels(self, rng):
        prob = constrained_problem()
        x = rng.standard_normal(2) * 0.1
        p = PrimalDualPoint(x=x, s=prob.psi(x), y=np.abs(rng.standard_normal(2)))
        assert lagrangian(prob, p) == pytest.approx(0.5 * float(x @ x) - x[0], rel=1e-10)

    def test_slack_form_upper_bounds_classical(self, rng):
        # L(x, s, y) >= L(x, 0, y) whenever s <= 0, y >= 0
        prob = constrained_problem()
        for _ in range(200):
            x = prob.domain.project(rng.standard_normal(2) * 2)
            s = -np.abs(rng.standard_normal(2))
            y = np.abs(rng.standard_normal(2))
            with_slack = lagrangian(prob, PrimalDualPoint(x=x, s=s, y=y))
            classical = lagrangian(prob, PrimalDualPoint(x=x, s=np.zeros(2), y=y))
            assert with_slack >= classical - 1e-12

    def test_difference_is_inner_product(self, rng):
        prob = constrained_problem()
        for _ in range(100):
            x = rng.standard_normal(2)
            s = -np.abs(rng.standard_normal(2))
            y = np.abs(rng.standard_normal(2))
            diff = lagrangian(prob, PrimalDualPoint(x=x, s=np.zeros(2), y=y)) - lagrangian(
                prob, PrimalDualPoint(x=x, s=s, y=y)
            )
            assert diff == pytest.approx(float(y @ s), abs=1e-10)
            assert diff <= 1e-12


class TestOptimalityGap:
    def test_self_gap(self):
        prob = identity_problem(0.0)
        x = np.array([0.3, -0.4])
        ref = eval_objective(prob, x)
        assert optimality_gap(prob, x, ref) == pytest.approx(0.0, abs=1e-14)

    def test_arithmetic(self):
        prob = identity_problem(0.0)
        x = np.array([3.0, 1.0])  # psi0 = 5
        assert optimality_gap(prob, x, 3.0) == pytest.approx(2.0, rel=1e-12)


class TestStochasticOracle:
    def test_sigma_zero_is_deterministic(self):
        prob = identity_problem(0.0)
        rng = np.random.default_rng(5)
        x = np.array([0.5, -0.2])
        samples = [prob.stochastic_grad(x, rng) for _ in range(10)]
        for s in samples[1:]:
            np.testing.assert_array_equal(s, samples[0])
        np.testing.assert_array_equal(samples[0], prob.objective_grad(x))

    def test_point_validation(self):
        p = PrimalDualPoint(x=np.zeros(1), s=np.array([-1.0]), y=np.array([2.0]))
        p.validate()
        bad = PrimalDualPoint(x=np.zeros(1), s=np.array([0.1]), y=np.array([2.0]))
        with pytest.raises(ValueError):
            bad.validate()
