"""Closed forms: frozen reference values, limits, and consistency properties.

The independent checks are finite differences (for derivatives) and the RK4
integrator (exercised in test_ode.py); here every expected number is either
a hand-derived evaluation of the formulas at reference parameters or an
exact structural identity.
"""

import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from forgetting_dynamics import (
    ContinualConfig,
    DivergentError,
    OvershootVariant,
    classify_overshoot,
    eg1_phase1,
    eg1_phase2,
    eg1_phase2_derivative,
    eg2_phase2,
    forgetting_value,
    overshoot_constants,
    phase1_order_params,
    phase2_order_params,
    validate,
)
from forgetting_dynamics import ode

FIG3A = validate(ContinualConfig(n=3000, r=0.8, q=0.3, eta=1.0,
                                 sigma1_sq=0.8, sigma2_sq=0.8))
FIG3B_TEXT = validate(ContinualConfig(n=3000, r=0.8, q=0.7, eta=1.0,
                                      sigma1_sq=1.7, sigma2_sq=1.7, sigma_j=2.0))


def random_stable_config(rng):
    """A random in-domain config with both effective rates inside (0, 2)."""
    n = int(rng.integers(50, 4000))
    r = float(rng.uniform(0.5, 1.0))
    eta = float(rng.uniform(0.05, 1.5))
    cfg = ContinualConfig(
        n=n, r=r, q=float(rng.uniform(-1.0, 1.0)), eta=eta,
        sigma1_sq=float(rng.uniform(0.05, 1.9 / eta)),  # gamma1 = eta r s1 < 1.9
        sigma2_sq=float(rng.uniform(0.05, 1.9 / eta)),
        sigma_b1=float(rng.uniform(0.0, 3.0)),
        sigma_b2=float(rng.uniform(0.0, 3.0)),
        sigma_j=float(rng.uniform(0.0, 3.0)),
        seed=int(rng.integers(0, 2**31)),
    )
    return validate(cfg)


class TestPhase1:
    def test_initial_values(self):
        r1_1, q1 = phase1_order_params(FIG3A, 0.0)
        assert r1_1 == 0.0
        assert q1 == pytest.approx(FIG3A.r * FIG3A.sigma_j**2, abs=1e-15)

    def test_long_time_limits(self):
        r1_1, q1 = phase1_order_params(FIG3A, 200.0)
        assert r1_1 == pytest.approx(0.8, abs=1e-12)
        assert q1 == pytest.approx(0.8, abs=1e-12)

    def test_error_starts_at_reference_value(self):
        # (0.8 / 2) * 0.8 * (1 + 1) = 0.64
        assert eg1_phase1(FIG3A, 0.0) == pytest.approx(0.64, abs=1e-15)

    def test_error_half_life(self):
        t_half = math.log(2.0) / (0.64 * 1.36)
        assert eg1_phase1(FIG3A, t_half) == pytest.approx(0.32, abs=1e-12)

    def test_error_decays_to_zero(self):
        assert eg1_phase1(FIG3A, 100.0) < 1e-20

    def test_error_is_exponential_in_t(self):
        t = np.linspace(0.0, 5.0, 11)
        rate = FIG3A.gamma1 * (2.0 - FIG3A.gamma1)
        expected = 0.64 * np.exp(-rate * t)
        np.testing.assert_allclose(eg1_phase1(FIG3A, t), expected, rtol=1e-14)


class TestPhase2OrderParams:
    def test_initial_vector(self):
        st0 = phase2_order_params(FIG3A, 0.0)
        r, q = FIG3A.r, FIG3A.q
        common = 2 * r - 1
        assert st0.r2_2 == pytest.approx(common * q, abs=1e-15)
        assert st0.q2 == pytest.approx(common + (1 - r), abs=1e-15)
        assert st0.r12_1 == pytest.approx(common, abs=1e-15)
        assert st0.r12_2 == pytest.approx(common * q, abs=1e-15)
        assert st0.q12 == pytest.approx(common, abs=1e-15)
        assert st0.r1_1 == pytest.approx(r, abs=1e-15)
        assert st0.q1 == pytest.approx(r, abs=1e-15)
        assert st0.t2_2 == pytest.approx(r, abs=1e-15)
        assert st0.t12_2 == pytest.approx(common, abs=1e-15)
        assert st0.q_prime == pytest.approx(common * q, abs=1e-15)

    def test_long_time_limits(self):
        st_inf = phase2_order_params(FIG3A, 500.0)
        r, q = FIG3A.r, FIG3A.q
        assert st_inf.r2_2 == pytest.approx(r, abs=1e-12)
        assert st_inf.q2 == pytest.approx(r, abs=1e-12)
        assert st_inf.r1_1 == pytest.approx(r - (2 * r - 1) * (1 - q), abs=1e-12)

    def test_state_remains_finite_and_consistent(self):
        st2 = phase2_order_params(FIG3A, np.linspace(0, 10, 101))
        assert st2.all_finite()
        # eg identities hold for the closed-form state as well.
        np.testing.assert_allclose(
            st2.eg1(FIG3A), eg1_phase2(FIG3A, np.linspace(0, 10, 101)), atol=1e-13
        )
        np.testing.assert_allclose(
            st2.eg2(FIG3A), eg2_phase2(FIG3A, np.linspace(0, 10, 101)), atol=1e-13
        )


class TestErrorCurves:
    def test_eg2_initial_reference_value(self):
        # 0.4 * (0.8 + 0.2 + 0.6 - 0.36) = 0.496
        assert eg2_phase2(FIG3A, 0.0) == pytest.approx(0.496, abs=1e-15)

    def test_eg2_zero_for_identical_tasks(self):
        cfg = validate(ContinualConfig(n=100, r=1.0, q=1.0, sigma1_sq=0.5,
                                       sigma2_sq=0.5, sigma_j=3.0))
        assert eg2_phase2(cfg, 0.0) == 0.0

    def test_eg2_decays_to_zero(self):
        assert eg2_phase2(FIG3A, 200.0) < 1e-30

    def test_constants_at_reference_values(self):
        c = overshoot_constants(FIG3A)
        assert c.c1 == pytest.approx(0.84, abs=1e-15)
        assert c.c2 == pytest.approx(0.93, abs=1e-15)

    def test_eg1_starts_at_zero(self):
        assert abs(eg1_phase2(FIG3A, 0.0)) < 1e-15

    def test_eg1_limit_equals_forgetting_value(self):
        assert eg1_phase2(FIG3A, 400.0) == pytest.approx(forgetting_value(FIG3A), abs=1e-14)
        assert forgetting_value(FIG3A) == pytest.approx(0.336, abs=1e-15)

    def test_errors_nonnegative_on_random_configs(self):
        rng = np.random.default_rng(20240817)
        t = np.linspace(0.0, 30.0, 301)
        for _ in range(50):
            cfg = random_stable_config(rng)
            assert np.all(eg1_phase1(cfg, t) >= 0.0)
            assert np.all(eg1_phase2(cfg, t) >= -1e-12)
            assert np.all(eg2_phase2(cfg, t) >= 0.0)


class TestDerivative:
    def test_initial_slope_is_gamma_c2(self):
        c = overshoot_constants(FIG3A)
        expected = 0.5 * FIG3A.sigma1_sq * FIG3A.gamma2**2 * c.c2
        assert eg1_phase2_derivative(FIG3A, 0.0) == pytest.approx(expected, rel=1e-13)
        assert eg1_phase2_derivative(FIG3A, 0.0) >= 0.0

    def test_vanishes_at_long_times(self):
        assert abs(eg1_phase2_derivative(FIG3A, 200.0)) < 1e-30

    @pytest.mark.parametrize("cfg", [FIG3A, FIG3B_TEXT])
    def test_matches_central_difference(self, cfg):
        h = 1e-5
        for t in (0.5, 1.0, 2.0, 5.0):
            numeric = (eg1_phase2(cfg, t + h) - eg1_phase2(cfg, t - h)) / (2 * h)
            assert eg1_phase2_derivative(cfg, t) == pytest.approx(numeric, abs=1e-6)


class TestForgettingValue:
    def test_zero_when_supports_disjoint(self):
        cfg = validate(ContinualConfig(n=100, r=0.5, q=0.2))
        assert forgetting_value(cfg) == 0.0

    def test_zero_for_identical_teachers(self):
        cfg = validate(ContinualConfig(n=100, r=0.9, q=1.0, sigma_b1=1.3, sigma_b2=1.3))
        assert forgetting_value(cfg) == 0.0

    def test_divergent_config_raises(self):
        cfg = validate(ContinualConfig(n=100, r=1.0, sigma2_sq=2.5), allow_divergent=True)
        with pytest.raises(DivergentError):
            forgetting_value(cfg)

    def test_strictly_decreasing_in_q(self):
        values = [
            forgetting_value(validate(ContinualConfig(n=1000, r=0.8, q=q)))
            for q in np.linspace(0.0, 1.0, 21)
        ]
        assert all(a > b for a, b in zip(values, values[1:]))

    def test_strictly_increasing_in_r(self):
        values = [
            forgetting_value(validate(ContinualConfig(n=1000, r=r, q=0.3)))
            for r in np.linspace(0.5, 1.0, 21)
        ]
        assert all(a < b for a, b in zip(values, values[1:]))


class TestOvershootClassifier:
    def test_reference_occurs(self):
        cfg = validate(ContinualConfig(n=1000, r=0.8, q=0.7, sigma1_sq=1.7,
                                       sigma2_sq=1.7, sigma_j=2.0))
        klass = classify_overshoot(cfg)
        assert klass.gamma == pytest.approx(1.36)
        assert klass.variant is OvershootVariant.OCCURS

    def test_reference_may_not_occur(self):
        assert classify_overshoot(FIG3A).variant is OvershootVariant.MAY_NOT_OCCUR

    def test_diverges(self):
        cfg = validate(ContinualConfig(n=1000, r=1.0, sigma2_sq=2.5), allow_divergent=True)
        assert classify_overshoot(cfg).variant is OvershootVariant.DIVERGES

    def test_critical_rate_sign_split(self):
        # eta r sigma2^2 = 1 exactly; the sign of c2 - 2 c1 decides.
        base = ContinualConfig(n=10, r=0.8, eta=1.0, sigma2_sq=1.25, sigma1_sq=0.5, q=0.5)
        occurs = classify_overshoot(validate(dataclasses.replace(base, sigma_j=3.0)))
        absent = classify_overshoot(validate(dataclasses.replace(base, sigma_j=0.0)))
        assert abs(occurs.gamma - 1.0) <= 1e-12
        assert occurs.c2 - 2 * occurs.c1 > 0
        assert occurs.variant is OvershootVariant.OCCURS
        assert absent.c2 - 2 * absent.c1 < 0
        assert absent.variant is OvershootVariant.DOES_NOT_OCCUR

    def test_occurs_implies_interior_peak(self):
        rng = np.random.default_rng(7)
        checked = 0
        while checked < 25:
            cfg = random_stable_config(rng)
            klass = classify_overshoot(cfg)
            if klass.c1 == 0.0 and klass.c2 == 0.0:
                continue
            t = np.linspace(0.0, 25.0 / cfg.gamma2, 4001)
            peak = float(np.max(eg1_phase2(cfg, t)))
            limit = forgetting_value(cfg)
            if klass.variant is OvershootVariant.OCCURS:
                assert peak > limit + 1e-9
            elif klass.variant is OvershootVariant.DOES_NOT_OCCUR:
                assert peak <= limit + 1e-9
            checked += 1


class TestOdeConsistency:
    """Analytic time derivatives must match the ODE right-hand sides."""

    H = 1e-6
    TOL = 1e-9
    GRID = np.arange(0.0, 10.0 + 1e-12, 0.1)

    @pytest.mark.parametrize("cfg", [FIG3A, FIG3B_TEXT])
    def test_phase1(self, cfg):
        for t in self.GRID:
            r_hi, q_hi = phase1_order_params(cfg, t + self.H)
            r_lo, q_lo = phase1_order_params(cfg, t - self.H)
            numeric = np.array([q_hi - q_lo, r_hi - r_lo]) / (2 * self.H)
            r1, q1 = phase1_order_params(cfg, t)
            analytic = ode.rhs_phase1(np.array([q1, r1]), cfg)
            np.testing.assert_allclose(numeric, analytic, atol=self.TOL)

    @pytest.mark.parametrize("cfg", [FIG3A, FIG3B_TEXT])
    def test_phase2(self, cfg):
        def vector(t):
            s = phase2_order_params(cfg, t)
            return np.array([s.q2, s.r2_2, s.r12_1, s.r12_2, s.q12, s.r1_1, s.q1])

        for t in self.GRID:
            numeric = (vector(t + self.H) - vector(t - self.H)) / (2 * self.H)
            analytic = ode.rhs_phase2(vector(t), cfg)
            np.testing.assert_allclose(numeric, analytic, atol=self.TOL)


@given(
    n=st.integers(min_value=10, max_value=5000),
    r=st.floats(min_value=0.5, max_value=1.0),
    q=st.floats(min_value=-1.0, max_value=1.0),
    eta=st.floats(min_value=0.05, max_value=1.5),
    s2=st.floats(min_value=0.05, max_value=1.2),
    sb1=st.floats(min_value=0.0, max_value=3.0),
    sb2=st.floats(min_value=0.0, max_value=3.0),
    sj=st.floats(min_value=0.0, max_value=3.0),
)
@settings(max_examples=200, deadline=None)
def test_forgetting_curve_starts_at_zero(n, r, q, eta, s2, sb1, sb2, sj):
    cfg = validate(ContinualConfig(n=n, r=r, q=q, eta=eta, sigma1_sq=0.5,
                                   sigma2_sq=s2, sigma_b1=sb1, sigma_b2=sb2,
                                   sigma_j=sj))
    assert abs(eg1_phase2(cfg, 0.0)) < 1e-12
