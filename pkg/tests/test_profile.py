import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebmotion.chebyshev import eval_series, from_monomial
from chebmotion.errors import DimensionError, DomainError, InvalidTaskError
from chebmotion.profile import (
    MotionTask,
    eliminate_constraints,
    kinematics,
    reference_profile,
    sample_times,
    scale_factors,
    trapezoid13_state,
)

from conftest import DURATION, THETA_B, make_task

POLY5 = [0.0, 1.171875, 0.0, -0.1953125, 0.0, 0.0234375]


class TestMotionTask:
    def test_dof(self):
        assert make_task(9).dof == 4
        assert make_task(9, jerk_zero=True).dof == 2

    def test_rejects_backwards_time(self):
        with pytest.raises(InvalidTaskError):
            MotionTask(0, 1, 1.0, 0.5)

    def test_rejects_zero_stroke(self):
        with pytest.raises(InvalidTaskError):
            MotionTask(1, 1, 0, 1)

    @pytest.mark.parametrize("degree,jz", [(4, False), (6, True)])
    def test_rejects_low_degree(self, degree, jz):
        with pytest.raises(InvalidTaskError):
            MotionTask(0, 1, 0, 1, jz, degree)

    def test_rejects_nan(self):
        with pytest.raises(InvalidTaskError):
            MotionTask(0, math.nan, 0, 1)

    def test_minimal_degrees_allowed(self):
        assert MotionTask(0, 1, 0, 1, False, 5).dof == 0
        assert MotionTask(0, 1, 0, 1, True, 7).dof == 0


class TestScaleFactors:
    def test_values(self):
        s = scale_factors(MotionTask(1.0, 3.0, 2.0, 2.5))
        assert (s.a, s.b, s.c, s.d, s.e) == (0.25, 2.25, 1.0, -2.0, 1.0)

    def test_c_times_e(self):
        s = scale_factors(make_task())
        assert s.c * s.e == pytest.approx(1.0, rel=1e-15)

    def test_endpoints_map_to_unit_interval(self):
        task = MotionTask(0.3, -1.7, 0.1, 0.4)
        s = scale_factors(task)
        assert s.phi_from_theta(task.theta_A) == pytest.approx(-1.0, abs=1e-15)
        assert s.phi_from_theta(task.theta_B) == pytest.approx(1.0, abs=1e-15)
        assert s.x_from_t(task.t_A) == pytest.approx(-1.0, abs=1e-15)
        assert s.t_from_x(1.0) == pytest.approx(task.t_B, abs=1e-15)


class TestEliminateConstraints:
    def test_quintic_reference(self):
        p = eliminate_constraints([], make_task(5))
        np.testing.assert_allclose(p.coeffs, POLY5, atol=1e-12)
        np.testing.assert_allclose(p.coeffs, from_monomial([0, 15 / 8, 0, -10 / 8, 0, 3 / 8]).coeffs,
                                   atol=1e-15)

    def test_dimension_check(self):
        with pytest.raises(DimensionError):
            eliminate_constraints([0.1, 0.2], make_task(9))

    def test_free_coefficients_kept(self):
        o = [0.1, -0.2, 0.05, 0.3]
        p = eliminate_constraints(o, make_task(9))
        np.testing.assert_array_equal(p.coeffs[6:], o)
        np.testing.assert_array_equal(p.free_coeffs, o)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(7, 13), st.booleans(), st.data())
    def test_boundary_residuals(self, n, jz, data):
        if jz and n < 9:
            n = 9
        task = make_task(n, jz)
        o = data.draw(st.lists(st.floats(-4 / math.pi, 4 / math.pi), min_size=task.dof,
                               max_size=task.dof))
        res = eliminate_constraints(o, task).boundary_residuals()
        assert res.size == (8 if jz else 6)
        assert np.max(np.abs(res)) < 1e-9

    def test_jerk_free_has_nonzero_end_jerk(self):
        p = eliminate_constraints([], make_task(5))
        assert abs(eval_series(p.dddphi, 1.0)) > 1.0

    def test_poly7_jerk_zero(self):
        p = reference_profile("poly7J0", make_task())
        assert abs(eval_series(p.dddphi, 1.0)) < 1e-12
        x = np.linspace(-1, 1, 9)
        closed = (35 * x - 35 * x ** 3 + 21 * x ** 5 - 5 * x ** 7) / 16
        np.testing.assert_allclose(eval_series(p.phi, x), closed, atol=1e-14)


class TestTrapezoid:
    def test_continuity_at_breakpoints(self):
        for b in (-1 / 3, 1 / 3):
            lo = trapezoid13_state(b - 1e-12)
            hi = trapezoid13_state(b + 1e-12)
            assert lo[0] == pytest.approx(hi[0], abs=1e-10)
            assert lo[1] == pytest.approx(hi[1], abs=1e-10)

    def test_endpoints(self):
        phi, dphi, _ = trapezoid13_state(np.array([-1.0, 1.0]))
        np.testing.assert_allclose(phi, [-1, 1])
        np.testing.assert_allclose(dphi, [0, 0])

    def test_domain(self):
        with pytest.raises(DomainError):
            trapezoid13_state(1.5)

    def test_unknown_reference(self):
        with pytest.raises(ValueError):
            reference_profile("scurve", make_task())


class TestKinematics:
    def test_physical_endpoints(self):
        p = eliminate_constraints([0.1, 0.0, -0.05, 0.02], make_task())
        theta, vel, acc, _ = kinematics(p, np.array([-1.0, 1.0]))
        np.testing.assert_allclose(theta, [0.0, THETA_B], atol=1e-12)
        np.testing.assert_allclose(vel, 0, atol=1e-9)
        np.testing.assert_allclose(acc, 0, atol=1e-6)

    def test_velocity_matches_time_derivative(self):
        p = eliminate_constraints([0.1, 0.0, -0.05, 0.02], make_task())
        s = p.scale
        t = np.linspace(0.01, DURATION - 0.01, 7)
        h = 1e-7
        theta_p = kinematics(p, s.x_from_t(t + h))[0]
        theta_m = kinematics(p, s.x_from_t(t - h))[0]
        vel = kinematics(p, s.x_from_t(t))[1]
        np.testing.assert_allclose((theta_p - theta_m) / (2 * h), vel, rtol=1e-6)


class TestSampleTimes:
    def test_dividing_period(self):
        t = sample_times(make_task(), 0.00025)
        assert t.size == 295
        assert t[0] == 0.0 and t[-1] == DURATION

    def test_non_dividing_period(self):
        t = sample_times(make_task(), 0.01)
        assert t.size == 9
        assert t[-1] == DURATION and t[-2] == pytest.approx(0.07)

    def test_non_positive(self):
        with pytest.raises(ValueError):
            sample_times(make_task(), 0.0)
