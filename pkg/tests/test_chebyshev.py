import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chebmotion.chebyshev import (
    ChebyshevSeries,
    coefficient_bounds,
    derivative_series,
    endpoint_derivative,
    eval_recurrence,
    eval_series,
    from_monomial,
    project_profile,
)
from chebmotion.errors import DomainError, UnsupportedOrderError

POLY5 = [0.0, 1.171875, 0.0, -0.1953125, 0.0, 0.0234375]

coeff_lists = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=21)


def central_difference(coeffs, x, k, h):
    """5-point central difference of order k; numpy's evaluator allows |x| > 1."""
    f = lambda y: np.polynomial.chebyshev.chebval(y, coeffs)  # noqa: E731
    pts = x + h * np.arange(-2, 3)
    stencils = {
        1: np.array([1, -8, 0, 8, -1]) / (12 * h),
        2: np.array([-1, 16, -30, 16, -1]) / (12 * h * h),
        3: np.array([-1, 2, 0, -2, 1]) / (2 * h ** 3),
    }
    d = stencils[k] @ f(pts)
    if k == 3:
        # the third-derivative stencil is second order: one Richardson step
        half = x + 0.5 * h * np.arange(-2, 3)
        d = (4 * (stencils[3] / 0.125) @ f(half) - d) / 3
    return d


class TestEvaluation:
    def test_t3_at_half(self):
        assert eval_series(ChebyshevSeries([0, 0, 0, 1]), 0.5) == pytest.approx(-1.0, abs=1e-15)

    def test_constant(self):
        assert eval_series(ChebyshevSeries([1.0]), 0.3) == 1.0

    def test_quintic_is_odd(self):
        assert abs(eval_series(ChebyshevSeries(POLY5), 0.0)) < 1e-15

    def test_outside_domain(self):
        with pytest.raises(DomainError):
            eval_series(ChebyshevSeries([1.0, 2.0]), 1.0001)

    def test_vector_input_shape(self):
        x = np.linspace(-1, 1, 12).reshape(3, 4)
        assert eval_series(ChebyshevSeries([1, 2, 3]), x).shape == (3, 4)

    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            ChebyshevSeries([1.0, math.nan])

    def test_clenshaw_matches_recurrence(self, rng):
        for n in range(21):
            s = ChebyshevSeries(rng.uniform(-1, 1, n + 1))
            x = rng.uniform(-1, 1, 1000)
            np.testing.assert_allclose(eval_series(s, x), eval_recurrence(s, x), rtol=0, atol=1e-12)

    def test_stable_at_degree_50(self, rng):
        s = ChebyshevSeries(rng.uniform(-1, 1, 51))
        theta = rng.uniform(0, math.pi, 200)
        trig = np.cos(np.outer(theta, np.arange(51))) @ s.coeffs
        np.testing.assert_allclose(eval_series(s, np.cos(theta)), trig, atol=1e-12)

    @settings(max_examples=60, deadline=None)
    @given(coeff_lists, st.floats(0, 2 * math.pi))
    def test_trigonometric_identity(self, coeffs, theta):
        s = ChebyshevSeries(coeffs)
        direct = sum(c * math.cos(k * theta) for k, c in enumerate(coeffs))
        assert eval_series(s, math.cos(theta)) == pytest.approx(direct, abs=1e-10 * max(1, sum(map(abs, coeffs))))


class TestDerivative:
    def test_t1(self):
        np.testing.assert_array_equal(derivative_series(ChebyshevSeries([0, 1])).coeffs, [1.0])

    def test_t2(self):
        np.testing.assert_array_equal(derivative_series(ChebyshevSeries([0, 0, 1])).coeffs, [0.0, 4.0])

    def test_constant(self):
        assert np.all(derivative_series(ChebyshevSeries([3.0])).coeffs == 0)

    def test_matches_numpy(self, rng):
        c = rng.normal(size=14)
        np.testing.assert_allclose(derivative_series(ChebyshevSeries(c)).coeffs,
                                   np.polynomial.chebyshev.chebder(c), rtol=1e-14, atol=1e-12)

    def test_deriv_order(self):
        s = ChebyshevSeries([0, 0, 0, 1])
        np.testing.assert_allclose(s.deriv(2).coeffs, [0, 24])


class TestEndpointDerivative:
    def test_value_at_one(self):
        assert endpoint_derivative(7, 0, 1) == 1.0

    def test_first_derivative(self):
        assert endpoint_derivative(3, 1, 1) == 9.0

    def test_second_derivative_left(self):
        assert endpoint_derivative(4, 2, -1) == 80.0

    def test_order_too_high(self):
        with pytest.raises(UnsupportedOrderError):
            endpoint_derivative(5, 4, 1)

    def test_sign_rule(self):
        for i in range(12):
            for k in range(4):
                assert endpoint_derivative(i, k, -1) == (-1) ** (i + k) * endpoint_derivative(i, k, 1)

    @pytest.mark.parametrize("end", [-1.0, 1.0])
    def test_against_finite_differences(self, end):
        for i in range(16):
            e = np.zeros(i + 1)
            e[i] = 1.0
            assert endpoint_derivative(i, 0, end) == eval_series(ChebyshevSeries(e), end)
            for k in (1, 2, 3):
                exact = endpoint_derivative(i, k, end)
                approx = central_difference(e, end, k, 0.02 / max(i, 1))
                assert approx == pytest.approx(exact, rel=1e-6, abs=1e-6)


class TestFromMonomial:
    def test_cube(self):
        s = from_monomial([0, 0, 0, 1])
        np.testing.assert_allclose(s.coeffs, [0, 0.75, 0, 0.25], atol=1e-15)
        x = np.linspace(-1, 1, 11)
        np.testing.assert_allclose(eval_series(s, x), x ** 3, atol=1e-12)

    def test_constant(self):
        np.testing.assert_array_equal(from_monomial([5]).coeffs, [5.0])

    def test_identity(self):
        np.testing.assert_array_equal(from_monomial([0, 1]).coeffs, [0.0, 1.0])

    def test_quintic_reference(self):
        # phi(x) = (15 x - 10 x^3 + 3 x^5) / 8 is the rest-to-rest quintic
        s = from_monomial([0, 15 / 8, 0, -10 / 8, 0, 3 / 8])
        np.testing.assert_allclose(s.coeffs, POLY5, atol=1e-15)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.floats(-5, 5, allow_nan=False), min_size=1, max_size=12))
    def test_evaluates_identically(self, a):
        x = np.linspace(-1, 1, 23)
        np.testing.assert_allclose(eval_series(from_monomial(a), x),
                                   np.polynomial.polynomial.polyval(x, a), atol=1e-12 * max(1, sum(map(abs, a))))


class TestBounds:
    def test_degree_zero(self):
        np.testing.assert_array_equal(coefficient_bounds(0), [1.0])

    def test_degree_two(self):
        np.testing.assert_allclose(coefficient_bounds(2), [1.0, 1.27324, 1.27324], atol=5e-6)
        assert coefficient_bounds(2)[1] == 4 / math.pi

    def test_negative_degree(self):
        with pytest.raises(ValueError):
            coefficient_bounds(-1)


class TestProjection:
    def test_t2(self):
        p = project_profile(lambda x: 2 * x ** 2 - 1, 6)
        np.testing.assert_allclose(p.coeffs, [0, 0, 1, 0, 0, 0, 0], atol=1e-10)

    def test_quintic(self):
        p = project_profile(lambda x: (15 * x - 10 * x ** 3 + 3 * x ** 5) / 8, 5)
        np.testing.assert_allclose(p.coeffs, from_monomial([0, 15 / 8, 0, -10 / 8, 0, 3 / 8]).coeffs, atol=1e-10)

    def test_constant_one(self):
        p = project_profile(lambda x: np.ones_like(x), 4)
        np.testing.assert_allclose(p.coeffs, [1, 0, 0, 0, 0], atol=1e-10)

    def test_roundtrip(self, rng):
        for n in (0, 3, 9, 20):
            s = ChebyshevSeries(rng.normal(size=n + 1))
            np.testing.assert_allclose(project_profile(s, n).coeffs, s.coeffs, atol=1e-10)

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=8),
           st.integers(0, 15))
    def test_bounded_functions_respect_bounds(self, freqs, n):
        def f(x):
            return np.sin(sum(w * x ** (k + 1) for k, w in enumerate(freqs)))
        p = project_profile(f, n).coeffs
        b = coefficient_bounds(n)
        assert np.all(np.abs(p) <= b + 1e-10)
