import math

import numpy as np
import pytest

from chebmotion.errors import DomainError, FitError, RangeError
from chebmotion.harness import (
    SyntheticMechanism,
    analytic_dinertia,
    analytic_inertia,
    analytic_load_torque,
    synthetic_properties,
)
from chebmotion.plant import (
    FrictionModel,
    MotorParams,
    PropertySamples,
    electrical_power,
    energy_decomposition,
    fit_property_model,
    motor_torque_physical,
    motor_torque_rescaled,
)
from chebmotion.profile import eliminate_constraints, kinematics, reference_profile

from conftest import DURATION, THETA_B, make_task, random_profile


class TestPropertySamples:
    def test_too_few(self):
        with pytest.raises(ValueError):
            PropertySamples([0, 1, 2], [1, 1, 1], [0, 0, 0])

    def test_not_increasing(self):
        with pytest.raises(ValueError):
            PropertySamples([0, 2, 1, 3], [1] * 4, [0] * 4)

    def test_non_positive_inertia(self):
        with pytest.raises(ValueError):
            PropertySamples([0, 1, 2, 3], [1, 0, 1, 1], [0] * 4)

    def test_nan(self):
        with pytest.raises(ValueError):
            PropertySamples([0, 1, 2, 3], [1, math.nan, 1, 1], [0] * 4)


class TestMotorParams:
    def test_valid(self):
        assert MotorParams(1.0, 1.0, 0.0).p == 1

    @pytest.mark.parametrize("kwargs", [dict(R=0, k_t=1, k_v=1), dict(R=1, k_t=0, k_v=1),
                                        dict(R=1, k_t=1, k_v=1, p=0), dict(R=1, k_t=1, k_v=1, p=1.5)])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            MotorParams(**kwargs)

    def test_negative_friction(self):
        with pytest.raises(ValueError):
            FrictionModel(-0.1)


class TestFit:
    def test_constant_inertia(self, constant_model):
        phi = np.linspace(-1, 1, 101)
        np.testing.assert_allclose(constant_model.inertia(phi), 0.01, rtol=1e-14)
        assert np.max(np.abs(constant_model.dinertia_dphi(phi))) < 1e-10 * 0.01
        assert constant_model.is_constant()

    def test_slider_degree_30(self, slider, slider_samples):
        model = fit_property_model(slider_samples, make_task(), 30)
        theta = np.linspace(0, THETA_B, 1001)
        J = analytic_inertia(slider, theta)
        assert np.max(np.abs(model.inertia_theta(theta) - J) / J) < 1e-6
        assert model.J_residual < 1e-6

    def test_grid_endpoints_map_to_unit_interval(self, slider_model):
        np.testing.assert_allclose(slider_model.phi_of_theta([0.0, THETA_B]), [-1.0, 1.0], atol=1e-15)

    def test_reproduces_analytic_properties(self, slider, slider_model):
        theta = np.linspace(0, THETA_B, 301)
        np.testing.assert_allclose(slider_model.inertia_theta(theta), analytic_inertia(slider, theta),
                                   rtol=1e-7)
        np.testing.assert_allclose(slider_model.load_torque_theta(theta),
                                   analytic_load_torque(slider, theta), atol=1e-7)
        np.testing.assert_allclose(slider_model.dinertia_dtheta(theta),
                                   analytic_dinertia(slider, theta), atol=1e-6)

    def test_chain_rule_against_sample_differences(self, slider_samples, slider_model):
        inside = np.abs(slider_model.scale.phi_from_theta(slider_samples.theta)) <= 1.0
        th, J = slider_samples.theta[inside], slider_samples.J[inside]
        fd = (J[2:] - J[:-2]) / (th[2:] - th[:-2])
        mid = th[1:-1]
        e = slider_model.scale.e
        np.testing.assert_allclose(slider_model.dinertia_dphi(slider_model.phi_of_theta(mid)),
                                   e * fd, atol=5e-4 * e)

    def test_derivative_is_exact(self, slider_model):
        from chebmotion.chebyshev import derivative_series
        assert slider_model.dJ_dphi == derivative_series(slider_model.J_fit)

    def test_insufficient_coverage(self, slider):
        samples = synthetic_properties(slider, (0.0, 2.0), 50)
        with pytest.raises(RangeError):
            fit_property_model(samples, make_task())

    def test_degree_too_high(self):
        samples = synthetic_properties(SyntheticMechanism("constant"), (0.0, THETA_B), 10)
        with pytest.raises(FitError):
            fit_property_model(samples, make_task(), 20)

    def test_motor_inertia_added(self, constant_model, slider_samples):
        model = fit_property_model(slider_samples, make_task(), 20, motor_inertia=0.003)
        base = fit_property_model(slider_samples, make_task(), 20)
        assert model.inertia(0.2) == pytest.approx(base.inertia(0.2) + 0.003, rel=1e-14)

    def test_outside_range(self, slider_model):
        with pytest.raises(RangeError):
            slider_model.phi_of_theta(THETA_B + 0.5)


class TestTorque:
    def test_endpoints_equal_load(self, slider_model, rng):
        p = random_profile(rng)
        tau = motor_torque_rescaled(p, slider_model, FrictionModel(0.0157), np.array([-1.0, 1.0]))
        np.testing.assert_allclose(tau, slider_model.load_torque(np.array([-1.0, 1.0])), atol=1e-9)

    def test_constant_inertia_reduction(self, constant_model, rng):
        p = random_profile(rng)
        x = np.linspace(-1, 1, 51)
        _, _, acc, _ = kinematics(p, x)
        np.testing.assert_allclose(motor_torque_rescaled(p, constant_model, FrictionModel(), x),
                                   0.01 * acc, rtol=1e-12, atol=1e-12 * np.max(np.abs(acc)) * 0.01)

    def test_domain(self, slider_model, rng):
        with pytest.raises(DomainError):
            motor_torque_rescaled(random_profile(rng), slider_model, FrictionModel(), 1.2)

    def test_scalar_in_scalar_out(self, slider_model, rng):
        assert isinstance(motor_torque_rescaled(random_profile(rng), slider_model, FrictionModel(), 0.1),
                          float)

    def test_rescaled_matches_physical(self, slider_model, rng):
        friction = FrictionModel(0.0157)
        x = np.linspace(-1, 1, 101)
        p = random_profile(rng)
        theta, vel, acc, _ = kinematics(p, x)
        phys = motor_torque_physical(theta, vel, acc, slider_model, friction)
        resc = motor_torque_rescaled(p, slider_model, friction, x)
        np.testing.assert_allclose(resc, phys, rtol=1e-8, atol=1e-8 * np.max(np.abs(phys)))

    def test_static(self, slider_model):
        assert motor_torque_physical(1.0, 0.0, 0.0, slider_model, FrictionModel(0.1)) == \
            pytest.approx(slider_model.load_torque_theta(1.0), rel=1e-15)

    def test_arithmetic(self):
        samples = synthetic_properties(SyntheticMechanism("constant", {"J0": 0.5}), (0, 1), 20)
        model = fit_property_model(samples, make_task().__class__(0, 1, 0, 1), 5)
        assert motor_torque_physical(0.5, 0.0, 2.0, model, FrictionModel()) == pytest.approx(1.0, rel=1e-14)

    def test_variation_term(self, slider, slider_model):
        theta, speed = 1.1, 40.0
        h = 1e-5
        fd = (analytic_inertia(slider, theta + h) - analytic_inertia(slider, theta - h)) / (2 * h)
        static = motor_torque_physical(theta, 0.0, 0.0, slider_model, FrictionModel())
        moving = motor_torque_physical(theta, speed, 0.0, slider_model, FrictionModel())
        assert moving - static == pytest.approx(0.5 * fd * speed ** 2, rel=1e-5)

    def test_physical_out_of_range(self, slider_model):
        with pytest.raises(RangeError):
            motor_torque_physical(-1.0, 0.0, 0.0, slider_model, FrictionModel())

    def test_mismatched_task(self, slider_model):
        other = eliminate_constraints([], make_task(5).__class__(0, 1, 0, 1))
        with pytest.raises(ValueError):
            motor_torque_rescaled(other, slider_model, FrictionModel(), 0.0)


class TestElectricalPower:
    def test_pure_loss(self):
        assert electrical_power(MotorParams(1, 1, 0), 3.0, 5.0) == 9.0

    def test_zero_torque(self):
        assert electrical_power(MotorParams(1, 1, 1), 0.0, 5.0) == 0.0

    def test_regeneration_sign(self):
        assert electrical_power(MotorParams(1, 1, 1, p=1), 2.0, -3.0) == -2.0


class TestEnergy:
    def test_kinetic_vanishes(self, slider_model, motor, rng):
        for _ in range(10):
            e = energy_decomposition(random_profile(rng), slider_model, motor, FrictionModel())
            assert abs(e.E_k) < 1e-6 * e.E_l

    def test_loss_identity(self, slider_model, motor, rng):
        p = random_profile(rng)
        e = energy_decomposition(p, slider_model, motor, FrictionModel())
        ident = motor.R * DURATION / motor.k_t ** 2 * e.tau_rms ** 2
        assert e.E_l == pytest.approx(ident, rel=1e-8)

    def test_potential_path_independent(self, slider_model, motor, rng):
        a = energy_decomposition(random_profile(rng), slider_model, motor, FrictionModel())
        b = energy_decomposition(reference_profile("poly5", make_task()), slider_model, motor,
                                 FrictionModel())
        assert a.E_p == pytest.approx(b.E_p, rel=1e-6)

    def test_total(self, slider_model, motor, rng):
        e = energy_decomposition(random_profile(rng), slider_model, motor, FrictionModel(0.0157))
        assert e.E_total == pytest.approx(e.E_k + e.E_p + e.E_l, rel=1e-14)

    def test_friction_increases_loss(self, slider_model, motor, rng):
        p = random_profile(rng)
        e0 = energy_decomposition(p, slider_model, motor, FrictionModel())
        e1 = energy_decomposition(p, slider_model, motor, FrictionModel(0.0157))
        assert e1.E_l > e0.E_l

    def test_node_doubling(self, slider_model, motor, rng):
        p = random_profile(rng)
        a = energy_decomposition(p, slider_model, motor, FrictionModel(0.0157), nodes=201)
        b = energy_decomposition(p, slider_model, motor, FrictionModel(0.0157), nodes=403)
        for name in ("E_p", "E_l", "E_total"):
            assert getattr(a, name) == pytest.approx(getattr(b, name), rel=1e-8)
