"""Synthetic mechanisms with closed-form properties, and brute-force /
closed-form optimisation oracles used to check the solvers.
"""
from dataclasses import dataclass, field
import math
import time

import numpy as np

from .errors import OracleRefusal
from .identification import MeasurementLog
from .optimize import make_result
from .plant import PropertySamples
from .profile import kinematics, reference_profile, sample_times

__all__ = [
    "SyntheticMechanism",
    "SLIDER_CRANK_DEFAULTS",
    "slider_kinematics",
    "analytic_inertia",
    "analytic_dinertia",
    "analytic_load_torque",
    "synthetic_properties",
    "synthetic_measurement",
    "quadratic_oracle",
    "grid_oracle",
]

SLIDER_CRANK_DEFAULTS = {
    "J_crank": 0.002,
    "m_slider": 1.0,
    "r": 0.05,
    "l": 0.2,
    "F_load": 20.0,
}


@dataclass(frozen=True)
class SyntheticMechanism:
    """``kind="constant"`` with ``params={"J0": ...}`` or ``kind="slider_crank"``
    with ``J_crank, m_slider, r, l, F_load`` (missing keys take the defaults).
    """

    kind: str = "slider_crank"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "constant":
            p = {"J0": 0.01, **self.params}
            if set(p) != {"J0"}:
                raise ValueError(f"unknown parameters {sorted(set(p) - {'J0'})}")
            if not p["J0"] > 0:
                raise ValueError("J0 must be positive")
        elif self.kind == "slider_crank":
            p = {**SLIDER_CRANK_DEFAULTS, **self.params}
            extra = set(p) - set(SLIDER_CRANK_DEFAULTS)
            if extra:
                raise ValueError(f"unknown parameters {sorted(extra)}")
            if not p["l"] > p["r"] > 0:
                raise ValueError("slider-crank geometry needs l > r > 0")
            if not (p["J_crank"] > 0 and p["m_slider"] > 0):
                raise ValueError("masses and inertias must be positive")
        else:
            raise ValueError(f"unknown mechanism kind {self.kind!r}")
        object.__setattr__(self, "params", {k: float(v) for k, v in p.items()})


def slider_kinematics(theta, r, l):
    """Slider position and its first two angle derivatives.

    ``x = r cos(t) + sqrt(l^2 - r^2 sin(t)^2)``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    s, c = np.sin(theta), np.cos(theta)
    root = np.sqrt(l * l - r * r * s * s)
    x = r * c + root
    dx = -r * s - r * r * s * c / root
    ddx = -r * c - r * r * (c * c - s * s) / root - r ** 4 * s * s * c * c / root ** 3
    return x, dx, ddx


def analytic_inertia(mech, theta):
    theta = np.asarray(theta, dtype=np.float64)
    p = mech.params
    if mech.kind == "constant":
        return np.full_like(theta, p["J0"])
    _, dx, _ = slider_kinematics(theta, p["r"], p["l"])
    return p["J_crank"] + p["m_slider"] * dx * dx


def analytic_dinertia(mech, theta):
    """Closed-form dJ/dtheta = 2 m x' x''."""
    theta = np.asarray(theta, dtype=np.float64)
    p = mech.params
    if mech.kind == "constant":
        return np.zeros_like(theta)
    _, dx, ddx = slider_kinematics(theta, p["r"], p["l"])
    return 2.0 * p["m_slider"] * dx * ddx


def analytic_load_torque(mech, theta):
    theta = np.asarray(theta, dtype=np.float64)
    p = mech.params
    if mech.kind == "constant":
        return np.zeros_like(theta)
    _, dx, _ = slider_kinematics(theta, p["r"], p["l"])
    return -p["F_load"] * dx


def synthetic_properties(mech, theta_range, n_s):
    """Sample ``mech`` on ``n_s`` equispaced angles covering ``theta_range``."""
    if n_s < 4:
        raise ValueError("n_s must be at least 4")
    lo, hi = sorted(theta_range)
    theta = np.linspace(lo, hi, int(n_s))
    return PropertySamples(theta, analytic_inertia(mech, theta), analytic_load_torque(mech, theta))


def synthetic_measurement(mech, task, mu_v, sample_period=1e-4, profile=None,
                          torque_noise=0.0, position_noise=0.0, seed=0):
    """Forward-simulate a drive trace of ``mech`` following ``profile``.

    The torque uses the closed-form mechanism properties plus viscous
    friction ``mu_v``. ``profile`` defaults to the quintic reference law of
    ``task``. Noise is Gaussian: ``torque_noise`` is relative to the
    instantaneous torque, ``position_noise`` relative to the stroke.
    Samples follow :func:`~chebmotion.profile.sample_times`.
    """
    if profile is None:
        profile = reference_profile("poly5", task)
    t = sample_times(task, sample_period)
    x = np.clip(profile.scale.x_from_t(t), -1.0, 1.0)
    theta, vel, acc, _ = kinematics(profile, x)
    tau = (analytic_load_torque(mech, theta) + analytic_inertia(mech, theta) * acc
           + 0.5 * analytic_dinertia(mech, theta) * vel ** 2 + mu_v * vel)
    rng = np.random.default_rng(seed)
    if torque_noise:
        tau = tau * (1.0 + torque_noise * rng.standard_normal(tau.size))
    if position_noise:
        theta = theta + position_noise * abs(task.stroke) * rng.standard_normal(theta.size)
    return MeasurementLog(t, theta, tau)


def quadratic_oracle(ctx):
    """Global optimum for a constant-inertia, load-free, friction-free plant.

    There the torque is affine in the free coefficients, so ``tau_rms^2`` is
    a convex quadratic; its minimiser is found from the normal equations
    built from the torque at the quadrature nodes.

    Raises
    ------
    OracleRefusal
        If the context has position-dependent properties or friction.
    """
    started = time.perf_counter()
    if not ctx.model.is_constant() or ctx.friction.mu_v != 0.0:
        raise OracleRefusal("quadratic oracle needs constant inertia, zero load and zero friction")
    n = ctx.dof
    tau0 = ctx.torque(np.zeros(n))
    if n == 0:
        return make_result(ctx, [], "quadratic_oracle", 0, 1, started, True)
    # small probes keep phi near [-1, 1], where the fitted series is meaningful
    h = 1e-6
    G = np.column_stack([(ctx.torque(h * np.eye(n)[k]) - tau0) / h for k in range(n)])
    sw = np.sqrt(ctx.weights)
    o, *_ = np.linalg.lstsq(sw[:, None] * G, -sw * tau0, rcond=None)
    return make_result(ctx, o, "quadratic_oracle", 1, n + 1, started, True)


def grid_oracle(ctx, grid_points=101, half_width=4.0 / math.pi):
    """Exhaustive search over ``[-half_width, half_width]^dof`` (dof <= 2).

    ``grid_points`` per axis; a single point means the grid ``{0}``.
    """
    started = time.perf_counter()
    n = ctx.dof
    if n > 2:
        raise OracleRefusal(f"grid oracle supports at most 2 free coefficients, got {n}")
    if n == 0:
        return make_result(ctx, [], "grid_oracle", 0, 1, started, True)
    axis = np.zeros(1) if grid_points == 1 else np.linspace(-half_width, half_width, int(grid_points))
    if n == 1:
        pts = axis[:, None]
    else:
        a, b = np.meshgrid(axis, axis, indexing="ij")
        pts = np.column_stack([a.ravel(), b.ravel()])
    best_val, best = math.inf, None
    for start in range(0, len(pts), 4096):
        chunk = pts[start:start + 4096]
        vals = ctx.rms_batch(chunk)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best = vals[k], chunk[k]
    return make_result(ctx, best, "grid_oracle", 1, len(pts), started, True)
