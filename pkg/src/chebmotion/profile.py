"""Rest-to-rest motion tasks and their Chebyshev position profiles.

A task moves from ``theta_A`` at ``t_A`` to ``theta_B`` at ``t_B``. Time and
position are mapped to the unit interval::

    t   = a * x + b
    phi = c * theta + d

so a profile is a Chebyshev series ``phi(x)`` with ``phi(-1) = -1`` and
``phi(1) = 1``. The lowest-index coefficients are fixed by the boundary
conditions; the rest (``free_coeffs``) are the design variables.
"""
from dataclasses import dataclass, field, replace
from functools import lru_cache
import math

import numpy as np

from . import kernels
from .chebyshev import ChebyshevSeries, endpoint_derivative, eval_series
from .errors import DimensionError, DomainError, InvalidTaskError

__all__ = [
    "MotionTask",
    "ScaleFactors",
    "MotionProfile",
    "SampledProfile",
    "scale_factors",
    "eliminate_constraints",
    "reference_profile",
    "trapezoid13_state",
    "kinematics",
    "sample_times",
    "REFERENCE_KINDS",
]

REFERENCE_KINDS = ("poly5", "poly7J0", "trapezoid13")


@dataclass(frozen=True)
class MotionTask:
    """Single-axis point-to-point move (angles in rad, times in s)."""

    theta_A: float
    theta_B: float
    t_A: float
    t_B: float
    jerk_zero: bool = False
    degree: int = 5

    def __post_init__(self):
        for name in ("theta_A", "theta_B", "t_A", "t_B"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidTaskError(f"{name} must be finite")
            object.__setattr__(self, name, float(value))
        if not self.t_B > self.t_A:
            raise InvalidTaskError("t_B must be greater than t_A")
        if self.theta_B == self.theta_A:
            raise InvalidTaskError("theta_B must differ from theta_A")
        if int(self.degree) != self.degree:
            raise InvalidTaskError("degree must be an integer")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "jerk_zero", bool(self.jerk_zero))
        if self.degree < self.min_degree:
            raise InvalidTaskError(
                f"degree {self.degree} too low: need n >= {self.min_degree}"
                f" ({'jerk-zero' if self.jerk_zero else 'jerk-free'})")

    @property
    def n_constraints(self):
        return 8 if self.jerk_zero else 6

    @property
    def min_degree(self):
        return self.n_constraints - 1

    @property
    def dof(self):
        return self.degree + 1 - self.n_constraints

    @property
    def duration(self):
        return self.t_B - self.t_A

    @property
    def stroke(self):
        return self.theta_B - self.theta_A

    @property
    def jerk_mode(self):
        return "J0" if self.jerk_zero else "JF"

    def with_degree(self, degree, jerk_zero=None):
        if jerk_zero is None:
            jerk_zero = self.jerk_zero
        return replace(self, degree=degree, jerk_zero=jerk_zero)


@dataclass(frozen=True)
class ScaleFactors:
    a: float
    b: float
    c: float
    d: float
    e: float

    def phi_from_theta(self, theta):
        return self.c * np.asarray(theta) + self.d

    def theta_from_phi(self, phi):
        return (np.asarray(phi) - self.d) / self.c

    def t_from_x(self, x):
        return self.a * np.asarray(x) + self.b

    def x_from_t(self, t):
        return (np.asarray(t) - self.b) / self.a


def scale_factors(task):
    """Constants of the time (a, b) and position (c, d, e) rescalings."""
    if not task.t_B > task.t_A:
        raise InvalidTaskError("t_B must be greater than t_A")
    if task.theta_B == task.theta_A:
        raise InvalidTaskError("theta_B must differ from theta_A")
    span = task.theta_B - task.theta_A
    return ScaleFactors(
        a=0.5 * (task.t_B - task.t_A),
        b=0.5 * (task.t_B + task.t_A),
        c=2.0 / span,
        d=-(task.theta_B + task.theta_A) / span,
        e=0.5 * span,
    )


@dataclass(frozen=True, eq=False)
class MotionProfile:
    """Constrained Chebyshev profile ``phi(x)`` for ``task``.

    Derivative series (``dphi``, ``ddphi``, ``dddphi``) are precomputed.
    """

    task: MotionTask
    phi: ChebyshevSeries
    free_coeffs: np.ndarray
    dphi: ChebyshevSeries = field(init=False, repr=False)
    ddphi: ChebyshevSeries = field(init=False, repr=False)
    dddphi: ChebyshevSeries = field(init=False, repr=False)

    def __post_init__(self):
        o = np.array(self.free_coeffs, dtype=np.float64).ravel()
        o.setflags(write=False)
        object.__setattr__(self, "free_coeffs", o)
        d1 = self.phi.deriv()
        d2 = d1.deriv()
        object.__setattr__(self, "dphi", d1)
        object.__setattr__(self, "ddphi", d2)
        object.__setattr__(self, "dddphi", d2.deriv())

    @property
    def scale(self):
        return scale_factors(self.task)

    @property
    def coeffs(self):
        return self.phi.coeffs

    def boundary_residuals(self):
        """Residuals of all endpoint conditions (position, velocity,
        acceleration and, for jerk-zero tasks, jerk)."""
        series = [self.phi, self.dphi, self.ddphi, self.dddphi]
        orders = 4 if self.task.jerk_zero else 3
        ends = np.array([-1.0, 1.0])
        values = np.array([kernels.clenshaw(series[k].coeffs, ends) for k in range(orders)])
        values[0] -= ends
        # ordered like the constraint rows: all orders at -1, then at +1
        return values.T.ravel()

    def phi_range(self, points=2001):
        """Min and max of ``phi`` on a cosine-spaced grid over [-1, 1]."""
        x = np.cos(np.linspace(0.0, math.pi, points))
        v = eval_series(self.phi, x)
        return float(v.min()), float(v.max())


@dataclass(frozen=True, eq=False)
class SampledProfile:
    """Rescaled profile stored on a uniform x grid (non-polynomial laws)."""

    kind: str
    task: MotionTask
    x: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    ddphi: np.ndarray
    breakpoints: tuple = (-1.0, 1.0)


@lru_cache(maxsize=64)
def _constraint_system(degree, jerk_zero):
    orders = range(4 if jerk_zero else 3)
    rows = [(end, k) for end in (-1, 1) for k in orders]
    idx = np.arange(degree + 1)
    full = np.array([[endpoint_derivative(i, k, end) for i in idx] for end, k in rows])
    rhs = np.array([float(end) if k == 0 else 0.0 for end, k in rows])
    full.setflags(write=False)
    rhs.setflags(write=False)
    return full, rhs


def constraint_map(task):
    """Affine map from free coefficients ``o`` to the full coefficient vector.

    Returns ``(base, M)`` with ``p = base + M @ o``.
    """
    full, rhs = _constraint_system(task.degree, task.jerk_zero)
    m = task.n_constraints
    dep, free = full[:, :m], full[:, m:]
    base = np.zeros(task.degree + 1)
    base[:m] = np.linalg.solve(dep, rhs)
    M = np.zeros((task.degree + 1, task.dof))
    if task.dof:
        M[:m] = -np.linalg.solve(dep, free)
        M[m:] = np.eye(task.dof)
    return base, M


def eliminate_constraints(free_coeffs, task):
    """Build the profile whose free coefficients are ``free_coeffs``.

    The dependent coefficients ``p_0..p_5`` (``p_0..p_7`` for jerk-zero
    tasks) are solved from the endpoint conditions.

    Raises
    ------
    DimensionError
        If ``len(free_coeffs)`` differs from ``task.dof``.
    """
    o = np.asarray(free_coeffs, dtype=np.float64).ravel()
    if o.size != task.dof:
        raise DimensionError(f"expected {task.dof} free coefficients, got {o.size}")
    full, rhs = _constraint_system(task.degree, task.jerk_zero)
    m = task.n_constraints
    rhs = rhs - full[:, m:] @ o
    p = np.empty(task.degree + 1)
    p[:m] = np.linalg.solve(full[:, :m], rhs)
    p[m:] = o
    return MotionProfile(task, ChebyshevSeries(p), o)


def trapezoid13_state(x):
    """Rescaled position, velocity and acceleration of the 1/3 trapezoid law.

    Accelerates on ``[-1, -1/3]``, cruises at ``phi' = 1.5`` and decelerates
    on ``[1/3, 1]``; acceleration magnitude 2.25.
    """
    x = np.asarray(x, dtype=np.float64)
    if np.any(np.abs(x) > 1.0 + 1e-12):
        raise DomainError("evaluation point outside [-1, 1]")
    acc, vmax, x1 = 2.25, 1.5, 1.0 / 3.0
    u = np.abs(x)
    sign = np.sign(x)
    # odd position / even velocity / odd acceleration about x = 0
    pos_inner = vmax * u
    pos_outer = 1.0 - 0.5 * acc * (1.0 - u) ** 2
    vel_outer = acc * (1.0 - u)
    outer = u > x1
    phi = sign * np.where(outer, pos_outer, pos_inner)
    dphi = np.where(outer, vel_outer, vmax)
    ddphi = np.where(outer, -acc * sign, 0.0)
    return phi, dphi, ddphi


def reference_profile(kind, task, points=4097):
    """Reference laws used for comparison.

    ``poly5`` and ``poly7J0`` are the minimal-degree constrained polynomials
    (a :class:`MotionProfile`); ``trapezoid13`` is returned sampled on
    ``points`` uniform x values.
    """
    if kind == "poly5":
        return eliminate_constraints([], task.with_degree(5, jerk_zero=False))
    if kind == "poly7J0":
        return eliminate_constraints([], task.with_degree(7, jerk_zero=True))
    if kind == "trapezoid13":
        x = np.linspace(-1.0, 1.0, points)
        phi, dphi, ddphi = trapezoid13_state(x)
        return SampledProfile("trapezoid13", task, x, phi, dphi, ddphi,
                              breakpoints=(-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0))
    raise ValueError(f"unknown reference profile {kind!r}; expected one of {REFERENCE_KINDS}")


def kinematics(profile, x):
    """Physical position, velocity, acceleration and jerk at rescaled times ``x``."""
    x = np.asarray(x, dtype=np.float64)
    s = profile.scale
    phi = eval_series(profile.phi, x)
    dphi = eval_series(profile.dphi, x)
    ddphi = eval_series(profile.ddphi, x)
    dddphi = eval_series(profile.dddphi, x)
    theta = (phi - s.d) / s.c
    theta_dot = dphi / (s.a * s.c)
    theta_ddot = ddphi / (s.a ** 2 * s.c)
    jerk = dddphi / (s.a ** 3 * s.c)
    return theta, theta_dot, theta_ddot, jerk


def sample_times(task, period):
    """Times ``t_A, t_A + period, ...`` up to ``t_B``.

    When ``period`` does not divide the duration a final sample at exactly
    ``t_B`` is appended; otherwise the last sample is snapped to ``t_B``.
    """
    if not period > 0:
        raise ValueError("sample period must be positive")
    k_max = int(math.floor(task.duration / period + 1e-9))
    t = task.t_A + period * np.arange(k_max + 1, dtype=np.float64)
    if task.t_B - t[-1] > 1e-9 * period:
        t = np.append(t, task.t_B)
    else:
        t[-1] = task.t_B
    return t
