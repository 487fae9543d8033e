"""Position-dependent mechanism model, torque equations and energy terms.

Mechanical side::

    tau_m = tau_l(theta) + J(theta) theta'' + 1/2 dJ/dtheta theta'^2 + mu_v theta'

Electrical side (equivalent DC machine, inductive drop neglected)::

    P_e = R / k_t^2 * tau_m^2 + p k_v / k_t * tau_m * theta'
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from numpy.polynomial import chebyshev as npcheb
from numpy.polynomial import legendre

from . import kernels
from .chebyshev import ChebyshevSeries, derivative_series, eval_series
from .errors import FitError, RangeError
from .profile import scale_factors

__all__ = [
    "PropertySamples",
    "PropertyModel",
    "MotorParams",
    "FrictionModel",
    "EnergyBreakdown",
    "fit_property_model",
    "motor_torque_rescaled",
    "motor_torque_physical",
    "electrical_power",
    "energy_decomposition",
    "gauss_legendre",
    "DEFAULT_FIT_DEGREE",
    "DEFAULT_QUADRATURE_NODES",
]

DEFAULT_FIT_DEGREE = 20
DEFAULT_QUADRATURE_NODES = 201
_FIT_MARGIN = 0.05
_RANGE_TOL = 1e-9
_CHOP = 1e-14


@lru_cache(maxsize=32)
def _gauss_legendre(n):
    x, w = legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(n):
    """Gauss-Legendre nodes and weights on [-1, 1] (read-only arrays)."""
    return _gauss_legendre(int(n))


@dataclass(frozen=True, eq=False)
class PropertySamples:
    """Inertia and load torque sampled on a strictly increasing angle grid."""

    theta: np.ndarray
    J: np.ndarray
    tau_l: np.ndarray

    def __post_init__(self):
        arrays = []
        for name in ("theta", "J", "tau_l"):
            a = np.array(getattr(self, name), dtype=np.float64).ravel()
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite values")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrays.append(a)
        if not (arrays[0].size == arrays[1].size == arrays[2].size):
            raise ValueError("theta, J and tau_l must have equal length")
        if arrays[0].size < 4:
            raise ValueError(f"need at least 4 samples, got {arrays[0].size}")
        if np.any(np.diff(self.theta) <= 0):
            raise ValueError("theta grid must be strictly increasing")
        if np.any(self.J <= 0):
            raise ValueError("inertia samples must be positive")

    @property
    def n_s(self):
        return self.theta.size

    def __eq__(self, other):
        if not isinstance(other, PropertySamples):
            return NotImplemented
        return (np.array_equal(self.theta, other.theta) and np.array_equal(self.J, other.J)
                and np.array_equal(self.tau_l, other.tau_l))


@dataclass(frozen=True)
class MotorParams:
    """Datasheet parameters. ``L`` is kept for reference only."""

    R: float
    k_t: float
    k_v: float
    p: int = 1
    J_m: float = 0.0
    L: float = 0.0

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("R must be positive")
        if not self.k_t > 0:
            raise ValueError("k_t must be positive")
        if int(self.p) != self.p or self.p < 1:
            raise ValueError("pole pairs must be an integer >= 1")
        if self.J_m < 0:
            raise ValueError("J_m must be non-negative")


@dataclass(frozen=True)
class FrictionModel:
    mu_v: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.mu_v) and self.mu_v >= 0):
            raise ValueError("mu_v must be finite and non-negative")


@dataclass(frozen=True, eq=False)
class PropertyModel:
    """Chebyshev fits of inertia and load torque over rescaled position.

    ``J_m`` (motor rotor inertia) is added to the fitted load inertia.
    ``phi_margin`` is how far beyond [-1, 1] the fitting data extended.
    """

    J_fit: ChebyshevSeries
    tau_l_fit: ChebyshevSeries
    dJ_dphi: ChebyshevSeries
    scale: object
    J_m: float = 0.0
    fit_degree: int = DEFAULT_FIT_DEGREE
    J_residual: float = 0.0
    tau_l_residual: float = 0.0
    phi_margin: float = 0.0

    def inertia(self, phi):
        """Total inertia ``J_fit(phi) + J_m`` [kg m^2]."""
        return _eval(self.J_fit, phi) + self.J_m

    def dinertia_dphi(self, phi):
        return _eval(self.dJ_dphi, phi)

    def load_torque(self, phi):
        return _eval(self.tau_l_fit, phi)

    def phi_of_theta(self, theta):
        """Rescale angles to phi, rejecting those outside the fitted range."""
        phi = self.scale.c * np.asarray(theta, dtype=np.float64) + self.scale.d
        if np.any(np.abs(phi) > 1.0 + self.phi_margin + _RANGE_TOL):
            raise RangeError("angle outside the range covered by the property model")
        return phi

    def inertia_theta(self, theta):
        return self.inertia(self.phi_of_theta(theta))

    def dinertia_dtheta(self, theta):
        # dJ/dphi = e * dJ/dtheta
        return self.dinertia_dphi(self.phi_of_theta(theta)) / self.scale.e

    def load_torque_theta(self, theta):
        return self.load_torque(self.phi_of_theta(theta))

    def kernel_args(self):
        return self.J_fit.coeffs, self.dJ_dphi.coeffs, self.tau_l_fit.coeffs

    def is_constant(self, rtol=1e-12):
        """True for a constant-inertia, zero-load model."""
        j = self.J_fit.coeffs
        jref = abs(j[0]) + self.J_m
        return (np.all(np.abs(j[1:]) <= rtol * jref)
                and np.all(np.abs(self.tau_l_fit.coeffs) <= rtol * max(jref, 1.0)))


def _eval(series, phi):
    phi = np.asarray(phi, dtype=np.float64)
    out = kernels.clenshaw(series.coeffs, phi.ravel()).reshape(phi.shape)
    return float(out) if out.ndim == 0 else out


def _cheb_lstsq(phi, values, degree):
    V = npcheb.chebvander(phi, degree)
    coef, _, rank, _ = np.linalg.lstsq(V, values, rcond=None)
    if rank < degree + 1:
        raise FitError(f"rank-deficient property fit (rank {rank} < {degree + 1})")
    # drop rounding-level coefficients so constant data gives an exactly constant fit
    coef[np.abs(coef) <= _CHOP * np.sum(np.abs(coef))] = 0.0
    return coef, V @ coef


def fit_property_model(samples, task, fit_degree=DEFAULT_FIT_DEGREE, motor_inertia=0.0):
    """Least-squares Chebyshev fit of the samples over rescaled position.

    Samples within 5 % beyond the task's stroke (in phi) and the nearest
    sample outside it on each side are used.

    Raises
    ------
    RangeError
        If the samples do not cover the task's position range.
    FitError
        If too few samples are available or the fit is rank deficient.
    """
    s = scale_factors(task)
    lo, hi = sorted((task.theta_A, task.theta_B))
    tol = 1e-9 * (hi - lo)
    theta = samples.theta
    if theta[0] > lo + tol or theta[-1] < hi - tol:
        raise RangeError(
            f"samples cover [{theta[0]:.6g}, {theta[-1]:.6g}] rad but the task needs "
            f"[{lo:.6g}, {hi:.6g}] rad")
    phi = s.c * theta + s.d
    keep = np.abs(phi) <= 1.0 + _FIT_MARGIN
    inside = np.flatnonzero(keep)
    # nearest bracketing samples
    first, last = inside[0] if inside.size else 0, inside[-1] if inside.size else -1
    if first > 0:
        keep[first - 1] = True
    if 0 <= last < theta.size - 1:
        keep[last + 1] = True
    idx = np.flatnonzero(keep)
    if fit_degree < 0 or idx.size <= fit_degree:
        raise FitError(f"fit_degree {fit_degree} needs more than {fit_degree} samples "
                       f"in range, have {idx.size}")
    phi_used = phi[idx]
    j_coef, j_hat = _cheb_lstsq(phi_used, samples.J[idx], fit_degree)
    t_coef, t_hat = _cheb_lstsq(phi_used, samples.tau_l[idx], fit_degree)
    J_fit = ChebyshevSeries(j_coef)
    j_res = float(np.max(np.abs(j_hat - samples.J[idx])) / np.max(np.abs(samples.J[idx])))
    tl_scale = np.max(np.abs(samples.tau_l[idx]))
    tl_err = float(np.max(np.abs(t_hat - samples.tau_l[idx])))
    tl_res = tl_err / tl_scale if tl_scale > 0 else tl_err
    check = np.linspace(-1.0, 1.0, 1001)
    if np.any(eval_series(J_fit, check) + motor_inertia <= 0):
        raise FitError("fitted inertia is not positive over the stroke; lower fit_degree")
    margin = max(0.0, float(np.max(np.abs(phi_used))) - 1.0)
    return PropertyModel(
        J_fit=J_fit,
        tau_l_fit=ChebyshevSeries(t_coef),
        dJ_dphi=derivative_series(J_fit),
        scale=s,
        J_m=float(motor_inertia),
        fit_degree=int(fit_degree),
        J_residual=j_res,
        tau_l_residual=tl_res,
        phi_margin=margin,
    )


def _check_compatible(profile, model):
    ps, ms = profile.scale, model.scale
    if not np.allclose([ps.a, ps.b, ps.c, ps.d], [ms.a, ms.b, ms.c, ms.d], rtol=1e-12, atol=0):
        raise ValueError("profile task and property model were built for different motions")


def motor_torque_rescaled(profile, model, friction, x):
    """Motor torque [N m] at rescaled time(s) ``x`` of a Chebyshev profile."""
    _check_compatible(profile, model)
    x = np.asarray(x, dtype=np.float64)
    s = model.scale
    phi = np.atleast_1d(eval_series(profile.phi, x)).ravel()
    dphi = np.atleast_1d(eval_series(profile.dphi, x)).ravel()
    ddphi = np.atleast_1d(eval_series(profile.ddphi, x)).ravel()
    tau = kernels.motor_torque(phi, dphi, ddphi, *model.kernel_args(),
                               1.0 / (s.a * s.c), 1.0 / (s.a * s.a * s.c), 1.0 / s.e,
                               friction.mu_v, model.J_m)
    return float(tau[0]) if x.ndim == 0 else tau.reshape(x.shape)


def motor_torque_physical(theta, theta_dot, theta_ddot, model, friction):
    """Motor torque [N m] from the physical state.

    Raises
    ------
    RangeError
        If ``theta`` lies outside the range covered by ``model``.
    """
    theta_dot = np.asarray(theta_dot, dtype=np.float64)
    theta_ddot = np.asarray(theta_ddot, dtype=np.float64)
    phi = model.phi_of_theta(theta)
    dJ_dtheta = model.dinertia_dphi(phi) / model.scale.e
    tau = (model.load_torque(phi) + model.inertia(phi) * theta_ddot
           + 0.5 * dJ_dtheta * theta_dot ** 2 + friction.mu_v * theta_dot)
    return float(tau) if np.ndim(tau) == 0 else tau


def electrical_power(motor, tau_m, theta_dot):
    """Instantaneous electrical input power [W]; negative when regenerating."""
    return (motor.R / motor.k_t ** 2) * np.square(tau_m) \
        + (motor.p * motor.k_v / motor.k_t) * np.multiply(tau_m, theta_dot)


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energy terms of one move [J] and the RMS torque [N m]."""

    E_k: float
    E_p: float
    E_l: float
    E_total: float
    tau_rms: float


def energy_decomposition(profile, model, motor, friction, nodes=DEFAULT_QUADRATURE_NODES):
    """Split the electrical input energy of a move into kinetic, potential
    and loss terms using Gauss-Legendre quadrature in rescaled time.
    """
    _check_compatible(profile, model)
    s = model.scale
    x, w = gauss_legendre(nodes)
    phi = eval_series(profile.phi, x)
    dphi = eval_series(profile.dphi, x)
    ddphi = eval_series(profile.ddphi, x)
    vel = dphi / (s.a * s.c)
    acc = ddphi / (s.a ** 2 * s.c)
    tau_a = model.inertia(phi) * acc
    tau_v = 0.5 * (model.dinertia_dphi(phi) / s.e) * vel ** 2
    tau_l = model.load_torque(phi)
    tau_f = friction.mu_v * vel
    tau_m = tau_a + tau_v + tau_l + tau_f
    k_emf = motor.p * motor.k_v / motor.k_t
    dt = s.a  # dt = a dx
    E_k = k_emf * dt * float(w @ ((tau_a + tau_v) * vel))
    E_p = k_emf * dt * float(w @ (tau_l * vel))
    E_l = dt * float(w @ ((motor.R / motor.k_t ** 2) * tau_m ** 2 + k_emf * tau_f * vel))
    tau_rms = math.sqrt(0.5 * float(w @ tau_m ** 2))
    return EnergyBreakdown(E_k, E_p, E_l, E_k + E_p + E_l, tau_rms)
