"""Viscous-friction identification from a measured position/torque trace.

The measured position is smoothed by a least-squares polynomial in time,
differentiated analytically, and fed through the friction-free torque
model. Since the friction torque is linear in ``mu_v``, the best ``mu_v``
is a one-dimensional least-squares solution::

    mu_v = sum(r * s) / sum(s * s),   r = tau_measured - tau_model(mu_v=0),
                                      s = theta_dot
"""
from dataclasses import dataclass
import numpy as np
from numpy.polynomial import Polynomial

from .errors import FitError, UnidentifiableError
from .plant import FrictionModel, motor_torque_physical

__all__ = [
    "MeasurementLog",
    "PositionFit",
    "FrictionEstimate",
    "fit_position_polynomial",
    "identify_friction",
    "DEFAULT_POSITION_DEGREE",
]

DEFAULT_POSITION_DEGREE = 9
MIN_LOG_SAMPLES = 20
_JITTER_TOL = 1e-9
MIN_RMS_SPEED = 1e-9  # rad/s; below this the friction column is numerically zero


@dataclass(frozen=True, eq=False)
class MeasurementLog:
    """Uniformly sampled drive trace: time [s], position [rad], torque [N m]."""

    time: np.ndarray
    position: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        arrays = []
        for name in ("time", "position", "torque"):
            a = np.array(getattr(self, name), dtype=np.float64).ravel()
            if not np.all(np.isfinite(a)):
                raise ValueError(f"{name} contains non-finite values")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
            arrays.append(a)
        t = arrays[0]
        if not all(a.size == t.size for a in arrays):
            raise ValueError("time, position and torque must have equal lengths")
        if t.size < MIN_LOG_SAMPLES:
            raise ValueError(f"a log needs at least {MIN_LOG_SAMPLES} samples, got {t.size}")
        dt = np.diff(t)
        if not np.all(dt > 0):
            raise ValueError("time must be strictly increasing")
        step = (t[-1] - t[0]) / (t.size - 1)
        if np.max(np.abs(dt - step)) > _JITTER_TOL:
            raise ValueError("time must be uniformly sampled (jitter above 1e-9 s)")

    def __len__(self):
        return self.time.size

    @property
    def sample_period(self):
        return (self.time[-1] - self.time[0]) / (self.time.size - 1)

    def __eq__(self, other):
        if not isinstance(other, MeasurementLog):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("time", "position", "torque"))


@dataclass(frozen=True, eq=False)
class PositionFit:
    """Least-squares position polynomial ``theta_p(t)``.

    ``poly`` works on an internally rescaled time axis; ``coefficients``
    are the equivalent monomial coefficients ``a_0..a_n`` in seconds.
    """

    poly: Polynomial
    degree: int
    residual_rms: float
    residual_max: float

    @property
    def coefficients(self):
        c = self.poly.convert().coef
        return np.pad(c, (0, self.degree + 1 - c.size))

    def position(self, t):
        return self.poly(t)

    def velocity(self, t):
        return self.poly.deriv(1)(t)

    def acceleration(self, t):
        return self.poly.deriv(2)(t)


def fit_position_polynomial(log, degree=DEFAULT_POSITION_DEGREE):
    """Fit ``theta_p(t)`` of the given degree to the logged position.

    Raises
    ------
    FitError
        If ``degree`` is not below the number of samples, or the
        least-squares problem is rank deficient.
    """
    degree = int(degree)
    if degree < 0:
        raise FitError("degree must be non-negative")
    if degree >= len(log):
        raise FitError(f"degree {degree} needs more than {len(log)} samples")
    poly, (_, rank, _, _) = Polynomial.fit(log.time, log.position, degree, full=True)
    if rank < degree + 1:
        raise FitError(f"position fit is rank deficient (rank {rank} < {degree + 1})")
    resid = log.position - poly(log.time)
    return PositionFit(poly, degree, float(np.sqrt(np.mean(resid ** 2))),
                       float(np.max(np.abs(resid))))


@dataclass(frozen=True, eq=False)
class FrictionEstimate:
    """Identified friction with diagnostics.

    ``mu_v_raw`` is the unconstrained least-squares value; ``friction``
    clips it at zero since a negative damping coefficient is unphysical.
    Residual norms are 2-norms of measured minus model torque [N m].
    """

    friction: FrictionModel
    mu_v_raw: float
    residual_before: float
    residual_after: float
    position_fit: PositionFit

    @property
    def mu_v(self):
        return self.friction.mu_v


def identify_friction(log, model, fit_degree=DEFAULT_POSITION_DEGREE):
    """Estimate the viscous friction coefficient from ``log``.

    ``model`` supplies inertia and load torque; the log must stay inside
    its position range.

    Raises
    ------
    UnidentifiableError
        If the fitted speed is (nearly) zero throughout the log.
    RangeError
        If the logged positions leave the model's range.
    """
    fit = fit_position_polynomial(log, fit_degree)
    t = log.time
    theta, speed, acc = fit.position(t), fit.velocity(t), fit.acceleration(t)
    base = motor_torque_physical(theta, speed, acc, model, FrictionModel(0.0))
    r = log.torque - base
    ss = float(speed @ speed)
    if not ss > t.size * MIN_RMS_SPEED ** 2:
        raise UnidentifiableError("speed is near zero throughout the log; friction cannot be identified")
    mu = float(r @ speed) / ss
    after = r - mu * speed
    return FrictionEstimate(FrictionModel(max(mu, 0.0)), mu, float(np.linalg.norm(r)),
                            float(np.linalg.norm(after)), fit)
