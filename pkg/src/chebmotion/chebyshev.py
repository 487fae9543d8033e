"""Chebyshev series on [-1, 1]: evaluation, differentiation, basis change,
endpoint derivative values, projection and design-space coefficient bounds.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .errors import DomainError, UnsupportedOrderError

__all__ = [
    "ChebyshevSeries",
    "eval_series",
    "eval_recurrence",
    "derivative_series",
    "endpoint_derivative",
    "from_monomial",
    "coefficient_bounds",
    "project_profile",
    "MAX_DERIVATIVE_ORDER",
]

MAX_DERIVATIVE_ORDER = 3
_DOMAIN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class ChebyshevSeries:
    """Coefficients ``p_0..p_n`` of ``sum(p_i * T_i(x))``.

    The coefficient array is copied and made read-only on construction.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64, ndmin=1).ravel()
        if c.size == 0:
            c = np.zeros(1)
        if not np.all(np.isfinite(c)):
            raise ValueError("Chebyshev coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self):
        return self.coeffs.size - 1

    def __call__(self, x):
        return eval_series(self, x)

    def __len__(self):
        return self.coeffs.size

    def __eq__(self, other):
        if not isinstance(other, ChebyshevSeries):
            return NotImplemented
        return np.array_equal(self.coeffs, other.coeffs)

    def __hash__(self):
        return hash(self.coeffs.tobytes())

    def __repr__(self):
        return f"ChebyshevSeries({self.coeffs.tolist()!r})"

    def deriv(self, order=1):
        s = self
        for _ in range(order):
            s = derivative_series(s)
        return s


def _check_domain(x):
    x = np.asarray(x, dtype=np.float64)
    if np.any(~np.isfinite(x)) or np.any(np.abs(x) > 1.0 + _DOMAIN_TOL):
        raise DomainError("evaluation point outside [-1, 1]")
    return x


def eval_series(series, x):
    """Evaluate ``series`` at ``x`` (scalar or array) by Clenshaw recurrence.

    Raises
    ------
    DomainError
        If any ``|x| > 1``.
    """
    x = _check_domain(x)
    c = series.coeffs if isinstance(series, ChebyshevSeries) else np.asarray(series, float)
    if x.ndim == 0:
        return float(kernels.clenshaw(c, x.reshape(1))[0])
    return kernels.clenshaw(c, x.ravel()).reshape(x.shape)


def eval_recurrence(series, x):
    """Evaluate by building each ``T_k(x)`` from the three-term recurrence.

    Slower and less stable than :func:`eval_series`; kept as a cross-check.
    """
    x = _check_domain(x)
    c = series.coeffs if isinstance(series, ChebyshevSeries) else np.asarray(series, float)
    t_prev = np.ones_like(x)
    total = c[0] * t_prev
    if c.size == 1:
        return total if x.ndim else float(total)
    t_cur = x.copy()
    total = total + c[1] * t_cur
    for k in range(2, c.size):
        t_prev, t_cur = t_cur, 2.0 * x * t_cur - t_prev
        total = total + c[k] * t_cur
    return total if x.ndim else float(total)


def derivative_series(series):
    """Chebyshev coefficients of d/dx of ``series`` (degree drops by one)."""
    c = series.coeffs
    n = c.size - 1
    if n == 0:
        return ChebyshevSeries([0.0])
    d = np.zeros(n + 2)
    # d_{k-1} = d_{k+1} + 2 k c_k, with d_0 halved at the end
    for k in range(n, 0, -1):
        d[k - 1] = d[k + 1] + 2.0 * k * c[k]
    d[0] *= 0.5
    return ChebyshevSeries(d[:n])


def endpoint_derivative(i, k, end):
    """Value of the k-th derivative of ``T_i`` at ``x = end`` (``end`` is +1 or -1).

    Uses ``T_i^(k)(1) = prod_{m<k} (i^2 - m^2) / (2m + 1)`` and
    ``T_i^(k)(-1) = (-1)^(i+k) T_i^(k)(1)``.
    """
    if k < 0 or k > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(f"derivative order {k} not supported (max {MAX_DERIVATIVE_ORDER})")
    if end not in (1, -1):
        raise ValueError("end must be +1 or -1")
    if i < 0:
        raise ValueError("basis index must be non-negative")
    value = 1.0
    for m in range(k):
        value *= (i * i - m * m) / (2 * m + 1)
    if end == -1 and (i + k) % 2:
        value = -value
    return value


def from_monomial(monomial_coeffs):
    """Convert power-basis coefficients ``a_0..a_n`` to a Chebyshev series.

    Horner's scheme in the Chebyshev basis, using
    ``x T_0 = T_1`` and ``x T_k = (T_{k+1} + T_{k-1}) / 2``.
    """
    a = np.asarray(monomial_coeffs, dtype=np.float64).ravel()
    if a.size == 0:
        return ChebyshevSeries([0.0])
    n = a.size - 1
    acc = np.zeros(n + 1)
    acc[0] = a[n]
    for j in range(n - 1, -1, -1):
        shifted = np.zeros(n + 1)
        # multiply acc by x
        shifted[1] += acc[0]
        for k in range(1, n):
            shifted[k + 1] += 0.5 * acc[k]
            shifted[k - 1] += 0.5 * acc[k]
        shifted[0] += a[j]
        acc = shifted
    return ChebyshevSeries(acc)


def coefficient_bounds(n):
    """Bounds on ``|p_l|`` for any series with ``|phi(x)| <= 1`` on [-1, 1].

    ``|p_0| <= 1`` and ``|p_l| <= 4/pi`` for ``l >= 1``.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    b = np.full(n + 1, 4.0 / math.pi)
    b[0] = 1.0
    return b


def project_profile(profile, n, nodes=None):
    """Project ``profile`` onto ``T_0..T_n``.

    ``p_0 = 1/(2 pi) * int phi(cos t) dt`` and
    ``p_l = 1/pi * int phi(cos t) cos(l t) dt`` over ``[0, 2 pi]``, by the
    composite trapezoid rule on ``nodes`` equispaced angles (default
    ``8n + 16``). ``profile`` must accept a numpy array.
    """
    if n < 0:
        raise ValueError("degree must be non-negative")
    m = 8 * n + 16 if nodes is None else int(nodes)
    theta = 2.0 * math.pi * np.arange(m) / m
    values = np.asarray(profile(np.cos(theta)), dtype=np.float64)
    values = np.broadcast_to(values, theta.shape)
    ell = np.arange(n + 1)
    p = (2.0 / m) * (np.cos(np.outer(ell, theta)) @ values)
    p[0] *= 0.5
    return ChebyshevSeries(p)
