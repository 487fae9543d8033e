# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loops: Chebyshev evaluation and the motor torque at nodes.

Must stay numerically interchangeable with ``_pykernels``.
"""
import numpy as np

from libc.math cimport sqrt


cdef inline double _clenshaw(const double[::1] c, double x) noexcept nogil:
    cdef Py_ssize_t k, n = c.shape[0]
    cdef double b1 = 0.0, b2 = 0.0, tmp, x2 = 2.0 * x
    if n == 0:
        return 0.0
    for k in range(n - 1, 0, -1):
        tmp = c[k] + x2 * b1 - b2
        b2 = b1
        b1 = tmp
    return c[0] + x * b1 - b2


cdef inline double _torque(double phi, double dphi, double ddphi,
                           const double[::1] J_c, const double[::1] dJ_c,
                           const double[::1] tl_c, double vel_scale,
                           double acc_scale, double inv_e, double mu_v,
                           double J_m) noexcept nogil:
    cdef double vel = dphi * vel_scale
    return (_clenshaw(tl_c, phi)
            + 0.5 * _clenshaw(dJ_c, phi) * inv_e * vel * vel
            + (_clenshaw(J_c, phi) + J_m) * ddphi * acc_scale
            + mu_v * vel)


def clenshaw(const double[::1] coeffs, const double[::1] x):
    cdef Py_ssize_t i, n = x.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _clenshaw(coeffs, x[i])
    return out


def motor_torque(const double[::1] phi, const double[::1] dphi,
                 const double[::1] ddphi, const double[::1] J_c,
                 const double[::1] dJ_c, const double[::1] tl_c,
                 double vel_scale, double acc_scale, double inv_e,
                 double mu_v, double J_m):
    cdef Py_ssize_t i, n = phi.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = _torque(phi[i], dphi[i], ddphi[i], J_c, dJ_c, tl_c,
                           vel_scale, acc_scale, inv_e, mu_v, J_m)
    return out


def rms_batch(const double[:, ::1] phi, const double[:, ::1] dphi,
              const double[:, ::1] ddphi, const double[::1] weights,
              const double[::1] J_c, const double[::1] dJ_c,
              const double[::1] tl_c, double vel_scale, double acc_scale,
              double inv_e, double mu_v, double J_m):
    cdef Py_ssize_t r, j, rows = phi.shape[0], cols = phi.shape[1]
    cdef double acc, tau
    out = np.empty(rows, dtype=np.float64)
    cdef double[::1] o = out
    with nogil:
        for r in range(rows):
            acc = 0.0
            for j in range(cols):
                tau = _torque(phi[r, j], dphi[r, j], ddphi[r, j], J_c, dJ_c,
                              tl_c, vel_scale, acc_scale, inv_e, mu_v, J_m)
                acc = acc + weights[j] * tau * tau
            o[r] = sqrt(0.5 * acc)
    return out
