"""Backend selection for the numeric hot loops.

The compiled extension ``_ckernels`` is used when it was built; otherwise the
numpy implementation in ``_pykernels`` is used. Set ``CHEBMOTION_PURE_PYTHON=1``
to force the fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("CHEBMOTION_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:  # extension not built
        pass


def _vec(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def clenshaw(coeffs, x):
    """Evaluate a Chebyshev series at every point of the 1-D array ``x``."""
    return _impl.clenshaw(_vec(coeffs), _vec(x))


def motor_torque(phi, dphi, ddphi, J_c, dJ_c, tl_c, vel_scale, acc_scale,
                 inv_e, mu_v, J_m):
    """Rescaled motor torque at 1-D arrays of profile values/derivatives."""
    return _impl.motor_torque(_vec(phi), _vec(dphi), _vec(ddphi), _vec(J_c),
                              _vec(dJ_c), _vec(tl_c), float(vel_scale),
                              float(acc_scale), float(inv_e), float(mu_v),
                              float(J_m))


def rms_batch(phi, dphi, ddphi, weights, J_c, dJ_c, tl_c, vel_scale,
              acc_scale, inv_e, mu_v, J_m):
    """RMS torque per row for 2-D (rows x nodes) profile arrays.

    ``weights`` are quadrature weights on [-1, 1]; the result is
    ``sqrt(0.5 * sum(w * tau**2))`` per row.
    """
    return _impl.rms_batch(_vec(phi), _vec(dphi), _vec(ddphi), _vec(weights),
                           _vec(J_c), _vec(dJ_c), _vec(tl_c), float(vel_scale),
                           float(acc_scale), float(inv_e), float(mu_v),
                           float(J_m))


def get_backend(name):
    """Return the kernel module for ``"python"`` or ``"cython"`` (tests, benchmarks)."""
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")
