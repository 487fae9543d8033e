"""Pure-numpy versions of the compiled kernels (same signatures)."""
import numpy as np


def clenshaw(coeffs, x):
    c = np.asarray(coeffs, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if c.size == 0:
        return np.zeros_like(x)
    b1 = np.zeros_like(x)
    b2 = np.zeros_like(x)
    x2 = 2.0 * x
    for k in range(c.size - 1, 0, -1):
        b1, b2 = c[k] + x2 * b1 - b2, b1
    return c[0] + x * b1 - b2


def motor_torque(phi, dphi, ddphi, J_c, dJ_c, tl_c, vel_scale, acc_scale,
                 inv_e, mu_v, J_m):
    vel = np.asarray(dphi) * vel_scale
    return (clenshaw(tl_c, phi)
            + 0.5 * clenshaw(dJ_c, phi) * inv_e * vel * vel
            + (clenshaw(J_c, phi) + J_m) * np.asarray(ddphi) * acc_scale
            + mu_v * vel)


def rms_batch(phi, dphi, ddphi, weights, J_c, dJ_c, tl_c, vel_scale,
              acc_scale, inv_e, mu_v, J_m):
    tau = motor_torque(phi, dphi, ddphi, J_c, dJ_c, tl_c, vel_scale,
                       acc_scale, inv_e, mu_v, J_m)
    return np.sqrt(0.5 * (tau * tau) @ np.asarray(weights))
