"""Weight update laws with a smooth ball projection.

The inertia and Coriolis laws carry the skew-symmetric prediction error
``E_tilde`` in addition to the tracking-error term; friction and gravity
laws are tracking-only. Setting ``E_tilde = 0`` gives the baseline laws.
"""

from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import InvariantViolation


class AdaptationState(NamedTuple):
    theta_M: np.ndarray
    theta_C: np.ndarray
    theta_F: np.ndarray
    theta_G: np.ndarray
    last_theta_M_rate: np.ndarray


@njit(cache=True)
def proj_kernel(rate, theta, bound, delta):
    """Remove the outward radial part of ``rate`` inside the boundary layer.

    The removed fraction ramps linearly from 0 at ``(1 - delta) * bound`` to
    1 at ``bound``, which keeps the map continuous in (rate, theta).
    """
    norm2 = theta @ theta
    inner = (1.0 - delta) * bound
    radial = theta @ rate
    if norm2 <= inner * inner or radial <= 0.0:
        return rate.copy()
    c = min(1.0, (np.sqrt(norm2) - inner) / (delta * bound))
    return rate - (c * radial / norm2) * theta


def proj(rate, theta, bound, delta=0.05, tol=1e-9):
    rate = np.ascontiguousarray(rate, dtype=float)
    theta = np.ascontiguousarray(theta, dtype=float)
    if np.linalg.norm(theta) > bound + tol:
        raise InvariantViolation(f"||theta|| = {np.linalg.norm(theta):.12g} exceeds bound {bound}")
    return proj_kernel(rate, theta, float(bound), float(delta))


@njit(cache=True)
def xi_kron(gains):
    xi = np.asarray(gains.xi)
    return np.outer(xi, xi).ravel()


@njit(cache=True)
def theta_M_rate(jac, jac_rate, r, v_acc, E_tilde, gains, theta):
    """Inertia-network law; ``v_acc = q_d_ddot - alpha * e_dot``."""
    raw = jac_rate.T @ xi_kron(gains) * E_tilde - jac.T @ np.kron(v_acc, r)
    return proj_kernel(gains.gamma_M * raw, theta, gains.theta_bound_M, gains.proj_delta)


@njit(cache=True)
def theta_C_rate(jac, r, v_vel, E_tilde, gains, theta):
    """Coriolis-network law; ``v_vel = q_d_dot - alpha * e``."""
    raw = -2.0 * (jac.T @ xi_kron(gains)) * E_tilde - jac.T @ np.kron(v_vel, r)
    return proj_kernel(gains.gamma_C * raw, theta, gains.theta_bound_C, gains.proj_delta)


@njit(cache=True)
def theta_F_rate(jac, r, gains, theta):
    return proj_kernel(-gains.gamma_F * (jac.T @ r), theta, gains.theta_bound_F, gains.proj_delta)


@njit(cache=True)
def theta_G_rate(jac, r, gains, theta):
    return proj_kernel(-gains.gamma_G * (jac.T @ r), theta, gains.theta_bound_G, gains.proj_delta)
