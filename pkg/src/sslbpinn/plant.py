"""Two-link planar revolute robot and the desired trajectory.

The inertia matrix uses the lumped-constant form common to two-link
direct-drive testbeds::

    M = [[p1 + 2 p3 c2, p2 + p3 c2],
         [p2 + p3 c2,   p2       ]]

and C is built from the Christoffel symbols of M, so ``Mdot - 2C`` is
skew-symmetric for every state. Friction is viscous plus a tanh-smoothed
Coulomb term. Gravity is only used when ``gravity`` is set (uniform links,
centre of mass at mid-length).
"""

from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import ConfigError


class RobotParams(NamedTuple):
    p1: float = 3.473
    p2: float = 0.196
    p3: float = 0.242
    fd1: float = 5.3
    fd2: float = 1.1
    fs1: float = 8.45
    fs2: float = 2.35
    kappa_s: float = 100.0
    gravity: bool = False
    m1: float = 2.0
    m2: float = 2.0
    l1: float = 0.5
    l2: float = 0.5
    g: float = 9.81


class PlantState(NamedTuple):
    q: np.ndarray
    q_dot: np.ndarray


class DesiredPoint(NamedTuple):
    q_d: np.ndarray
    q_d_dot: np.ndarray
    q_d_ddot: np.ndarray


N_DOF = 2
TRAJECTORY_MODES = {"literal": 0, "ramp": 1}


@njit(cache=True)
def inertia(params, q):
    c2 = np.cos(q[1])
    M = np.empty((2, 2))
    M[0, 0] = params.p1 + 2.0 * params.p3 * c2
    M[0, 1] = params.p2 + params.p3 * c2
    M[1, 0] = M[0, 1]
    M[1, 1] = params.p2
    return M


@njit(cache=True)
def inertia_rate(params, q, q_dot):
    s2 = np.sin(q[1])
    Md = np.zeros((2, 2))
    Md[0, 0] = -2.0 * params.p3 * s2 * q_dot[1]
    Md[0, 1] = -params.p3 * s2 * q_dot[1]
    Md[1, 0] = Md[0, 1]
    return Md


@njit(cache=True)
def coriolis(params, q, q_dot):
    h = params.p3 * np.sin(q[1])
    C = np.zeros((2, 2))
    C[0, 0] = -h * q_dot[1]
    C[0, 1] = -h * (q_dot[0] + q_dot[1])
    C[1, 0] = h * q_dot[0]
    return C


@njit(cache=True)
def friction(params, q_dot):
    F = np.empty(2)
    F[0] = params.fd1 * q_dot[0] + params.fs1 * np.tanh(params.kappa_s * q_dot[0])
    F[1] = params.fd2 * q_dot[1] + params.fs2 * np.tanh(params.kappa_s * q_dot[1])
    return F


@njit(cache=True)
def gravity(params, q):
    G = np.zeros(2)
    if params.gravity:
        c1 = np.cos(q[0])
        c12 = np.cos(q[0] + q[1])
        G[1] = params.m2 * params.g * 0.5 * params.l2 * c12
        G[0] = (0.5 * params.m1 + params.m2) * params.g * params.l1 * c1 + G[1]
    return G


@njit(cache=True)
def forward_dynamics(params, q, q_dot, tau):
    """Joint accelerations ``M^{-1} (tau - C q_dot - G - F)``."""
    if not np.all(np.isfinite(tau)):
        raise ValueError("non-finite torque")
    rhs = tau - coriolis(params, q, q_dot) @ q_dot - gravity(params, q) - friction(params, q_dot)
    return np.linalg.solve(inertia(params, q), rhs)


@njit(cache=True)
def desired_kernel(t, mode):
    amp = 3.0 * np.pi / 8.0
    w = 0.5 * np.pi
    s, sd, sdd = amp * np.sin(w * t), amp * w * np.cos(w * t), -amp * w * w * np.sin(w * t)
    if mode == 0:
        a, ad, add = 1.0 - np.exp(-0.1), 0.0, 0.0
    else:
        decay = np.exp(-0.1 * t)
        a, ad, add = 1.0 - decay, 0.1 * decay, -0.01 * decay
    one = np.ones(2)
    return a * s * one, (ad * s + a * sd) * one, (add * s + 2.0 * ad * sd + a * sdd) * one


def desired_trajectory(t, mode="literal"):
    """Sinusoidal reference on both joints.

    ``literal`` scales the sine by the constant ``1 - exp(-0.1)``; ``ramp``
    uses ``1 - exp(-0.1 t)`` so the amplitude grows in over ~30 s.
    """
    if mode not in TRAJECTORY_MODES:
        raise ConfigError(f"unknown trajectory mode {mode!r}")
    return DesiredPoint(*desired_kernel(float(t), TRAJECTORY_MODES[mode]))


def inverse_dynamics(params, q, q_dot, q_ddot):
    return (inertia(params, q) @ q_ddot + coriolis(params, q, q_dot) @ q_dot
            + gravity(params, q) + friction(params, q_dot))
