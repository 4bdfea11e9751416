"""Tracking errors and the physics-informed DNN control law."""

from typing import NamedTuple

import numpy as np
from numba import njit

from .tensor_ops import kron


class GainConfig(NamedTuple):
    """Every gain of the closed loop.

    Adaptation gains ``gamma_*`` are scalars standing for ``gamma * I``.
    ``sgn_smoothing`` > 0 swaps ``sgn(r)`` for ``tanh(sgn_smoothing * r)``.
    """

    alpha: float = 3.8
    k1: float = 15.1
    k2: float = 0.5
    k3: float = 0.5
    k4: float = 0.3
    sgn_smoothing: float = 0.0
    gamma_M: float = 1.1
    gamma_C: float = 11.5
    gamma_F: float = 9.0
    gamma_G: float = 1.0
    theta_bound_M: float = 20.0
    theta_bound_C: float = 20.0
    theta_bound_F: float = 20.0
    theta_bound_G: float = 20.0
    proj_delta: float = 0.05
    gamma1: float = 186.1
    gamma2: float = 1.2
    gamma3: float = 6.5
    gamma4: float = 2.7
    xi: tuple = (0.4, 0.4)

    def validate(self):
        for name, value in self._asdict().items():
            values = value if name == "xi" else (value,)
            for v in values:
                if not np.isfinite(v) or v < 0 or (v == 0 and name != "sgn_smoothing"):
                    raise ValueError(f"gain {name} must be positive, got {value!r}")
        if self.proj_delta >= 1:
            raise ValueError("proj_delta must lie in (0, 1)")
        return self


class ErrorState(NamedTuple):
    e: np.ndarray
    r: np.ndarray


class DnnOutputs(NamedTuple):
    """Network estimates of vec(M), vec(C), F and G."""

    M: np.ndarray
    C: np.ndarray
    F: np.ndarray
    G: np.ndarray


@njit(cache=True)
def unvec_matvec(w, v):
    """``unvec(w) @ v`` for a square ``unvec``; equals ``regressor(v) @ w``."""
    n = v.size
    out = np.zeros(n)
    for j in range(n):
        out += w[j * n:(j + 1) * n] * v[j]
    return out


@njit(cache=True)
def sgn(x):
    return np.sign(x) + 0.0


@njit(cache=True)
def control_law(e, r, q_d_dot, q_d_ddot, phi_M, phi_C, phi_F, phi_G, gains):
    alpha = gains.alpha
    e_dot = r - alpha * e
    v_vel = q_d_dot - alpha * e
    v_acc = q_d_ddot - alpha * e_dot
    # ||v.T kron I_n||_2 = ||v||_2
    robust = gains.k2 + gains.k3 * np.linalg.norm(v_vel) + gains.k4 * np.linalg.norm(v_acc)
    if gains.sgn_smoothing > 0.0:
        s = np.tanh(gains.sgn_smoothing * r)
    else:
        s = sgn(r)
    return (unvec_matvec(phi_C, v_vel) + phi_G + phi_F - gains.k1 * r - e
            + unvec_matvec(phi_M, v_acc) - s * robust)


def tracking_errors(q, q_dot, desired, alpha):
    e = np.asarray(q, dtype=float) - desired.q_d
    e_dot = np.asarray(q_dot, dtype=float) - desired.q_d_dot
    return ErrorState(e, e_dot + alpha * e)


def regressor(v):
    """``kron(v.T, I_n)``, shape ``(n, n**2)``."""
    v = np.asarray(v, dtype=float).reshape(1, -1)
    return kron(v, np.eye(v.size))


def control_input(errors, desired, outputs, gains):
    """Torque command from the current errors and DNN estimates."""
    n = errors.e.size
    phi = [np.ascontiguousarray(o, dtype=float) for o in outputs]
    if any(not np.all(np.isfinite(p)) for p in phi):
        raise FloatingPointError("non-finite DNN output")
    if phi[0].size != n * n or phi[1].size != n * n or phi[2].size != n or phi[3].size != n:
        raise ValueError("DNN output sizes do not match the number of joints")
    return control_law(np.asarray(errors.e, float), np.asarray(errors.r, float),
                       desired.q_d_dot, desired.q_d_ddot, *phi, gains)
