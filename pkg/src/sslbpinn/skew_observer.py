"""Skew-symmetric prediction error.

For the true model ``xi.T (Mdot - 2C) xi = 0`` at every instant, so its time
integral ``E`` vanishes and the prediction error is simply ``E_tilde = -E_hat``.
``E_hat`` is driven by the network estimates of ``d/dt vec(M)`` and ``vec(C)``
contracted with ``w = kron(xi, xi)``.

The scalar robust terms ``gamma1 * E_tilde + (gamma2 + gamma3 + gamma4 |x_dot|)
sgn(E_tilde)`` are added to the n^2-vector inside the contraction along the
unit direction ``w / |w|``; after contraction they therefore enter scaled by
``|w| = |xi|^2``. The ``literal`` and ``simplified`` rate forms differ only in
whether the ``Phi'_M theta_dot`` term is added and then cancelled.
"""

from typing import NamedTuple

import numpy as np
from numba import njit

from .adaptation import xi_kron

FORMS = {"literal": 0, "simplified": 1}


class SkewState(NamedTuple):
    E_hat: float = 0.0


@njit(cache=True)
def e_tilde(E_hat):
    return -E_hat


@njit(cache=True)
def robust_scalar(E_tilde, x_dot, gains):
    s = np.sign(E_tilde) + 0.0
    return gains.gamma1 * E_tilde + (gains.gamma2 + gains.gamma3
                                     + gains.gamma4 * np.linalg.norm(x_dot)) * s


@njit(cache=True)
def mu(theta_M_rate, jac_M, E_tilde, x_dot, gains):
    w = xi_kron(gains)
    return -(jac_M @ theta_M_rate) + robust_scalar(E_tilde, x_dot, gains) * (w / np.linalg.norm(w))


@njit(cache=True)
def e_hat_rate_literal(jac_x_M, jac_M, theta_M_rate, phi_C, x_dot, E_tilde, gains):
    d_phi_M = jac_x_M @ x_dot + jac_M @ theta_M_rate
    return xi_kron(gains) @ (d_phi_M - 2.0 * phi_C + mu(theta_M_rate, jac_M, E_tilde, x_dot, gains))


@njit(cache=True)
def e_hat_rate_simplified(jac_x_M, phi_C, x_dot, E_tilde, gains):
    w = xi_kron(gains)
    return w @ (jac_x_M @ x_dot - 2.0 * phi_C) + np.linalg.norm(w) * robust_scalar(E_tilde, x_dot, gains)


def e_hat_rate(jac_x_M, jac_M, theta_M_rate, phi_C, x_dot, E_tilde, gains, form="simplified"):
    """Rate of the skew-symmetric estimate.

    ``x_dot`` is the time derivative of the inertia network's input (the
    joint velocity).
    """
    args = [np.ascontiguousarray(a, dtype=float) for a in (jac_x_M, jac_M, theta_M_rate, phi_C, x_dot)]
    if form == "literal":
        out = e_hat_rate_literal(*args, float(E_tilde), gains)
    elif form == "simplified":
        out = e_hat_rate_simplified(args[0], args[3], args[4], float(E_tilde), gains)
    else:
        raise ValueError(f"unknown skew observer form {form!r}")
    if not np.isfinite(out):
        raise FloatingPointError("non-finite skew estimate rate")
    return out
