"""Property and invariant checks run by ``sslbpinn check``.

Each check returns a :class:`CheckResult`; the same functions back the
acceptance tests so the CLI and the test suite cannot drift apart.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import dnn, tensor_ops
from .adaptation import proj_kernel
from .config import SimConfig
from .plant import RobotParams, coriolis, inertia_rate


@dataclass
class CheckResult:
    name: str
    ok: bool
    value: float
    tolerance: float
    seconds: float = 0.0

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        return f"{status}  {self.name}: {self.value:.3g} (tol {self.tolerance:g}, {self.seconds:.2f} s)"


def _timed(name, tolerance, fn):
    t0 = time.perf_counter()
    value = float(fn())
    return CheckResult(name, bool(value <= tolerance), value, tolerance, time.perf_counter() - t0)


def kron_vec_error(trials=100, max_size=5, seed=0):
    """Largest ``|vec(ABC) - (C.T kron A) vec(B)|`` over random shape triples."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        p, q, r, s = rng.integers(1, max_size + 1, size=4)
        A, B, C = rng.normal(size=(p, q)), rng.normal(size=(q, r)), rng.normal(size=(r, s))
        lhs = tensor_ops.vec(A @ B @ C)
        rhs = tensor_ops.kron(C.T, A) @ tensor_ops.vec(B)
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def _rel(a, b):
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1.0))


def random_arch(rng):
    depth = int(rng.integers(0, 4))
    hidden = tuple(int(w) for w in rng.integers(1, 8, size=depth))
    return dnn.DnnArch(int(rng.integers(1, 5)), int(rng.integers(1, 5)), hidden,
                       str(rng.choice(list(dnn.ACTIVATIONS))))


def jacobian_fd_errors(arch, rng, h=1e-6):
    """Relative errors of the three analytic Jacobians against central differences."""
    theta = rng.uniform(-1.0, 1.0, arch.n_params)
    x = rng.normal(size=arch.input_dim)
    x_dot = rng.normal(size=arch.input_dim)
    theta_dot = rng.normal(size=arch.n_params)

    spec = arch.spec()

    def f(th, xx):
        return dnn.forward_kernel(spec, th, xx)

    def jac(th, xx):
        return dnn.weight_jacobian_kernel(spec, th, xx)

    eye_p, eye_x = np.eye(arch.n_params), np.eye(arch.input_dim)
    J_fd = np.column_stack([(f(theta + h * d, x) - f(theta - h * d, x)) / (2 * h) for d in eye_p])
    Jx_fd = np.column_stack([(f(theta, x + h * d) - f(theta, x - h * d)) / (2 * h) for d in eye_x])
    rate_fd = (jac(theta + h * theta_dot, x + h * x_dot) - jac(theta - h * theta_dot, x - h * x_dot)) / (2 * h)
    return (_rel(dnn.weight_jacobian(arch, theta, x), J_fd),
            _rel(dnn.input_jacobian(arch, theta, x), Jx_fd),
            _rel(dnn.weight_jacobian_rate(arch, theta, x, x_dot, theta_dot), rate_fd))


def jacobian_suite_error(configs=24, seed=0):
    rng = np.random.default_rng(seed)
    archs = [dnn.DnnArch(2, 4), dnn.DnnArch(4, 4), dnn.DnnArch(2, 2)]
    archs += [random_arch(rng) for _ in range(configs - len(archs))]
    return max(max(jacobian_fd_errors(a, rng)) for a in archs)


def skew_property_error(states=1000, seed=0, params=None):
    """Largest ``||S + S.T||_F`` with ``S = Mdot - 2C`` over random plant states."""
    params = RobotParams() if params is None else params
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(states):
        q, q_dot = rng.uniform(-np.pi, np.pi, 2), rng.uniform(-5.0, 5.0, 2)
        S = inertia_rate(params, q, q_dot) - 2.0 * coriolis(params, q, q_dot)
        worst = max(worst, float(np.linalg.norm(S + S.T)))
    return worst


def skew_integral(duration=1.0, dt=1e-3, xi=(0.4, 0.4), params=None):
    """``|int xi.T (Mdot - 2C) xi dt|`` along a smooth joint trajectory (RK4 quadrature)."""
    params = RobotParams() if params is None else params
    xi = np.asarray(xi, dtype=float)

    def integrand(t):
        q = np.array([np.sin(2.0 * t), 0.5 * np.cos(3.0 * t)])
        q_dot = np.array([2.0 * np.cos(2.0 * t), -1.5 * np.sin(3.0 * t)])
        return xi @ (inertia_rate(params, q, q_dot) - 2.0 * coriolis(params, q, q_dot)) @ xi

    E = 0.0
    for k in range(int(round(duration / dt))):
        t = k * dt
        E += dt / 6.0 * (integrand(t) + 4.0 * integrand(t + 0.5 * dt) + integrand(t + dt))
    return abs(E)


def projection_overshoot(seed=0, trials=5, steps=5000, dt=1e-3):
    """Largest ``||theta|| - 1`` while integrating ``proj(c, theta, 1)`` from zero with RK4."""
    rng = np.random.default_rng(seed)
    worst = -np.inf
    for _ in range(trials):
        c = rng.normal(size=6) * rng.uniform(1.0, 50.0)
        theta = np.zeros(6)

        def f(th):
            return proj_kernel(c, th, 1.0, 0.05)

        for _ in range(steps):
            k1 = f(theta)
            k2 = f(theta + 0.5 * dt * k1)
            k3 = f(theta + 0.5 * dt * k2)
            k4 = f(theta + dt * k3)
            theta = theta + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            worst = max(worst, float(np.linalg.norm(theta)) - 1.0)
    return max(worst, 0.0)


def dual_form_gap(cfg=None, duration=1.0):
    """Largest ``|E_hat_literal - E_hat_simplified|`` over a closed-loop run.

    Returns ``inf`` if ``E_tilde`` is not exactly ``-E_hat`` in either run.
    """
    from .simulator import run

    cfg = SimConfig() if cfg is None else cfg
    a = run(cfg.replace(duration=duration, mode="developed", skew_form="literal"))
    b = run(cfg.replace(duration=duration, mode="developed", skew_form="simplified"))
    if a.aborted or b.aborted or len(a) != len(b):
        return np.inf
    if not (np.array_equal(a.E_tilde, -a.E_hat) and np.array_equal(b.E_tilde, -b.E_hat)):
        return np.inf
    return float(np.max(np.abs(a.E_hat - b.E_hat)))


def run_all():
    return [
        _timed("kron/vec identity", 1e-12, kron_vec_error),
        _timed("DNN Jacobians vs finite differences (relative)", 1e-5, jacobian_suite_error),
        _timed("Mdot - 2C skew over random states", 1e-10, skew_property_error),
        _timed("integral of xi'(Mdot - 2C)xi over 1 s", 1e-8, skew_integral),
        _timed("projection keeps ||theta|| <= bound", 1e-9, projection_overshoot),
        _timed("skew observer literal vs simplified over 1 s", 1e-8, dual_form_gap),
    ]
