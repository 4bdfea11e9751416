"""Fully-connected feedforward DNN with analytic Jacobians.

Layer ``j`` holds a weight-and-bias matrix ``v_j`` of shape
``(L_j, L_{j+1})`` with ``L_0 = input_dim + 1`` (the augmented input carries
a trailing 1 for the bias). The recursion is::

    z_0 = v_0.T @ [x, 1]
    z_j = v_j.T @ act(z_{j-1})        j = 1..k
    out = z_k

The packed parameter vector is ``theta = [vec(v_0), ..., vec(v_k)]`` with
column-major ``vec``. Because of that ordering, the slice of ``theta`` that
belongs to layer ``j`` reshaped row-major to ``(L_{j+1}, L_j)`` is exactly
``v_j.T``, which is what the kernels below use.

The numeric kernels are compiled with numba so the closed-loop simulator can
call them at every Runge-Kutta stage.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .errors import DimensionError

TANH = 0
LOGISTIC = 1
ACTIVATIONS = {"tanh": TANH, "logistic": LOGISTIC}

# sup |tanh''| = 4 / (3 sqrt 3), attained at tanh(y) = 1/sqrt(3)
TANH_D2_BOUND = 4.0 / (3.0 * np.sqrt(3.0))


class NetSpec(NamedTuple):
    """Shape information in a form the jitted kernels accept."""

    widths: np.ndarray
    offsets: np.ndarray
    kind: int


@dataclass(frozen=True)
class DnnArch:
    input_dim: int
    output_dim: int
    hidden: tuple = (7, 7, 7, 7)
    activation: str = "tanh"

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.input_dim < 1 or self.output_dim < 1 or any(w < 1 for w in self.hidden):
            raise ValueError("all layer widths must be >= 1")
        object.__setattr__(self, "hidden", tuple(int(w) for w in self.hidden))

    @property
    def k(self):
        return len(self.hidden)

    @property
    def widths(self):
        return np.array([self.input_dim + 1, *self.hidden, self.output_dim], dtype=np.int64)

    @property
    def offsets(self):
        w = self.widths
        return np.concatenate([[0], np.cumsum(w[:-1] * w[1:])]).astype(np.int64)

    @property
    def n_params(self):
        w = self.widths
        return int(np.sum(w[:-1] * w[1:]))

    def spec(self):
        return NetSpec(self.widths, self.offsets, ACTIVATIONS[self.activation])


@dataclass
class DnnParams:
    theta: np.ndarray
    theta_bound: float = 20.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        if self.theta_bound <= 0:
            raise ValueError("theta_bound must be positive")


def pack(layers):
    """Concatenate ``vec(v_0), ..., vec(v_k)`` into one parameter vector."""
    return np.concatenate([np.asarray(v, dtype=float).reshape(-1, order="F") for v in layers])


def unpack(arch, theta):
    """Split a parameter vector back into the layer matrices ``v_j``."""
    theta = np.asarray(theta, dtype=float)
    if theta.size != arch.n_params:
        raise DimensionError(f"expected {arch.n_params} parameters, got {theta.size}")
    w, off = arch.widths, arch.offsets
    return [theta[off[j]:off[j + 1]].reshape((w[j], w[j + 1]), order="F").copy()
            for j in range(arch.k + 1)]


def init_weights(arch, rng_seed, theta_bound=20.0):
    """Draw every weight from U(-1, 1); rescale onto the ball if it lands outside."""
    rng = np.random.default_rng(rng_seed)
    theta = rng.uniform(-1.0, 1.0, arch.n_params)
    norm = np.linalg.norm(theta)
    if norm > theta_bound:
        theta *= theta_bound / norm
    return DnnParams(theta, theta_bound)


# ---------------------------------------------------------------------------
# jitted kernels


@njit(cache=True)
def act(kind, y):
    if kind == TANH:
        return np.tanh(y)
    return 1.0 / (1.0 + np.exp(-y))


@njit(cache=True)
def act_d1(kind, y):
    if kind == TANH:
        t = np.tanh(y)
        return 1.0 - t * t
    s = 1.0 / (1.0 + np.exp(-y))
    return s * (1.0 - s)


@njit(cache=True)
def act_d2(kind, y):
    if kind == TANH:
        t = np.tanh(y)
        return -2.0 * t * (1.0 - t * t)
    s = 1.0 / (1.0 + np.exp(-y))
    return s * (1.0 - s) * (1.0 - 2.0 * s)


@njit(cache=True)
def _layer_T(theta, net, j):
    w = net.widths
    return theta[net.offsets[j]:net.offsets[j + 1]].reshape((w[j + 1], w[j]))


# Explicit loops below: at these widths numba's matmul dispatch costs far more
# than the arithmetic.


@njit(cache=True)
def _matvec(theta, off, rows, cols, h, out):
    """``out[:rows] = v.T @ h`` for the layer block starting at ``off``."""
    for i in range(rows):
        acc = 0.0
        base = off + i * cols
        for a in range(cols):
            acc += theta[base + a] * h[a]
        out[i] = acc


@njit(cache=True)
def _back_step(Bj, theta, off, rows, cols, n_out, out):
    """``out[:, :cols] = Bj[:, :rows] @ v.T`` for the layer block starting at ``off``."""
    for o in range(n_out):
        for a in range(cols):
            acc = 0.0
            for b in range(rows):
                acc += Bj[o, b] * theta[off + b * cols + a]
            out[o, a] = acc


@njit(cache=True)
def layer_values(net, theta, x):
    """Per-layer inputs ``H[j] = h_j`` and pre-activations ``Z[j] = z_j``, zero padded."""
    w = net.widths
    k = w.size - 2
    maxw = w.max()
    H = np.zeros((k + 1, maxw))
    Z = np.zeros((k + 1, maxw))
    n_in = w[0] - 1
    for a in range(n_in):
        H[0, a] = x[a]
    H[0, n_in] = 1.0
    for j in range(k + 1):
        if j > 0:
            for a in range(w[j]):
                H[j, a] = act(net.kind, Z[j - 1, a])
        _matvec(theta, net.offsets[j], w[j + 1], w[j], H[j], Z[j])
    return H, Z


@njit(cache=True)
def back_products(net, theta, Z):
    """``B[j] = v_k.T D_k ... v_{j+1}.T D_{j+1}`` (identity for j = k), zero padded."""
    w = net.widths
    k = w.size - 2
    n_out = w[k + 1]
    B = np.zeros((k + 1, n_out, w.max()))
    for o in range(n_out):
        B[k, o, o] = 1.0
    for j in range(k, 0, -1):
        _back_step(B[j], theta, net.offsets[j], w[j + 1], w[j], n_out, B[j - 1])
        for a in range(w[j]):
            d = act_d1(net.kind, Z[j - 1, a])
            for o in range(n_out):
                B[j - 1, o, a] *= d
    return B


@njit(cache=True)
def forward_kernel(net, theta, x):
    H, Z = layer_values(net, theta, x)
    k = net.widths.size - 2
    return Z[k, :net.widths[k + 1]].copy()


@njit(cache=True)
def _assemble(net, B, H, n_params):
    w = net.widths
    k = w.size - 2
    n_out = w[k + 1]
    J = np.zeros((n_out, n_params))
    for j in range(k + 1):
        off = net.offsets[j]
        for b in range(w[j + 1]):
            for a in range(w[j]):
                col = off + a + b * w[j]
                h = H[j, a]
                for o in range(n_out):
                    J[o, col] = B[j, o, b] * h
    return J


@njit(cache=True)
def _input_jacobian(net, theta, B):
    w = net.widths
    n_in = w[0] - 1
    n_out = w[-1]
    Jx = np.zeros((n_out, n_in))
    for o in range(n_out):
        for a in range(n_in):
            acc = 0.0
            for b in range(w[1]):
                acc += B[0, o, b] * theta[b * w[0] + a]
            Jx[o, a] = acc
    return Jx


@njit(cache=True)
def weight_jacobian_kernel(net, theta, x):
    H, Z = layer_values(net, theta, x)
    B = back_products(net, theta, Z)
    return _assemble(net, B, H, theta.size)


@njit(cache=True)
def input_jacobian_kernel(net, theta, x):
    H, Z = layer_values(net, theta, x)
    B = back_products(net, theta, Z)
    return _input_jacobian(net, theta, B)


@njit(cache=True)
def _rate_from(net, theta, theta_dot, x_dot, H, Z, B):
    w = net.widths
    k = w.size - 2
    maxw = w.max()
    n_out = w[k + 1]
    Hd = np.zeros((k + 1, maxw))
    Zd = np.zeros((k + 1, maxw))
    tmp = np.zeros(maxw)
    n_in = w[0] - 1
    for a in range(n_in):
        Hd[0, a] = x_dot[a]
    for j in range(k + 1):
        if j > 0:
            for a in range(w[j]):
                Hd[j, a] = act_d1(net.kind, Z[j - 1, a]) * Zd[j - 1, a]
        off = net.offsets[j]
        _matvec(theta_dot, off, w[j + 1], w[j], H[j], tmp)
        _matvec(theta, off, w[j + 1], w[j], Hd[j], Zd[j])
        for i in range(w[j + 1]):
            Zd[j, i] += tmp[i]
    Bd = np.zeros((k + 1, n_out, maxw))
    P = np.zeros((n_out, maxw))
    Q = np.zeros((n_out, maxw))
    for j in range(k, 0, -1):
        off = net.offsets[j]
        # P = Bd_j v.T + B_j vdot.T ; Q = B_j v.T
        _back_step(Bd[j], theta, off, w[j + 1], w[j], n_out, P)
        _back_step(B[j], theta_dot, off, w[j + 1], w[j], n_out, Q)
        for o in range(n_out):
            for a in range(w[j]):
                P[o, a] += Q[o, a]
        _back_step(B[j], theta, off, w[j + 1], w[j], n_out, Q)
        for a in range(w[j]):
            z = Z[j - 1, a]
            d = act_d1(net.kind, z)
            dd = act_d2(net.kind, z) * Zd[j - 1, a]
            for o in range(n_out):
                Bd[j - 1, o, a] = P[o, a] * d + Q[o, a] * dd
    J = np.zeros((n_out, theta.size))
    for j in range(k + 1):
        off = net.offsets[j]
        for b in range(w[j + 1]):
            for a in range(w[j]):
                col = off + a + b * w[j]
                for o in range(n_out):
                    J[o, col] = Bd[j, o, b] * H[j, a] + B[j, o, b] * Hd[j, a]
    return J


@njit(cache=True)
def weight_jacobian_rate_kernel(net, theta, x, x_dot, theta_dot):
    """Time derivative of the weight Jacobian along (x_dot, theta_dot)."""
    H, Z = layer_values(net, theta, x)
    B = back_products(net, theta, Z)
    return _rate_from(net, theta, theta_dot, x_dot, H, Z, B)


@njit(cache=True)
def evaluate_with_rates(net, theta, x, x_dot, theta_dot):
    """Output, weight Jacobian, input Jacobian and weight-Jacobian rate in one pass."""
    H, Z = layer_values(net, theta, x)
    B = back_products(net, theta, Z)
    k = net.widths.size - 2
    return (Z[k, :net.widths[k + 1]].copy(), _assemble(net, B, H, theta.size),
            _input_jacobian(net, theta, B), _rate_from(net, theta, theta_dot, x_dot, H, Z, B))


@njit(cache=True)
def evaluate_kernel(net, theta, x):
    """Output and weight Jacobian from a single pass."""
    H, Z = layer_values(net, theta, x)
    B = back_products(net, theta, Z)
    k = net.widths.size - 2
    return Z[k, :net.widths[k + 1]].copy(), _assemble(net, B, H, theta.size)


# ---------------------------------------------------------------------------
# checked public interface


def _check(arch, params, x):
    theta = np.asarray(params.theta if isinstance(params, DnnParams) else params, dtype=float)
    x = np.asarray(x, dtype=float).reshape(-1)
    if theta.size != arch.n_params:
        raise DimensionError(f"expected {arch.n_params} parameters, got {theta.size}")
    if x.size != arch.input_dim:
        raise DimensionError(f"expected input of size {arch.input_dim}, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite network input")
    return np.ascontiguousarray(theta), np.ascontiguousarray(x)


def forward(arch, params, x):
    theta, x = _check(arch, params, x)
    return forward_kernel(arch.spec(), theta, x)


def weight_jacobian(arch, params, x):
    """d(output)/d(theta), shape ``(output_dim, n_params)``."""
    theta, x = _check(arch, params, x)
    return weight_jacobian_kernel(arch.spec(), theta, x)


def input_jacobian(arch, params, x):
    """d(output)/dx, shape ``(output_dim, input_dim)``; the bias input contributes nothing."""
    theta, x = _check(arch, params, x)
    return input_jacobian_kernel(arch.spec(), theta, x)


def weight_jacobian_rate(arch, params, x, x_dot, theta_dot):
    theta, x = _check(arch, params, x)
    x_dot = np.ascontiguousarray(np.asarray(x_dot, dtype=float).reshape(-1))
    theta_dot = np.ascontiguousarray(np.asarray(theta_dot, dtype=float).reshape(-1))
    if x_dot.size != arch.input_dim or theta_dot.size != arch.n_params:
        raise DimensionError("x_dot/theta_dot do not match the architecture")
    return weight_jacobian_rate_kernel(arch.spec(), theta, x, x_dot, theta_dot)


def activation(kind, y):
    """Return ``(phi, phi', phi'')`` evaluated element-wise at ``y``."""
    code = ACTIVATIONS[kind] if isinstance(kind, str) else int(kind)
    y = np.asarray(y, dtype=float)
    return act(code, y), act_d1(code, y), act_d2(code, y)


@dataclass
class DnnEval:
    """Cached forward pass: per-layer inputs and pre-activations."""

    arch: DnnArch
    theta: np.ndarray
    x: np.ndarray
    H: np.ndarray = field(repr=False)
    Z: np.ndarray = field(repr=False)

    @classmethod
    def run(cls, arch, params, x):
        theta, x = _check(arch, params, x)
        H, Z = layer_values(arch.spec(), theta, x)
        return cls(arch, theta, x, H, Z)

    @property
    def output(self):
        return self.Z[self.arch.k, :self.arch.output_dim].copy()

    def weight_jacobian(self):
        net = self.arch.spec()
        B = back_products(net, self.theta, self.Z)
        return _assemble(net, B, self.H, self.theta.size)
