"""Vectorization, Kronecker and sign helpers.

All matrices are dense numpy arrays. ``vec`` stacks columns, so for
conformable A, B, C::

    vec(A @ B @ C) == kron(C.T, A) @ vec(B)
"""

import numpy as np

from .errors import DimensionError


def vec(A):
    """Column-major stacking of a 2-D array into a 1-D vector."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2:
        raise DimensionError(f"vec expects a 2-D array, got ndim={A.ndim}")
    return A.reshape(-1, order="F").copy()


def unvec(v, n, m):
    """Inverse of :func:`vec`: rebuild an ``n x m`` matrix from its columns."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1 or v.size != n * m:
        raise DimensionError(f"cannot unvec length {v.size} into {n}x{m}")
    return v.reshape((n, m), order="F").copy()


def kron(A, B):
    return np.kron(np.atleast_2d(A), np.atleast_2d(B))


def sgn_vec(v):
    """Element-wise signum with sgn(0) = 0 (and sgn(-0.0) = 0)."""
    v = np.asarray(v, dtype=float)
    # np.sign(-0.0) returns -0.0; adding 0.0 normalizes it to +0.0
    return np.sign(v) + 0.0
