import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from sslbpinn.controller import regressor
from sslbpinn.errors import DimensionError
from sslbpinn.tensor_ops import kron, sgn_vec, unvec, vec

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
dims = st.integers(1, 6)


def mats(n, m):
    return arrays(np.float64, (n, m), elements=finite)


def test_vec_column_major():
    assert vec([[1, 3], [2, 4]]).tolist() == [1, 2, 3, 4]
    assert vec(np.eye(2)).tolist() == [1, 0, 0, 1]


def test_unvec_examples():
    assert unvec([1, 2, 3, 4], 2, 2).tolist() == [[1, 3], [2, 4]]
    assert unvec([0, 0], 2, 1).tolist() == [[0], [0]]


def test_unvec_length_mismatch():
    with pytest.raises(DimensionError):
        unvec([1, 2, 3], 2, 2)


def test_vec_rejects_vectors():
    with pytest.raises(DimensionError):
        vec([1.0, 2.0])


@given(st.data(), dims, dims)
def test_vec_unvec_inverse(data, n, m):
    A = data.draw(mats(n, m))
    assert np.array_equal(unvec(vec(A), n, m), A)
    v = vec(A)
    assert np.array_equal(vec(unvec(v, n, m)), v)


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), [[5]]), np.diag([5.0, 5.0]))
    assert kron([[1, 2]], np.eye(2)).tolist() == [[1, 0, 2, 0], [0, 1, 0, 2]]


@settings(max_examples=200)
@given(st.data(), dims, dims, dims, dims)
def test_kron_vec_identity(data, p, q, r, s):
    el = st.floats(-10, 10, allow_nan=False)
    A = data.draw(arrays(np.float64, (p, q), elements=el))
    B = data.draw(arrays(np.float64, (q, r), elements=el))
    C = data.draw(arrays(np.float64, (r, s), elements=el))
    lhs = vec(A @ B @ C)
    rhs = kron(C.T, A) @ vec(B)
    scale = max(1.0, np.abs(A).max() * np.abs(B).max() * np.abs(C).max() * q * r)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_kron_rank_multiplies():
    rng = np.random.default_rng(1)
    A, B = rng.normal(size=(3, 3)), rng.normal(size=(2, 4))
    assert np.linalg.matrix_rank(kron(A, B)) == np.linalg.matrix_rank(A) * np.linalg.matrix_rank(B)


@given(st.data(), st.integers(1, 5))
def test_regressor_is_unvec_product(data, n):
    v = data.draw(arrays(np.float64, n, elements=st.floats(-10, 10)))
    w = data.draw(arrays(np.float64, n * n, elements=st.floats(-10, 10)))
    assert np.allclose(regressor(v) @ w, unvec(w, n, n) @ v, atol=1e-9)


def test_sgn_examples():
    assert sgn_vec([2, -1, 0]).tolist() == [1, -1, 0]
    assert sgn_vec(np.zeros(3)).tolist() == [0, 0, 0]
    out = sgn_vec([-0.0])
    assert out[0] == 0 and not np.signbit(out[0])


@given(arrays(np.float64, st.integers(1, 8), elements=finite))
def test_sgn_odd_and_ternary(v):
    s = sgn_vec(v)
    assert set(s.tolist()) <= {-1.0, 0.0, 1.0}
    assert np.array_equal(sgn_vec(-v), -s)
