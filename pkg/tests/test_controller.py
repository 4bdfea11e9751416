import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from sslbpinn.controller import DnnOutputs, GainConfig, control_input, regressor, tracking_errors
from sslbpinn.plant import DesiredPoint, desired_trajectory
from sslbpinn.tensor_ops import vec

Z2, Z4 = np.zeros(2), np.zeros(4)
AT_REST = DesiredPoint(Z2, Z2, Z2)
ZERO_NETS = DnnOutputs(Z4, Z4, Z2, Z2)
small = st.floats(-5, 5)


def test_tracking_errors_examples():
    d = DesiredPoint(np.array([0.2, 0.1]), np.array([0.3, -0.2]), Z2)
    err = tracking_errors(d.q_d, d.q_d_dot, d, 3.8)
    assert not err.e.any() and not err.r.any()
    err = tracking_errors(d.q_d + [0.1, 0.0], d.q_d_dot, d, 2.0)
    assert np.allclose(err.e, [0.1, 0.0]) and np.allclose(err.r, [0.2, 0.0])


def test_initial_error_from_default_start():
    err = tracking_errors([0.4, -0.3], [0.0, 0.0], desired_trajectory(0.0), 3.8)
    assert err.e.tolist() == [0.4, -0.3]


def test_regressor_examples():
    assert regressor([1, 2]).tolist() == [[1, 0, 2, 0], [0, 1, 0, 2]]
    assert not regressor(Z2).any()


@given(arrays(np.float64, (2, 2), elements=small), arrays(np.float64, 2, elements=small))
def test_regressor_vec_identity(A, v):
    assert np.allclose(regressor(v) @ vec(A), A @ v, atol=1e-13, rtol=0)


@given(arrays(np.float64, 3, elements=small))
def test_regressor_spectral_norm(v):
    assert np.linalg.norm(regressor(v), 2) == pytest.approx(np.linalg.norm(v), abs=1e-12)


def test_zero_everything_gives_zero_torque():
    err = tracking_errors(Z2, Z2, AT_REST, 3.8)
    assert not control_input(err, AT_REST, ZERO_NETS, GainConfig()).any()


def test_inertia_feedforward_only():
    A = np.array([[2.0, 0.5], [0.5, 1.0]])
    d = DesiredPoint(Z2, Z2, np.array([0.7, -1.3]))
    err = tracking_errors(Z2, Z2, d, 3.8)
    tau = control_input(err, d, DnnOutputs(vec(A), Z4, Z2, Z2), GainConfig())
    assert np.allclose(tau, A @ d.q_d_ddot, atol=1e-14)


def test_robust_term_arithmetic():
    gains = GainConfig(k1=1.0, k2=0.5, k3=1e-300, k4=1e-300)
    # e = 0 and r = q_dot - q_d_dot = [1, -1]
    err = tracking_errors(Z2, np.array([1.0, -1.0]), AT_REST, gains.alpha)
    assert np.allclose(control_input(err, AT_REST, ZERO_NETS, gains), [-1.5, 1.5], atol=1e-12)


@given(arrays(np.float64, 2, elements=small), arrays(np.float64, 2, elements=small))
def test_control_odd_in_errors(q, q_dot):
    g = GainConfig()
    plus = tracking_errors(q, q_dot, AT_REST, g.alpha)
    minus = tracking_errors(-q, -q_dot, AT_REST, g.alpha)
    assert np.allclose(control_input(minus, AT_REST, ZERO_NETS, g),
                       -control_input(plus, AT_REST, ZERO_NETS, g), atol=1e-12)


def test_smoothed_sign_is_continuous():
    g = GainConfig(sgn_smoothing=50.0)
    tiny = tracking_errors(Z2, np.array([1e-9, -1e-9]), AT_REST, g.alpha)
    assert np.max(np.abs(control_input(tiny, AT_REST, ZERO_NETS, g))) < 1e-6


def test_nonfinite_outputs_rejected():
    err = tracking_errors(Z2, Z2, AT_REST, 3.8)
    with pytest.raises(FloatingPointError):
        control_input(err, AT_REST, DnnOutputs(np.full(4, np.nan), Z4, Z2, Z2), GainConfig())
    with pytest.raises(ValueError):
        control_input(err, AT_REST, DnnOutputs(Z2, Z4, Z2, Z2), GainConfig())


def test_gain_validation():
    GainConfig().validate()
    with pytest.raises(ValueError):
        GainConfig(k1=-1.0).validate()
    with pytest.raises(ValueError):
        GainConfig(xi=(0.4, 0.0)).validate()
    with pytest.raises(ValueError):
        GainConfig(proj_delta=1.5).validate()
