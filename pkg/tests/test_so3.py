import numpy as np
import pytest

from rigidframes import (
    AngleAtPi,
    AntipodalPair,
    exp_map,
    hat,
    lerp,
    log_map,
    matrix_from_quat,
    quat_from_matrix,
    slerp,
    slerp_derivative,
    vee,
)
from rigidframes.so3 import is_rotation_matrix, random_quaternion


def test_hat_zero():
    assert np.array_equal(hat([0.0, 0.0, 0.0]), np.zeros((3, 3)))


def test_hat_explicit():
    expected = np.array([[0, -3, 2], [3, 0, -1], [-2, 1, 0]], dtype=float)
    assert np.array_equal(hat([1.0, 2.0, 3.0]), expected)


def test_hat_cross_product_oracle(rng):
    for _ in range(100):
        v = rng.standard_normal(3)
        p = rng.standard_normal(3)
        assert np.allclose(hat(v) @ p, np.cross(v, p), atol=1e-12)


def test_vee_hat_roundtrip_exact(rng):
    for _ in range(50):
        v = rng.standard_normal(3)
        assert np.array_equal(vee(hat(v)), v)
        assert np.array_equal(hat(v).T, -hat(v))


def test_exp_zero_is_identity():
    assert np.array_equal(exp_map([0.0, 0.0, 0.0]), np.eye(3))


def test_exp_quarter_turn_about_z():
    expected = np.array([[0, -1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    assert np.allclose(exp_map([0.0, 0.0, np.pi / 2]), expected, atol=1e-12)


def test_exp_matches_truncated_matrix_series(rng):
    # oracle: exp(hat(w)) = sum_{k<=30} hat(w)^k / k!
    for _ in range(50):
        w = rng.standard_normal(3)
        w = w / np.linalg.norm(w) * rng.uniform(0.01, np.pi - 0.01)
        k = hat(w)
        term = np.eye(3)
        series = np.eye(3)
        for n in range(1, 31):
            term = term @ k / n
            series = series + term
        assert np.abs(exp_map(w) - series).max() < 1e-10


def test_log_identity():
    assert np.allclose(log_map(np.eye(3)), np.zeros(3), atol=1e-15)


@pytest.mark.parametrize("norm", [0.1, 1.0, 3.0])
def test_log_exp_roundtrip(norm, rng):
    axis = rng.standard_normal(3)
    w = axis / np.linalg.norm(axis) * norm
    assert np.linalg.norm(log_map(exp_map(w)) - w) < 1e-9


def test_log_angle_matches_trace_oracle(rng):
    for _ in range(100):
        w = rng.standard_normal(3)
        w = w / np.linalg.norm(w) * rng.uniform(0.01, np.pi - 0.05)
        r = exp_map(w)
        theta = np.linalg.norm(log_map(r))
        oracle = np.arccos(np.clip((np.trace(r) - 1.0) / 2.0, -1.0, 1.0))
        assert abs(theta - oracle) < 1e-9


def test_log_rejects_near_pi():
    r = exp_map(np.array([0.0, 0.0, np.pi - 1e-8]))
    with pytest.raises(AngleAtPi):
        log_map(r)


def test_exp_log_roundtrip_property(rng):
    for _ in range(1000):
        w = rng.standard_normal(3)
        w = w / np.linalg.norm(w) * rng.uniform(1e-6, np.pi - 0.01)
        assert np.linalg.norm(log_map(exp_map(w)) - w) < 1e-8


def test_quat_identity():
    assert np.allclose(quat_from_matrix(np.eye(3)), [1.0, 0.0, 0.0, 0.0], atol=1e-15)


def test_quat_quarter_turn_about_z():
    q = quat_from_matrix(exp_map([0.0, 0.0, np.pi / 2]))
    expected = [np.cos(np.pi / 4), 0.0, 0.0, np.sin(np.pi / 4)]
    assert np.allclose(q, expected, atol=1e-12)


def test_quat_matrix_roundtrip_and_hemisphere(rng):
    for _ in range(200):
        q = random_quaternion(rng)
        r = matrix_from_quat(q)
        q2 = quat_from_matrix(r)
        assert q2[0] >= 0.0
        assert np.abs(matrix_from_quat(q2) - r).max() < 1e-9


def test_quat_double_cover(rng):
    for _ in range(100):
        q = random_quaternion(rng)
        assert np.array_equal(matrix_from_quat(q), matrix_from_quat(-q))


def test_slerp_constant_path(rng):
    q = random_quaternion(rng)
    for tau in (0.0, 0.3, 1.0):
        assert np.allclose(slerp(q, q, tau), q, atol=1e-12)


def test_slerp_bisects_quarter_turn():
    q0 = np.array([1.0, 0.0, 0.0, 0.0])
    q1 = quat_from_matrix(exp_map([0.0, 0.0, np.pi / 2]))
    mid = slerp(q0, q1, 0.5)
    expected = quat_from_matrix(exp_map([0.0, 0.0, np.pi / 4]))
    assert np.allclose(mid, expected, atol=1e-12)


def test_slerp_endpoints(rng):
    for _ in range(50):
        q0 = random_quaternion(rng)
        q1 = random_quaternion(rng)
        if q0 @ q1 < 0:
            q1 = -q1
        assert np.allclose(slerp(q0, q1, 0.0), q0, atol=1e-15)
        assert np.allclose(slerp(q0, q1, 1.0), q1, atol=1e-15)


def test_slerp_angle_proportionality_oracle(rng):
    # oracle: geodesic angle from q0 to slerp(q0, q1, tau) equals tau * phi
    for _ in range(100):
        q0 = random_quaternion(rng)
        q1 = random_quaternion(rng)
        d = abs(q0 @ q1)
        if d < 1e-3 or d > 1.0 - 1e-6:
            continue
        phi = np.arccos(d)
        tau = rng.uniform(0.0, 1.0)
        out = slerp(q0, q1, tau)
        angle = np.arccos(np.clip(abs(q0 @ out), -1.0, 1.0))
        assert abs(angle - tau * phi) < 1e-9


def test_slerp_unit_output(rng):
    for _ in range(100):
        out = slerp(random_quaternion(rng), random_quaternion(rng), rng.uniform(0, 1))
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12


def test_slerp_antipodal_raises():
    q0 = np.array([1.0, 0.0, 0.0, 0.0])
    q1 = np.array([0.0, 1.0, 0.0, 0.0])
    with pytest.raises(AntipodalPair):
        slerp(q0, q1, 0.5)
    with pytest.raises(AntipodalPair):
        slerp_derivative(q0, q1, 0.5)


def test_slerp_hemisphere_fix_matches_negated_input(rng):
    for _ in range(50):
        q0 = random_quaternion(rng)
        q1 = random_quaternion(rng)
        if abs(q0 @ q1) < 1e-3:
            continue
        tau = rng.uniform(0, 1)
        m_a = matrix_from_quat(slerp(q0, q1, tau))
        m_b = matrix_from_quat(slerp(q0, -q1, tau))
        assert np.abs(m_a - m_b).max() < 1e-9


def test_slerp_derivative_zero_for_equal_endpoints(rng):
    q = random_quaternion(rng)
    assert np.allclose(slerp_derivative(q, q, 0.3), np.zeros(4), atol=1e-12)


def test_slerp_derivative_matches_finite_difference(rng):
    h = 1e-5
    for _ in range(200):
        q0 = random_quaternion(rng)
        q1 = random_quaternion(rng)
        if abs(q0 @ q1) < 1e-3:
            continue
        tau = 0.3
        d = slerp_derivative(q0, q1, tau)
        fd = (slerp(q0, q1, tau + h) - slerp(q0, q1, tau - h)) / (2 * h)
        assert np.linalg.norm(d - fd) / np.linalg.norm(d) < 1e-6


def test_slerp_derivative_norm_is_arc_and_tau_invariant(rng):
    for _ in range(100):
        q0 = random_quaternion(rng)
        q1 = random_quaternion(rng)
        d = abs(q0 @ q1)
        if d < 1e-3 or d > 1.0 - 1e-6:
            continue
        phi = np.arccos(d)
        norms = [np.linalg.norm(slerp_derivative(q0, q1, t)) for t in np.linspace(0.0, 1.0, 9)]
        assert np.allclose(norms, phi, atol=1e-9)
        assert np.var(norms) < 1e-16


def test_lerp_endpoints_and_midpoint():
    t0 = np.array([0.0, 0.0, 0.0])
    t1 = np.array([2.0, 4.0, 6.0])
    assert np.array_equal(lerp(t0, t1, 0.0), t0)
    assert np.array_equal(lerp(t0, t1, 1.0), t1)
    assert np.array_equal(lerp(t0, t1, 0.5), [1.0, 2.0, 3.0])


def test_lerp_derivative_is_tau_independent(rng):
    t0 = rng.standard_normal(3)
    t1 = rng.standard_normal(3)
    h = 1e-6
    for tau in (0.2, 0.5, 0.8):
        fd = (lerp(t0, t1, tau + h) - lerp(t0, t1, tau - h)) / (2 * h)
        assert np.allclose(fd, t1 - t0, atol=1e-9)


def test_exp_produces_valid_rotations(rng):
    for _ in range(100):
        assert is_rotation_matrix(exp_map(rng.standard_normal(3)), tol=1e-9)
