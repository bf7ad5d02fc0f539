"""Euler-angle kinematics: round trips, conjugate maps, inertia algebra."""

import math

import numpy as np
import pytest

from levirotor.kinematics import (
    ConjugateMomenta,
    GimbalLockError,
    InertiaSpec,
    Orientation,
    angular_momentum_from_conjugate,
    angular_velocity,
    body_axes,
    conjugate_from_angular_momentum,
    euler_from_matrix,
    inertia_tensor,
    inverse_inertia_tensor,
    orientation_rate,
    orthonormalize,
    rotational_kinetic_energy,
)

from oracles import rot

TWO_PI = 2.0 * math.pi


def test_body_axes_orthonormal():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, g = rng.uniform(0.0, TWO_PI, size=2)
        b = rng.uniform(0.0, math.pi)
        R = body_axes(a, b, g)
        assert np.abs(R @ R.T - np.eye(3)).max() < 1e-12
        assert abs(np.linalg.det(R) - 1.0) < 1e-12


def test_body_axes_composition():
    # R(alpha, beta, gamma) = R_z(alpha) R_y(beta) R_z(gamma)
    a, b, g = 0.7, 1.3, -0.4
    ez = np.array([0.0, 0.0, 1.0])
    ey = np.array([0.0, 1.0, 0.0])
    R_ref = rot(ez, a) @ rot(ey, b) @ rot(ez, g)
    assert np.abs(body_axes(a, b, g) - R_ref).max() < 1e-14


def test_euler_round_trip():
    rng = np.random.default_rng(1)
    worst_ang = worst_mat = 0.0
    for _ in range(300):
        a, g = rng.uniform(0.0, TWO_PI, size=2)
        b = rng.uniform(1e-3, math.pi - 1e-3)
        R = body_axes(a, b, g)
        a2, b2, g2 = euler_from_matrix(R)
        worst_ang = max(
            worst_ang,
            abs(math.remainder(a - a2, TWO_PI)),
            abs(b - b2),
            abs(math.remainder(g - g2, TWO_PI)),
        )
        worst_mat = max(worst_mat, np.abs(body_axes(a2, b2, g2) - R).max())
    assert worst_ang < 1e-10
    assert worst_mat < 1e-10


def test_euler_gimbal_set():
    # at beta = 0 only alpha + gamma is defined; gamma is reported as 0
    a, b, g = euler_from_matrix(body_axes(0.4, 0.0, 0.3))
    assert g == 0.0
    assert abs(math.remainder(a - 0.7, TWO_PI)) < 1e-12
    assert abs(b) < 1e-9
    # at beta = pi the defined combination is alpha - gamma
    a, b, g = euler_from_matrix(body_axes(1.1, math.pi, 0.3))
    assert g == 0.0
    assert abs(b - math.pi) < 1e-9
    R = body_axes(a, b, g)
    assert np.abs(R - body_axes(1.1, math.pi, 0.3)).max() < 1e-9


def test_orientation_validation_and_axes():
    with pytest.raises(ValueError):
        Orientation(0.0, -0.1, 0.0)
    with pytest.raises(ValueError):
        Orientation(0.0, 3.5, 0.0)
    o = Orientation(0.3, 1.1, -0.2)
    # alpha, gamma wrapped into [0, 2 pi)
    assert 0.0 <= o.gamma < TWO_PI
    for i in (1, 2, 3):
        assert np.allclose(o.axis(i), o.body_frame[:, i - 1])
    o2 = Orientation.from_matrix(o.body_frame)
    assert np.abs(o2.body_frame - o.body_frame).max() < 1e-12


def test_inertia_spec_validation():
    with pytest.raises(ValueError):
        InertiaSpec(1.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        InertiaSpec(-1.0, 1.0, 1.0)
    # flat disc saturates the triangle inequality, a 3x violation fails
    InertiaSpec(1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        InertiaSpec(1.0, 1.0, 3.0)


def test_inertia_tensor_algebra():
    spec = InertiaSpec(2.0, 3.0, 4.0)
    o = Orientation(0.5, 0.9, 1.7)
    I = inertia_tensor(o, spec)
    I_inv = inverse_inertia_tensor(o, spec)
    assert np.abs(I @ I_inv - np.eye(3)).max() < 1e-12
    # eigenvalues are the principal moments, eigenvectors the body axes
    vals = np.sort(np.linalg.eigvalsh(I))
    assert np.abs(vals - np.array([2.0, 3.0, 4.0])).max() < 1e-12
    for i, Ii in enumerate((2.0, 3.0, 4.0)):
        n = o.axis(i + 1)
        assert np.abs(I @ n - Ii * n).max() < 1e-12


def test_conjugate_momentum_round_trip():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(300):
        o = Orientation(
            rng.uniform(0.0, TWO_PI),
            rng.uniform(1e-3, math.pi - 1e-3),
            rng.uniform(0.0, TWO_PI),
        )
        J = rng.normal(size=3) * 1e-30
        pm = conjugate_from_angular_momentum(o, J)
        J2 = angular_momentum_from_conjugate(o, pm)
        worst = max(worst, np.abs(J2 - J).max() / np.linalg.norm(J))
    assert worst < 1e-12


def test_conjugate_projections():
    o = Orientation(0.8, 1.2, 2.1)
    J = np.array([1.0, -2.0, 3.0])
    pm = conjugate_from_angular_momentum(o, J)
    node = np.array([-math.sin(o.alpha), math.cos(o.alpha), 0.0])
    assert pm.p_alpha == J[2]
    assert abs(pm.p_beta - J @ node) < 1e-15
    assert abs(pm.p_gamma - J @ o.axis(3)) < 1e-15


def test_gimbal_lock_raises():
    o = Orientation(0.3, 1e-10, 0.5)
    with pytest.raises(GimbalLockError):
        angular_momentum_from_conjugate(o, ConjugateMomenta(1.0, 0.0, 0.5))


def test_kinetic_energy_identity():
    # (1/2) J . I^-1 J equals (1/2) omega . I omega
    spec = InertiaSpec(2e-38, 3e-38, 4e-38)
    o = Orientation(1.0, 0.7, -0.3)
    J = np.array([2.0, -1.0, 0.5]) * 1e-34
    E = rotational_kinetic_energy(o, spec, J)
    w = angular_velocity(o, spec, J)
    I = inertia_tensor(o, spec)
    assert abs(E - 0.5 * w @ (I @ w)) < 1e-12 * abs(E)
    assert abs(E - 0.5 * J @ (inverse_inertia_tensor(o, spec) @ J)) < 1e-12 * abs(E)


def test_orientation_rate_matches_finite_rotation():
    frame = body_axes(0.4, 1.0, -0.7)
    omega = np.array([0.3, -1.1, 0.6])
    rate = orientation_rate(frame, omega)
    h = 1e-7
    w_norm = np.linalg.norm(omega)
    axis = omega / w_norm
    fd = (rot(axis, w_norm * h) @ frame - rot(axis, -w_norm * h) @ frame) / (2.0 * h)
    assert np.abs(rate - fd).max() < 1e-6 * w_norm


def test_orthonormalize_projects_back():
    rng = np.random.default_rng(3)
    R = body_axes(0.2, 0.9, 1.4)
    R_pert = R + 1e-6 * rng.normal(size=(3, 3))
    R_fix = orthonormalize(R_pert)
    assert np.abs(R_fix @ R_fix.T - np.eye(3)).max() < 1e-14
    assert abs(np.linalg.det(R_fix) - 1.0) < 1e-14
    assert np.abs(R_fix - R).max() < 1e-5
