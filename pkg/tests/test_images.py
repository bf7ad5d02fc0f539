"""Plate image interaction against the brute-force image-lattice sum."""

import numpy as np
import pytest

from levirotor.charges import PointChargeSet, multipoles_from_point_charges
from levirotor.constants import ELEMENTARY_CHARGE, EPSILON_0, ZETA_3
from levirotor.images import PlateCapacitor, image_force_torque, image_potential
from levirotor.kinematics import InertiaSpec, body_axes
from levirotor.particle import RigidParticle

from oracles import plate_image_energy, position_gradient, rotation_gradient

E = ELEMENTARY_CHARGE


def _charge_cluster():
    qs = np.array([0.4, 0.3, 0.2, 0.1]) * 1e3 * E
    pos = 1e-4 * np.array(
        [[0.3, -0.2, 0.6], [-0.5, 0.4, -0.3], [0.2, 0.7, 0.1], [-0.1, -0.5, -0.8]]
    )
    dist = multipoles_from_point_charges(PointChargeSet(charges=qs, positions=pos))
    part = RigidParticle(mass=1.0, inertia=InertiaSpec(1.0, 1.0, 1.0), multipoles=dist)
    return qs, pos, part


def test_capacitor_validation():
    with pytest.raises(ValueError):
        PlateCapacitor(z0=0.0)
    cap = PlateCapacitor(z0=2e-3)
    ref = ZETA_3 / (64.0 * np.pi * EPSILON_0 * (2e-3) ** 3)
    assert abs(cap.base_coefficient - ref) < 1e-12 * ref


def test_potential_differences_match_series():
    # the closed form drops configuration-independent self-terms (the
    # monopole capacitor energy and the dipole invariant |p|^2), so the
    # lattice sum is compared through differences between configurations
    qs, pos, part = _charge_cluster()
    cap = PlateCapacitor(z0=1.0)
    configs = [
        (np.array([0.2e-4, -0.4e-4, 0.7e-4]), np.eye(3)),
        (np.array([-0.5e-4, 0.1e-4, -0.3e-4]), body_axes(0.3, 1.1, -0.4)),
        (np.array([0.0, 0.0, 1.2e-4]), body_axes(-1.0, 0.6, 2.2)),
    ]
    closed = []
    series = []
    for r_cm, frame in configs:
        closed.append(image_potential(cap, part, r_cm, frame))
        series.append(plate_image_energy(qs, r_cm + pos @ frame.T, cap.z0, n_max=2000))
    diffs_closed = np.array([closed[i] - closed[j] for i in range(3) for j in range(i)])
    diffs_series = np.array([series[i] - series[j] for i in range(3) for j in range(i)])
    scale = np.abs(diffs_closed).max()
    assert np.abs(diffs_series - diffs_closed).max() / scale < 1e-5


def test_force_torque_are_gradients():
    _, _, part = _charge_cluster()
    cap = PlateCapacitor(z0=1.0)
    r = np.array([0.2e-4, -0.4e-4, 0.7e-4])
    frame = body_axes(0.3, 1.1, -0.4)
    F, N = image_force_torque(cap, part, r, frame)
    fd_F = -position_gradient(lambda x: image_potential(cap, part, x, frame), r, 1e-7)
    fd_N = -rotation_gradient(lambda R: image_potential(cap, part, r, R), frame, 1e-6)
    assert np.abs(F - fd_F).max() < 1e-8 * max(np.abs(F).max(), 1e-300)
    assert np.abs(N - fd_N).max() < 1e-8 * max(np.abs(N).max(), 1e-300)
    # only the z component of the force survives by symmetry
    assert F[0] == 0.0 and F[1] == 0.0


def test_attraction_toward_plates():
    # a displaced charge is pulled toward the nearer plate, never pushed back
    _, _, part = _charge_cluster()
    cap = PlateCapacitor(z0=1.0)
    for z in (0.3, -0.3):
        F, _ = image_force_torque(cap, part, np.array([0.0, 0.0, z]), np.eye(3))
        assert np.sign(F[2]) == np.sign(z)
    # and the interaction lowers the energy relative to the midplane
    V_mid = image_potential(cap, part, np.zeros(3), np.eye(3))
    V_off = image_potential(cap, part, np.array([0.0, 0.0, 0.3]), np.eye(3))
    assert V_off < V_mid
