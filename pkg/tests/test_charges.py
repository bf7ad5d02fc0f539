"""Multipole conventions against point-charge and quadrature references."""

import math

import numpy as np
import pytest

from levirotor.charges import (
    MultipoleDistribution,
    PointChargeSet,
    SymmetricParticleSpec,
    induced_quadrupole,
    max_polarizability,
    multipoles_from_point_charges,
    space_frame_multipoles,
    spheroid_quadrupole,
)
from levirotor.constants import ELEMENTARY_CHARGE, EPSILON_0
from levirotor.kinematics import body_axes
from levirotor.trap import ring_trap

from oracles import spheroid_surface_moments

E = ELEMENTARY_CHARGE


def test_distribution_validation():
    with pytest.raises(ValueError):
        MultipoleDistribution(q=0.0, p_body=np.zeros(3), Q_body=np.array(
            [[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]))
    with pytest.raises(ValueError):
        MultipoleDistribution(q=0.0, p_body=np.zeros(3), Q_body=np.eye(3))


def test_symmetric_moments():
    d = MultipoleDistribution.symmetric(2.0, 3.0, 5.0)
    assert np.allclose(d.p_body, [0.0, 0.0, 3.0])
    assert np.allclose(d.Q_body, np.diag([-5.0, -5.0, 10.0]))
    spec = SymmetricParticleSpec(q=2.0, p3=3.0, Q3=5.0, I=1.0, I3=0.5)
    assert np.allclose(spec.multipoles().Q_body, d.Q_body)
    with pytest.raises(ValueError):
        SymmetricParticleSpec(q=1.0, p3=0.0, Q3=0.0, I=0.0, I3=1.0)


def test_point_charge_dipole_pair():
    # +e/-e split by d along x: pure dipole e*d, no net charge or quadrupole
    d = 3e-9
    pair = PointChargeSet(charges=[E, -E], positions=[[d / 2, 0, 0], [-d / 2, 0, 0]])
    m = multipoles_from_point_charges(pair)
    assert m.q == 0.0
    assert np.allclose(m.p_body, [E * d, 0.0, 0.0])
    assert np.abs(m.Q_body).max() < 1e-30


def test_point_charge_quadrupole_pair():
    # e at +/- d e3: Q_33 = 2 e (3 d^2 - d^2) = 4 e d^2
    d = 2e-9
    pair = PointChargeSet(charges=[E, E], positions=[[0, 0, d], [0, 0, -d]])
    m = multipoles_from_point_charges(pair)
    assert abs(m.q - 2.0 * E) < 1e-30
    assert np.abs(m.p_body).max() < 1e-40
    assert abs(m.Q_body[2, 2] - 4.0 * E * d**2) < 1e-12 * E * d**2
    assert abs(m.Q_body[0, 0] + 2.0 * E * d**2) < 1e-12 * E * d**2
    assert abs(np.trace(m.Q_body)) < 1e-12 * E * d**2


def test_rotation_consistency():
    # rotating the charges then reducing equals reducing then rotating
    qs = np.array([2.0, -1.0, 0.5, 1.5]) * E
    pos = 1e-7 * np.array(
        [[1, 0, 0], [0, 1, 0.5], [-0.5, 0.3, -1], [0.2, -0.7, 0.4]]
    )
    d0 = multipoles_from_point_charges(PointChargeSet(charges=qs, positions=pos))
    frame = body_axes(0.7, 0.9, -1.3)
    p_s, Q_s = space_frame_multipoles(d0, frame)
    d_rot = multipoles_from_point_charges(
        PointChargeSet(charges=qs, positions=pos @ frame.T)
    )
    assert np.abs(p_s - d_rot.p_body).max() < 1e-12 * np.abs(p_s).max()
    assert np.abs(Q_s - d_rot.Q_body).max() < 1e-12 * np.abs(Q_s).max()


@pytest.mark.parametrize(
    "a,r",
    [
        (2e-7, 1e-7),      # prolate
        (1e-7, 2e-7),      # oblate
        (1.5e-7, 1.4e-7),  # near sphere
    ],
)
def test_spheroid_quadrupole_vs_quadrature(a, r):
    q = 50.0 * E
    q_quad, Qzz_quad = spheroid_surface_moments(q, a, r)
    closed = spheroid_quadrupole(q, a, r)
    assert abs(q_quad - q) / q < 1e-3
    assert abs(closed.Q_body[2, 2] - 2.0 * q * (a**2 - r**2) / 3.0) < 1e-40
    assert abs(Qzz_quad - closed.Q_body[2, 2]) / abs(closed.Q_body[2, 2]) < 1e-3
    with pytest.raises(ValueError):
        spheroid_quadrupole(q, -a, r)


def test_polarizability_limits():
    # near-sphere limit 4 pi eps0 a^3
    a = 1.001e-7
    alpha = max_polarizability(a, 1e-7)
    sphere = 4.0 * math.pi * EPSILON_0 * a**3
    assert abs(alpha - sphere) / sphere < 1e-2
    # alpha scales with volume: doubling all lengths multiplies by 8
    ratio = max_polarizability(4e-7, 2e-7) / max_polarizability(2e-7, 1e-7)
    assert abs(ratio - 8.0) < 1e-12
    with pytest.raises(ValueError):
        max_polarizability(1e-7, 2e-7)


def test_induced_quadrupole_ring_geometry():
    trap = ring_trap(1e-3, 0.0, 1.0, 2.0 * math.pi * 1e6)
    Qi = induced_quadrupole(1.0, 1e-6, trap.A, 1e-3)
    c = 4.0 * math.pi * EPSILON_0 * 1e-24
    assert np.abs(np.diag(Qi) - np.array([-c, -c, 2.0 * c])).max() < 1e-12 * c
    assert abs(np.trace(Qi)) < 1e-12 * c
