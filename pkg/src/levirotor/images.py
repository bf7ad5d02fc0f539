"""Image-charge interaction with grounded capacitor plates.

A particle between two grounded plates at z = +/- z0 polarizes them; the
infinite image series for a small displaced multipole distribution sums
to closed forms involving the Apery constant zeta(3).  To leading order
in the displacement and particle size over z0,

    V_im = -zeta(3)/(64 pi eps0 z0^3) [ 7 q^2 z^2 + (5/2)(e_z.p)^2
                                       + 14 q z (e_z.p) + (3/2) q e_z.Q e_z ]

with z = e_z.R, and force and torque follow by translation and rotation
derivatives.  The attraction toward the plates softens the axial trap
and torques the dipole toward the plate normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import EPSILON_0, ZETA_3
from .particle import RigidParticle


@dataclass(frozen=True)
class PlateCapacitor:
    """Grounded plate pair at z = +/- z0."""

    z0: float

    def __post_init__(self):
        if self.z0 <= 0.0:
            raise ValueError("plate distance z0 must be positive")

    @property
    def base_coefficient(self) -> float:
        """zeta(3) / (64 pi eps0 z0^3), the prefactor of every image term."""
        return ZETA_3 / (64.0 * math.pi * EPSILON_0 * self.z0**3)


def _base_coefficient(cap: PlateCapacitor) -> float:
    return cap.base_coefficient


def image_potential(
    cap: PlateCapacitor,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> float:
    """Leading-order image interaction energy."""
    q = particle.q
    p, Q = particle.space_moments(body_frame)
    z = float(np.asarray(r, dtype=float)[2])
    pz = float(p[2])
    return -_base_coefficient(cap) * (
        7.0 * q**2 * z**2
        + 2.5 * pz**2
        + 14.0 * q * z * pz
        + 1.5 * q * float(Q[2, 2])
    )


def image_force_torque(
    cap: PlateCapacitor,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Image force (along e_z) and torque, gradients of image_potential."""
    c = _base_coefficient(cap)
    q = particle.q
    p, Q = particle.space_moments(body_frame)
    z = float(np.asarray(r, dtype=float)[2])
    pz = float(p[2])

    F = np.array([0.0, 0.0, 14.0 * c * q * (q * z + pz)])

    e_z = np.array([0.0, 0.0, 1.0])
    p_cross_ez = np.cross(p, e_z)
    N = (
        14.0 * c * q * z * p_cross_ez
        + 5.0 * c * pz * p_cross_ez
        + 3.0 * c * q * np.cross(Q @ e_z, e_z)
    )
    return F, N
