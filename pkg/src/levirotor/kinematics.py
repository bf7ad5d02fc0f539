"""Rigid-rotor kinematics in z-y'-z'' Euler angles.

The orientation of a rigid body is parametrized by Euler angles
Omega = (alpha, beta, gamma) in the z-y'-z'' convention: rotate by alpha
about the space z-axis, by beta about the new y-axis, by gamma about the
final z-axis.  The body frame is the orthonormal triad N_1, N_2, N_3
obtained by applying that rotation to the space axes, i.e. the columns of

    R(Omega) = R_z(alpha) @ R_y(beta) @ R_z(gamma).

The momenta conjugate to the Euler angles are projections of the angular
momentum vector J onto three (non-orthogonal) axes,

    p_alpha = J . e_z,   p_beta = J . e_xi,   p_gamma = J . N_3,

with e_xi = -sin(alpha) e_x + cos(alpha) e_y the node line.  The map
between (p_alpha, p_beta, p_gamma) and J degenerates on the gimbal set
sin(beta) = 0, where alpha and gamma rotate about the same axis; code
that needs J near that set should carry J (or the rotation matrix)
directly, which is what the integrators in this package do.  Euler
angles are derived output only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

GIMBAL_SIN_BETA_TOL = 1e-9


class GimbalLockError(ValueError):
    """Conjugate-momentum map requested too close to sin(beta) = 0."""


def body_axes(alpha: float, beta: float, gamma: float) -> np.ndarray:
    """Rotation matrix with columns N_1, N_2, N_3 (z-y'-z'' convention)."""
    ca, sa = math.cos(alpha), math.sin(alpha)
    cb, sb = math.cos(beta), math.sin(beta)
    cg, sg = math.cos(gamma), math.sin(gamma)
    return np.array(
        [
            [ca * cb * cg - sa * sg, -ca * cb * sg - sa * cg, ca * sb],
            [sa * cb * cg + ca * sg, -sa * cb * sg + ca * cg, sa * sb],
            [-sb * cg, sb * sg, cb],
        ]
    )


def euler_from_matrix(R: np.ndarray) -> tuple[float, float, float]:
    """Euler angles (alpha, beta, gamma) of a rotation matrix.

    beta lands in [0, pi]; alpha and gamma are wrapped to [0, 2*pi).  On
    the gimbal set (|sin beta| ~ 0) only alpha + gamma (beta ~ 0) or
    alpha - gamma (beta ~ pi) is defined; gamma is reported as 0 there.
    """
    sb = math.hypot(R[0, 2], R[1, 2])
    beta = math.atan2(sb, R[2, 2])
    if sb < GIMBAL_SIN_BETA_TOL:
        # R reduces to a rotation about e_z by alpha +/- gamma
        alpha = math.atan2(R[1, 0], R[0, 0])
        if R[2, 2] < 0.0:
            alpha = -alpha
        gamma = 0.0
    else:
        alpha = math.atan2(R[1, 2], R[0, 2])
        gamma = math.atan2(R[2, 1], -R[2, 0])
    return alpha % (2.0 * math.pi), beta, gamma % (2.0 * math.pi)


@dataclass(frozen=True)
class Orientation:
    """Euler angles plus the cached body-frame rotation matrix."""

    alpha: float
    beta: float
    gamma: float
    body_frame: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (0.0 <= self.beta <= math.pi):
            raise ValueError(f"beta must lie in [0, pi], got {self.beta}")
        object.__setattr__(self, "alpha", self.alpha % (2.0 * math.pi))
        object.__setattr__(self, "gamma", self.gamma % (2.0 * math.pi))
        object.__setattr__(
            self, "body_frame", body_axes(self.alpha, self.beta, self.gamma)
        )

    @classmethod
    def from_matrix(cls, R: np.ndarray) -> "Orientation":
        return cls(*euler_from_matrix(np.asarray(R, dtype=float)))

    def axis(self, i: int) -> np.ndarray:
        """Body axis N_i (i = 1, 2, 3) in the space frame."""
        return self.body_frame[:, i - 1].copy()


@dataclass(frozen=True)
class InertiaSpec:
    """Principal moments of inertia about the body axes N_1, N_2, N_3."""

    I1: float
    I2: float
    I3: float

    def __post_init__(self):
        triple = (self.I1, self.I2, self.I3)
        if any(I <= 0.0 for I in triple):
            raise ValueError(f"moments of inertia must be positive, got {triple}")
        # any rigid mass distribution satisfies the triangle inequalities
        if (
            self.I1 + self.I2 < self.I3
            or self.I2 + self.I3 < self.I1
            or self.I3 + self.I1 < self.I2
        ):
            raise ValueError(
                f"moments {triple} violate the rigid-body triangle inequalities"
            )

    def as_array(self) -> np.ndarray:
        return np.array([self.I1, self.I2, self.I3])


@dataclass(frozen=True)
class ConjugateMomenta:
    """Momenta conjugate to the z-y'-z'' Euler angles."""

    p_alpha: float
    p_beta: float
    p_gamma: float


def inertia_tensor(orientation: Orientation, inertia: InertiaSpec) -> np.ndarray:
    """Space-frame inertia tensor sum_i I_i N_i (x) N_i."""
    R = orientation.body_frame
    return (R * inertia.as_array()) @ R.T


def inverse_inertia_tensor(orientation: Orientation, inertia: InertiaSpec) -> np.ndarray:
    R = orientation.body_frame
    return (R / inertia.as_array()) @ R.T


def _node_line(alpha: float) -> np.ndarray:
    return np.array([-math.sin(alpha), math.cos(alpha), 0.0])


def angular_momentum_from_conjugate(
    orientation: Orientation, momenta: ConjugateMomenta
) -> np.ndarray:
    """Space-frame angular momentum J from Euler-angle momenta.

    Raises GimbalLockError when |sin(beta)| < 1e-9, where the map is
    singular.
    """
    sb = math.sin(orientation.beta)
    if abs(sb) < GIMBAL_SIN_BETA_TOL:
        raise GimbalLockError(
            f"conjugate-momentum map singular at sin(beta) = {sb:.3e}"
        )
    cb = math.cos(orientation.beta)
    cg = math.cos(orientation.gamma)
    sg = math.sin(orientation.gamma)
    cot_b = cb / sb
    # body-frame components of J
    j1 = -(cg / sb) * momenta.p_alpha + sg * momenta.p_beta + cot_b * cg * momenta.p_gamma
    j2 = (sg / sb) * momenta.p_alpha + cg * momenta.p_beta - cot_b * sg * momenta.p_gamma
    j3 = momenta.p_gamma
    return orientation.body_frame @ np.array([j1, j2, j3])


def conjugate_from_angular_momentum(
    orientation: Orientation, J: np.ndarray
) -> ConjugateMomenta:
    """Euler-angle momenta (J.e_z, J.e_xi, J.N_3) for space-frame J."""
    J = np.asarray(J, dtype=float)
    return ConjugateMomenta(
        p_alpha=float(J[2]),
        p_beta=float(J @ _node_line(orientation.alpha)),
        p_gamma=float(J @ orientation.axis(3)),
    )


def rotational_kinetic_energy(
    orientation: Orientation, inertia: InertiaSpec, J: np.ndarray
) -> float:
    """(1/2) J . I(Omega)^-1 J for space-frame angular momentum J."""
    J = np.asarray(J, dtype=float)
    j_body = orientation.body_frame.T @ J
    return float(0.5 * np.sum(j_body**2 / inertia.as_array()))


def angular_velocity(
    orientation: Orientation, inertia: InertiaSpec, J: np.ndarray
) -> np.ndarray:
    """omega = I(Omega)^-1 J in the space frame."""
    R = orientation.body_frame
    return R @ ((R.T @ np.asarray(J, dtype=float)) / inertia.as_array())


def orientation_rate(body_frame: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Time derivative of the body frame, dN_i/dt = omega x N_i.

    Returned as a 3x3 matrix (columns are the axis rates), i.e.
    skew(omega) @ body_frame.
    """
    wx, wy, wz = omega
    skew = np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])
    return skew @ body_frame


def orthonormalize(R: np.ndarray) -> np.ndarray:
    """Project a near-rotation matrix back onto SO(3) (modified Gram-Schmidt)."""
    R = np.array(R, dtype=float)
    c0 = R[:, 0] / np.linalg.norm(R[:, 0])
    c1 = R[:, 1] - (c0 @ R[:, 1]) * c0
    c1 /= np.linalg.norm(c1)
    c2 = np.cross(c0, c1)
    return np.column_stack([c0, c1, c2])
