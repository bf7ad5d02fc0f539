"""Charge distributions on the rotor: multipole moments and conventions.

A rigid body-fixed charge distribution rho0(r') enters the dynamics only
through its monopole q, dipole p and traceless quadrupole moment

    Q_ij = sum_k q_k (3 r_ki r_kj - r_k^2 delta_ij),

all defined in the body frame and rotated to the space frame as p -> R p,
Q -> R Q R^T.  Cylindrically symmetric particles are described by the
scalars (p3, Q3) with p = p3 m and Q = Q3 (3 m (x) m - 1), m the symmetry
axis; note Q3 = Q_33/2 in terms of the Cartesian component along m.

All quantities are SI.  Induced moments (the polarizability of a metallic
particle) are provided for diagnostics only and are not added to the
forces anywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constants import EPSILON_0

_SYM_TOL = 1e-10


@dataclass(frozen=True)
class MultipoleDistribution:
    """Monopole, body-frame dipole and body-frame traceless quadrupole."""

    q: float
    p_body: np.ndarray
    Q_body: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.p_body, dtype=float).reshape(3)
        Q = np.asarray(self.Q_body, dtype=float).reshape(3, 3)
        scale = max(np.abs(Q).max(), 1.0)
        if np.abs(Q - Q.T).max() > _SYM_TOL * scale:
            raise ValueError("quadrupole moment must be symmetric")
        if abs(np.trace(Q)) > 1e-8 * scale:
            raise ValueError(f"quadrupole moment must be traceless, trace={np.trace(Q):.3e}")
        object.__setattr__(self, "p_body", p)
        object.__setattr__(self, "Q_body", Q)

    @classmethod
    def symmetric(cls, q: float, p3: float, Q3: float) -> "MultipoleDistribution":
        """Cylindrically symmetric moments about the body axis N_3."""
        m = np.array([0.0, 0.0, 1.0])
        return cls(q=q, p_body=p3 * m, Q_body=Q3 * (3.0 * np.outer(m, m) - np.eye(3)))


@dataclass(frozen=True)
class PointChargeSet:
    """Point charges q_k at body-frame positions r_k (rows of positions)."""

    charges: np.ndarray
    positions: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.charges, dtype=float))
        r = np.asarray(self.positions, dtype=float).reshape(len(c), 3)
        object.__setattr__(self, "charges", c)
        object.__setattr__(self, "positions", r)


@dataclass(frozen=True)
class SymmetricParticleSpec:
    """Cylindrically symmetric particle: scalar moments and inertia.

    I is the transverse moment of inertia (about any axis perpendicular
    to the symmetry axis), I3 the moment about the symmetry axis.
    """

    q: float
    p3: float
    Q3: float
    I: float
    I3: float

    def __post_init__(self):
        if self.I <= 0.0 or self.I3 <= 0.0:
            raise ValueError("moments of inertia must be positive")

    def multipoles(self) -> MultipoleDistribution:
        return MultipoleDistribution.symmetric(self.q, self.p3, self.Q3)


def multipoles_from_point_charges(charges: PointChargeSet) -> MultipoleDistribution:
    """Exact multipole moments of a finite set of point charges."""
    q_k = charges.charges
    r_k = charges.positions
    q = float(q_k.sum())
    p = q_k @ r_k
    rsq = np.sum(r_k**2, axis=1)
    Q = 3.0 * (r_k.T * q_k) @ r_k - np.diag([float(q_k @ rsq)] * 3)
    return MultipoleDistribution(q=q, p_body=p, Q_body=Q)


def space_frame_multipoles(
    dist: MultipoleDistribution, body_frame: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Dipole and quadrupole rotated into the space frame."""
    R = np.asarray(body_frame, dtype=float)
    return R @ dist.p_body, R @ dist.Q_body @ R.T


def spheroid_quadrupole(q: float, a: float, r: float) -> MultipoleDistribution:
    """Moments of a conducting spheroid (semi-axes a, r, r), charge q.

    The equilibrium surface charge of a conductor gives zero dipole and
    Q3 = q d^2 / 3 with d^2 = a^2 - r^2 (negative for an oblate shape).
    """
    if a <= 0.0 or r <= 0.0:
        raise ValueError("semi-axes must be positive")
    return MultipoleDistribution.symmetric(q, 0.0, q * (a**2 - r**2) / 3.0)


def max_polarizability(a: float, r: float) -> float:
    """Largest-axis polarizability of a conducting prolate spheroid."""
    if not a > r > 0.0:
        raise ValueError("prolate spheroid requires a > r > 0")
    d = np.sqrt(a**2 - r**2)
    return (4.0 * np.pi * EPSILON_0 * d**3 / 3.0) / (np.log((a + d) / r) - d / a)


def induced_quadrupole(
    voltage: float, a: float, A: np.ndarray, ell0: float
) -> np.ndarray:
    """Quadrupole induced on a conducting sphere by the quadrupole field.

    For a sphere of radius a centred in a field of geometry tensor A and
    instantaneous voltage U the induced moment is
    -4 pi eps0 U a^5 A / ell0^2.  Diagnostic only; small against the
    permanent moments for the particles treated here.
    """
    return -4.0 * np.pi * EPSILON_0 * voltage * (a**5) * np.asarray(A, dtype=float) / ell0**2
