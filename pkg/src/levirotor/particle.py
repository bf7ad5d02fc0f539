"""A rigid charged particle: mass, inertia and multipole moments."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charges import MultipoleDistribution, SymmetricParticleSpec
from .kinematics import InertiaSpec


@dataclass(frozen=True)
class RigidParticle:
    """Everything the dynamics needs to know about the particle."""

    mass: float
    inertia: InertiaSpec
    multipoles: MultipoleDistribution

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")

    @classmethod
    def from_symmetric(cls, spec: SymmetricParticleSpec, mass: float) -> "RigidParticle":
        """Assemble a cylindrically symmetric particle (I1 = I2 = spec.I)."""
        return cls(
            mass=mass,
            inertia=InertiaSpec(spec.I, spec.I, spec.I3),
            multipoles=spec.multipoles(),
        )

    @property
    def q(self) -> float:
        return self.multipoles.q

    def space_moments(self, body_frame: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        R = np.asarray(body_frame, dtype=float)
        return R @ self.multipoles.p_body, R @ self.multipoles.Q_body @ R.T
