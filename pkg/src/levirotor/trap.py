"""Quadrupole (Paul) trap fields, forces and the effective potential.

The trap electric field is the time-dependent quadrupole

    E(r, t) = -(U(t) / ell0^2) A r,      U(t) = U_dc + U_ac cos(omega_ac t),

with A a constant, symmetric, traceless geometry tensor and ell0 the
characteristic electrode distance.  Two standard geometries are provided:
the ring trap A = 1 - 3 e_z (x) e_z and the linear trap
A = e_y (x) e_y - e_x (x) e_x, the latter optionally completed by static
endcap electrodes that contribute their own quadrupole
E_ec(r) = 2 (k_ec U_ec / ell_ec^2) A_ec r, plus an optional homogeneous
field E_hom (gravity compensation).

When the drive frequency dominates all secular frequencies, averaging
over the drive period leaves the macromotion moving in the effective
(pseudo)potential

    V_eff(r, Omega) = (U_dc/ell0^2) [ q/2 r.Ar + p.Ar + tr(AQ)/6 ]
                    + U_ac^2/(4 m w^2 ell0^4) (q r + p) . A^2 (q r + p)
                    + U_ac^2/(4 w^2 ell0^4)   W . I(Omega)^{-1} W
                    + static endcap and homogeneous-field terms,

    W(r, Omega)    = p x (A r) - (1/3) sum_i a_i  a^_i x (Q a^_i),

with p, Q the space-frame dipole and quadrupole, a_i/a^_i the eigenpairs
of A.  W is the torque direction the AC field exerts; the micromotion
ride along the drive has amplitudes

    eps0  = U_ac/(m w^2 ell0^2) A (q r + p)          (position)
    delta0= U_ac/(w^2 ell0^2)   I(Omega)^{-1} W      (orientation),

and the oscillating parts of the canonical momenta are
Delta P_t = (U_ac sin(wt)/(w ell0^2)) A (q r + p) and
Delta J_t = (U_ac sin(wt)/(w ell0^2)) W.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import InertiaSpec, Orientation, orthonormalize
from .charges import SymmetricParticleSpec
from .particle import RigidParticle
from ._tensorops import quadrupole_energy_sum, torque_direction

_MATHIEU_WARN_THRESHOLD = 0.3


def _check_geometry_tensor(A: np.ndarray, name: str) -> np.ndarray:
    A = np.asarray(A, dtype=float).reshape(3, 3)
    scale = max(np.abs(A).max(), 1.0)
    if np.abs(A - A.T).max() > 1e-12 * scale:
        raise ValueError(f"{name} must be symmetric")
    if abs(np.trace(A)) > 1e-12 * scale:
        raise ValueError(f"{name} must be traceless (Laplace equation)")
    return A


@dataclass(frozen=True)
class TrapGeometry:
    """Trap drive, geometry tensor, optional endcaps and homogeneous field."""

    A: np.ndarray
    ell0: float
    U_dc: float
    U_ac: float
    omega_ac: float
    # static endcap quadrupole (linear traps); all four set together
    A_ec: np.ndarray | None = None
    ell_ec: float = 0.0
    U_ec: float = 0.0
    k_ec: float = 0.0
    # homogeneous bias field
    E_hom: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "A", _check_geometry_tensor(self.A, "A"))
        if self.ell0 <= 0.0:
            raise ValueError("ell0 must be positive")
        if self.omega_ac <= 0.0:
            raise ValueError("omega_ac must be positive")
        if self.A_ec is not None:
            object.__setattr__(self, "A_ec", _check_geometry_tensor(self.A_ec, "A_ec"))
            if self.ell_ec <= 0.0:
                raise ValueError("ell_ec must be positive")
            if not 0.0 < self.k_ec <= 1.0:
                raise ValueError("geometric efficiency k_ec must lie in (0, 1]")
        if self.E_hom is not None:
            object.__setattr__(
                self, "E_hom", np.asarray(self.E_hom, dtype=float).reshape(3)
            )

    @property
    def has_endcap(self) -> bool:
        return self.A_ec is not None

    @property
    def endcap_coefficient(self) -> float:
        """k_ec U_ec / ell_ec^2, the endcap potential scale."""
        if not self.has_endcap:
            return 0.0
        return self.k_ec * self.U_ec / self.ell_ec**2

    def voltage(self, t: float) -> float:
        return self.U_dc + self.U_ac * math.cos(self.omega_ac * t)


def ring_trap(
    ell0: float,
    U_dc: float,
    U_ac: float,
    omega_ac: float,
    E_hom: np.ndarray | None = None,
) -> TrapGeometry:
    """Ring trap, A = 1 - 3 e_z (x) e_z."""
    A = np.diag([1.0, 1.0, -2.0])
    return TrapGeometry(A=A, ell0=ell0, U_dc=U_dc, U_ac=U_ac, omega_ac=omega_ac, E_hom=E_hom)


def linear_trap(
    ell0: float,
    U_ac: float,
    omega_ac: float,
    U_dc: float = 0.0,
    *,
    ell_ec: float = 0.0,
    U_ec: float = 0.0,
    k_ec: float = 0.0,
    E_hom: np.ndarray | None = None,
) -> TrapGeometry:
    """Linear trap, A = e_y (x) e_y - e_x (x) e_x, with optional endcaps."""
    A = np.diag([-1.0, 1.0, 0.0])
    A_ec = np.diag([1.0, 1.0, -2.0]) if ell_ec > 0.0 else None
    return TrapGeometry(
        A=A,
        ell0=ell0,
        U_dc=U_dc,
        U_ac=U_ac,
        omega_ac=omega_ac,
        A_ec=A_ec,
        ell_ec=ell_ec,
        U_ec=U_ec,
        k_ec=k_ec,
        E_hom=E_hom,
    )


def trap_field(trap: TrapGeometry, r: np.ndarray, t: float) -> np.ndarray:
    """Total electric field at position r and time t."""
    r = np.asarray(r, dtype=float)
    E = -(trap.voltage(t) / trap.ell0**2) * (trap.A @ r)
    if trap.has_endcap:
        E = E + 2.0 * trap.endcap_coefficient * (trap.A_ec @ r)
    if trap.E_hom is not None:
        E = E + trap.E_hom
    return E


def trap_force_torque(
    trap: TrapGeometry,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
    t: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous force and torque of all static and driven trap fields."""
    r = np.asarray(r, dtype=float)
    q = particle.q
    p, Q = particle.space_moments(body_frame)
    cU = trap.voltage(t) / trap.ell0**2
    F = -cU * (q * (trap.A @ r) + trap.A @ p)
    N = -cU * torque_direction(trap.A, p, Q, r)
    if trap.has_endcap:
        c_ec = trap.endcap_coefficient
        F = F + 2.0 * c_ec * (q * (trap.A_ec @ r) + trap.A_ec @ p)
        N = N + 2.0 * c_ec * torque_direction(trap.A_ec, p, Q, r)
    if trap.E_hom is not None:
        F = F + q * trap.E_hom
        N = N + np.cross(p, trap.E_hom)
    return F, N


def micromotion_amplitudes(
    trap: TrapGeometry,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Position and orientation micromotion amplitudes (eps0, delta0)."""
    r = np.asarray(r, dtype=float)
    p, Q = particle.space_moments(body_frame)
    w2l2 = trap.omega_ac**2 * trap.ell0**2
    eps0 = trap.U_ac / (particle.mass * w2l2) * (trap.A @ (particle.q * r + p))
    W = torque_direction(trap.A, p, Q, r)
    R = np.asarray(body_frame, dtype=float)
    inv_inertia = (R / particle.inertia.as_array()) @ R.T
    delta0 = trap.U_ac / w2l2 * (inv_inertia @ W)
    return eps0, delta0


def momentum_micromotion_correction(
    trap: TrapGeometry,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
    t: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Oscillating momentum shifts (Delta P_t, Delta J_t) at time t.

    The exact canonical momenta ride the drive as P = m rdot - Delta P_t
    and J = I omega - Delta J_t; equilibrium phase-space densities are
    functions of P + Delta P_t and J + Delta J_t.
    """
    r = np.asarray(r, dtype=float)
    p, Q = particle.space_moments(body_frame)
    c = trap.U_ac * math.sin(trap.omega_ac * t) / (trap.omega_ac * trap.ell0**2)
    dP = c * (trap.A @ (particle.q * r + p))
    dJ = c * torque_direction(trap.A, p, Q, r)
    return dP, dJ


@dataclass(frozen=True)
class MathieuReport:
    """Dimensionless drive-strength parameters and validity warnings."""

    charge: float
    dipole_force: float
    quadrupole_torque: float
    dipole_torque: float
    warnings: list[str] = field(default_factory=list)

    def as_array(self) -> np.ndarray:
        return np.array(
            [self.charge, self.dipole_force, self.quadrupole_torque, self.dipole_torque]
        )


def mathieu_parameters(
    trap: TrapGeometry, particle: RigidParticle, ell_cm: float
) -> MathieuReport:
    """Smallness parameters of the macro/micromotion separation.

    ell_cm is the characteristic centre-of-mass excursion of the
    trajectory under study.  All four numbers must stay well below one
    for the effective potential to be trustworthy; a warning is recorded
    for any value above 0.3.
    """
    if ell_cm <= 0.0:
        raise ValueError("ell_cm must be positive")
    w2l2 = particle.mass * trap.omega_ac**2 * trap.ell0**2
    p_norm = float(np.linalg.norm(particle.multipoles.p_body))
    Q_max = float(np.abs(particle.multipoles.Q_body).max())
    I_min = min(particle.inertia.as_array())
    values = (
        trap.U_ac * abs(particle.q) / w2l2,
        trap.U_ac * p_norm / (w2l2 * ell_cm),
        trap.U_ac * Q_max / (I_min * trap.omega_ac**2 * trap.ell0**2),
        trap.U_ac * p_norm * ell_cm / (I_min * trap.omega_ac**2 * trap.ell0**2),
    )
    names = ("charge", "dipole force", "quadrupole torque", "dipole torque")
    warnings = [
        f"{n} parameter {v:.3g} exceeds {_MATHIEU_WARN_THRESHOLD}"
        for n, v in zip(names, values)
        if v > _MATHIEU_WARN_THRESHOLD
    ]
    return MathieuReport(*values, warnings=warnings)


def _endcap_potential(trap: TrapGeometry, q: float, p: np.ndarray, Q: np.ndarray, r: np.ndarray) -> float:
    c_ec = trap.endcap_coefficient
    return -c_ec * (
        q * float(r @ (trap.A_ec @ r))
        + 2.0 * float(p @ (trap.A_ec @ r))
        + 2.0 * quadrupole_energy_sum(trap.A_ec, Q)
    )


def instantaneous_potential(
    trap: TrapGeometry,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
    t: float,
) -> float:
    """Potential energy of the particle in the trap fields at time t.

    Minus its gradients with respect to position and rotation are exactly
    trap_force_torque.
    """
    r = np.asarray(r, dtype=float)
    q = particle.q
    p, Q = particle.space_moments(body_frame)
    cU = trap.voltage(t) / trap.ell0**2
    V = cU * (
        0.5 * q * float(r @ (trap.A @ r))
        + float(p @ (trap.A @ r))
        + quadrupole_energy_sum(trap.A, Q)
    )
    if trap.has_endcap:
        V += _endcap_potential(trap, q, p, Q, r)
    if trap.E_hom is not None:
        V -= float(trap.E_hom @ (q * r + p))
    return V


def effective_potential(
    trap: TrapGeometry,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> float:
    """Drive-averaged potential governing the macromotion."""
    r = np.asarray(r, dtype=float)
    q = particle.q
    p, Q = particle.space_moments(body_frame)
    w2l4 = trap.omega_ac**2 * trap.ell0**4

    V = (trap.U_dc / trap.ell0**2) * (
        0.5 * q * float(r @ (trap.A @ r))
        + float(p @ (trap.A @ r))
        + quadrupole_energy_sum(trap.A, Q)
    )
    qr_p = q * r + p
    V += trap.U_ac**2 / (4.0 * particle.mass * w2l4) * float(qr_p @ (trap.A @ (trap.A @ qr_p)))
    W = torque_direction(trap.A, p, Q, r)
    R = np.asarray(body_frame, dtype=float)
    inv_inertia = (R / particle.inertia.as_array()) @ R.T
    V += trap.U_ac**2 / (4.0 * w2l4) * float(W @ (inv_inertia @ W))
    if trap.has_endcap:
        V += _endcap_potential(trap, q, p, Q, r)
    if trap.E_hom is not None:
        V -= float(trap.E_hom @ qr_p)
    return V


def effective_force_torque(
    trap: TrapGeometry,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Gradient of the effective potential: macromotion force and torque."""
    r = np.asarray(r, dtype=float)
    q = particle.q
    p, Q = particle.space_moments(body_frame)
    A = trap.A
    eps0, delta0 = micromotion_amplitudes(trap, particle, r, body_frame)

    cdc = trap.U_dc / trap.ell0**2
    cac = trap.U_ac / (2.0 * trap.ell0**2)
    F = -cdc * (A @ (q * r + p)) - cac * (A @ (q * eps0 + np.cross(delta0, p)))

    N = -cdc * torque_direction(A, p, Q, r)
    # AC part: gradient of the two drive-averaged quadratic forms
    eigvals, eigvecs = np.linalg.eigh(A)
    quad_terms = np.zeros(3)
    for a_i, v in zip(eigvals, eigvecs.T):
        quad_terms += a_i * np.cross(v, Q @ np.cross(v, delta0))
        quad_terms += a_i * np.cross(v, np.cross(delta0, Q @ v))
    N = N - cac * (
        np.cross(np.cross(delta0, p), A @ r)
        + np.cross(p, A @ eps0)
        - quad_terms / 3.0
    )
    if trap.has_endcap:
        c_ec = trap.endcap_coefficient
        F = F + 2.0 * c_ec * (q * (trap.A_ec @ r) + trap.A_ec @ p)
        N = N + 2.0 * c_ec * torque_direction(trap.A_ec, p, Q, r)
    if trap.E_hom is not None:
        F = F + q * trap.E_hom
        N = N + np.cross(p, trap.E_hom)
    return F, N


@dataclass(frozen=True)
class StabilityReport:
    """Pseudopotential confinement analysis of a linear trap with endcaps."""

    kappa: float
    B: np.ndarray
    stable: bool


def linear_trap_stability(trap: TrapGeometry, q: float, mass: float) -> StabilityReport:
    """Confinement tensor B = A^2 - kappa A_ec of a charged point mass.

    kappa = (4 m k_ec U_ec / q) (omega_ac ell0^2 / (ell_ec U_ac))^2; the
    centre of mass is confined iff B is positive definite, which for the
    standard linear geometry reduces to 0 < kappa < 1.
    """
    if not trap.has_endcap:
        raise ValueError("stability analysis requires endcap electrodes")
    if q == 0.0 or trap.U_ac == 0.0:
        raise ValueError("stability analysis requires q != 0 and U_ac != 0")
    kappa = (
        4.0
        * mass
        * trap.k_ec
        * trap.U_ec
        / q
        * (trap.omega_ac * trap.ell0**2 / (trap.ell_ec * trap.U_ac)) ** 2
    )
    B = trap.A @ trap.A - kappa * trap.A_ec
    stable = bool(np.linalg.eigvalsh(B).min() > 0.0)
    return StabilityReport(kappa=kappa, B=B, stable=stable)


def critical_field(
    trap: TrapGeometry, spec: SymmetricParticleSpec, mass: float
) -> float:
    """Homogeneous field strength beyond which alignment bistability is lost.

    For a symmetric particle in a ring trap, a field along e_z deforms the
    effective orientational landscape; above
    |3 U_ac^2 (p3^2 - q Q3) / (m p3 omega_ac^2 ell0^4)| one of the two
    alignment classes disappears.
    """
    if spec.p3 == 0.0:
        raise ValueError("critical field undefined for p3 = 0")
    return abs(
        3.0
        * trap.U_ac**2
        * (spec.p3**2 - spec.q * spec.Q3)
        / (mass * spec.p3 * trap.omega_ac**2 * trap.ell0**4)
    )


@dataclass(frozen=True)
class TrapMinimum:
    """A local minimum of the effective potential."""

    r: np.ndarray
    orientation: Orientation
    value: float
    alignment: str          # "parallel" | "perpendicular" | "oblique"
    degenerate_ring: bool = False


def _descend(trap, particle, r, R, r_scale, max_iter=4000):
    """Backtracking gradient descent of V_eff on R^3 x SO(3)."""
    V = effective_potential(trap, particle, r, R)
    eta = 0.05
    for _ in range(max_iter):
        F, N = effective_force_torque(trap, particle, r, R)
        f_norm = np.linalg.norm(F) * r_scale
        n_norm = np.linalg.norm(N)
        g_norm = max(f_norm, n_norm)
        if g_norm == 0.0:
            break
        # dimensionless step eta along the normalized gradient
        improved = False
        while eta > 1e-14:
            dr = eta * r_scale**2 * F / g_norm
            phi = eta * N / g_norm * r_scale  # rotation angle vector
            angle = np.linalg.norm(phi)
            if angle > 0.0:
                axis = phi / angle
                K = np.array(
                    [
                        [0.0, -axis[2], axis[1]],
                        [axis[2], 0.0, -axis[0]],
                        [-axis[1], axis[0], 0.0],
                    ]
                )
                rot = np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)
                R_new = orthonormalize(rot @ R)
            else:
                R_new = R
            r_new = r + dr
            V_new = effective_potential(trap, particle, r_new, R_new)
            if V_new < V:
                r, R, V = r_new, R_new, V_new
                eta = min(eta * 1.5, 0.2)
                improved = True
                break
            eta *= 0.5
        if not improved:
            break
    return r, R, V


def find_minima(
    trap: TrapGeometry,
    particle: RigidParticle,
    *,
    n_starts: int = 40,
    seed: int = 0,
    r_scale: float | None = None,
) -> list[TrapMinimum]:
    """Multi-start descent of the effective potential.

    Starts from random positions within ~r_scale of the origin and random
    orientations, descends with the analytic gradients, and deduplicates
    the results.  The alignment label refers to the body axis N_3 (the
    symmetry axis for cylindrically symmetric particles); perpendicular
    minima whose azimuths spread around the circle are flagged as a
    degenerate ring.
    """
    rng = np.random.default_rng(seed)
    if r_scale is None:
        p_norm = np.linalg.norm(particle.multipoles.p_body)
        r_scale = max(
            2.0 * p_norm / abs(particle.q) if particle.q != 0.0 else 0.0,
            1e-3 * trap.ell0,
        )
    found: list[TrapMinimum] = []
    for _ in range(n_starts):
        r0 = rng.normal(scale=r_scale, size=3)
        M = rng.normal(size=(3, 3))
        Qm, _ = np.linalg.qr(M)
        if np.linalg.det(Qm) < 0:
            Qm[:, 0] = -Qm[:, 0]
        r, R, V = _descend(trap, particle, r0, Qm, r_scale)
        m_axis = R[:, 2]
        cz = abs(float(m_axis[2]))
        if cz > math.cos(0.08):
            alignment = "parallel"
        elif cz < math.sin(0.08):
            alignment = "perpendicular"
        else:
            alignment = "oblique"
        found.append(
            TrapMinimum(
                r=r, orientation=Orientation.from_matrix(R), value=V, alignment=alignment
            )
        )
    # deduplicate: same position, same value, same alignment class
    unique: list[TrapMinimum] = []
    v_scale = max(abs(m.value) for m in found) + 1e-300
    for m in sorted(found, key=lambda m: m.value):
        dup = any(
            np.linalg.norm(m.r - u.r) < 1e-3 * r_scale
            and abs(m.value - u.value) < 1e-6 * v_scale
            and m.alignment == u.alignment
            for u in unique
        )
        if not dup:
            unique.append(m)
    # a perpendicular class appearing at many azimuths at one V is a ring
    perp = [m for m in unique if m.alignment == "perpendicular"]
    if len(perp) >= 3:
        azimuths = [math.atan2(m.orientation.body_frame[1, 2], m.orientation.body_frame[0, 2]) for m in perp]
        if np.ptp(azimuths) > 0.5:
            unique = [
                TrapMinimum(m.r, m.orientation, m.value, m.alignment, degenerate_ring=True)
                if m.alignment == "perpendicular"
                else m
                for m in unique
            ]
    return unique
