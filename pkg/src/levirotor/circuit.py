"""Pickup electrodes and the RLC circuit they feed.

The particle induces a charge Q_ind on the pickup electrode, modelled
through a reference potential phi0(r) that solves Laplace's equation in
the trap volume:

    linear pickup      phi0 = (k1 / z0) e_z . r
    quadrupole pickup  phi0 = (k2 / 2 z0^2) r . G r      (G symmetric, traceless)

    Q_ind = C * phi0-weighted charge overlap
          = (k1/z0) (q z + p_z)                                   (linear)
          = (k2/2 z0^2) (q r.Gr + 2 p.Gr + tr(GQ)/3)              (quadrupole)

The electrode sits at potential U_z = (Q + Phi0-independent circuit charge
Q_ind) / C, which acts back on the particle with force -U_z grad(Q_ind)
and torque -U_z T, where T is the rotational derivative of Q_ind.

Two lumped-element topologies close the circuit across the pickup
capacitance C:

    series    dQ/dt   = Phi / L
              dPhi/dt = -(Q + Q_ind)/C - (R/L) Phi + U_noise
    parallel  dQ/dt   = Phi / L - (Q + Q_ind)/(R C) + I_noise
              dPhi/dt = -(Q + Q_ind)/C

with gamma_s = R/L, gamma_p = 1/(R C), omega_LC = 1/sqrt(LC).  Johnson
noise of the resistor enters as a voltage source (series, spectral
intensity 2 k_B T R) or a current source (parallel, 2 k_B T / R).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .constants import K_B
from .particle import RigidParticle
from ._tensorops import torque_direction


def _check_pickup_tensor(G: np.ndarray) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if G.shape != (3, 3):
        raise ValueError("pickup tensor must be 3x3")
    scale = max(float(np.abs(G).max()), 1.0)
    if not np.allclose(G, G.T, atol=1e-12 * scale):
        raise ValueError("pickup tensor must be symmetric")
    if abs(float(np.trace(G))) > 1e-10 * scale:
        raise ValueError("pickup tensor must be traceless")
    return G


@dataclass(frozen=True)
class LinearPickup:
    """Plate-like electrode pair, phi0 = (k1/z0) z."""

    k1: float
    z0: float

    def __post_init__(self):
        if self.z0 <= 0.0:
            raise ValueError("z0 must be positive")


@dataclass(frozen=True)
class QuadrupolePickup:
    """Quadrupole electrode arrangement, phi0 = (k2 / 2 z0^2) r.Gr."""

    k2: float
    z0: float
    G: np.ndarray

    def __post_init__(self):
        if self.z0 <= 0.0:
            raise ValueError("z0 must be positive")
        object.__setattr__(self, "G", _check_pickup_tensor(self.G))


PickupConfig = Union[LinearPickup, QuadrupolePickup]


@dataclass(frozen=True)
class CircuitSpec:
    """Lumped RLC circuit across the pickup capacitance.

    topology is "series" or "parallel"; T is the resistor temperature
    used for Johnson noise (0 disables it).
    """

    topology: str
    R: float
    L: float
    C: float
    T: float = 0.0

    def __post_init__(self):
        if self.topology not in ("series", "parallel"):
            raise ValueError("topology must be 'series' or 'parallel'")
        if self.L <= 0.0 or self.C <= 0.0:
            raise ValueError("L and C must be positive")
        # R = 0 turns a series circuit into a lossless LC stage; a
        # parallel resistor at 0 would short the electrode instead.
        if self.R < 0.0 or (self.R == 0.0 and self.topology == "parallel"):
            raise ValueError("R must be positive (series allows 0)")
        if self.T < 0.0:
            raise ValueError("temperature must be non-negative")

    @property
    def omega_lc(self) -> float:
        return 1.0 / math.sqrt(self.L * self.C)

    @property
    def damping(self) -> float:
        """Circuit damping rate: R/L (series) or 1/(RC) (parallel)."""
        if self.topology == "series":
            return self.R / self.L
        return 1.0 / (self.R * self.C)


@dataclass
class CircuitState:
    """Canonical circuit variables: capacitor-branch charge and inductor flux."""

    Q: float = 0.0
    Phi: float = 0.0


def reference_potential(pickup: PickupConfig, r: np.ndarray) -> float:
    """phi0(r), the unit-voltage electrode potential at position r."""
    r = np.asarray(r, dtype=float)
    if isinstance(pickup, LinearPickup):
        return pickup.k1 / pickup.z0 * r[2]
    return pickup.k2 / (2.0 * pickup.z0**2) * float(r @ (pickup.G @ r))


def induced_charge(
    pickup: PickupConfig,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> float:
    """Charge induced on the pickup electrode by the particle multipoles."""
    r = np.asarray(r, dtype=float)
    q = particle.q
    p, Q = particle.space_moments(body_frame)
    if isinstance(pickup, LinearPickup):
        return pickup.k1 / pickup.z0 * (q * r[2] + p[2])
    G = pickup.G
    return (
        pickup.k2
        / (2.0 * pickup.z0**2)
        * (q * float(r @ (G @ r)) + 2.0 * float(p @ (G @ r)) + float(np.trace(G @ Q)) / 3.0)
    )


def induced_charge_gradient(
    pickup: PickupConfig,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> np.ndarray:
    """d Q_ind / d r."""
    r = np.asarray(r, dtype=float)
    if isinstance(pickup, LinearPickup):
        return np.array([0.0, 0.0, pickup.k1 * particle.q / pickup.z0])
    p, _ = particle.space_moments(body_frame)
    return pickup.k2 / pickup.z0**2 * (pickup.G @ (particle.q * r + p))


def torque_per_voltage(
    pickup: PickupConfig,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> np.ndarray:
    """Rotational derivative T of Q_ind; the back-action torque is -U_z T."""
    r = np.asarray(r, dtype=float)
    p, Q = particle.space_moments(body_frame)
    if isinstance(pickup, LinearPickup):
        return pickup.k1 / pickup.z0 * np.cross(p, np.array([0.0, 0.0, 1.0]))
    return pickup.k2 / pickup.z0**2 * torque_direction(pickup.G, p, Q, r)


def electrode_voltage(circuit: CircuitSpec, state: CircuitState, q_ind: float) -> float:
    """Voltage across the pickup capacitance."""
    return (state.Q + q_ind) / circuit.C


def circuit_rhs(
    circuit: CircuitSpec,
    state: CircuitState,
    q_ind: float,
    noise_voltage: float = 0.0,
    noise_current: float = 0.0,
) -> tuple[float, float]:
    """(dQ/dt, dPhi/dt) for the configured topology.

    noise_voltage adds to dPhi/dt (series Johnson source), noise_current
    to dQ/dt (parallel source); pass the already-scaled white-noise value.
    """
    u_z = (state.Q + q_ind) / circuit.C
    if circuit.topology == "series":
        dQ = state.Phi / circuit.L
        dPhi = -u_z - (circuit.R / circuit.L) * state.Phi + noise_voltage
    else:
        dQ = state.Phi / circuit.L - u_z / circuit.R + noise_current
        dPhi = -u_z
    return dQ, dPhi


def noise_intensity(circuit: CircuitSpec) -> float:
    """Spectral intensity of the Johnson source.

    Series: voltage source, 2 k_B T R.  Parallel: current source,
    2 k_B T / R.  The Euler-Maruyama increment per step dt is
    sqrt(intensity * dt) * N(0, 1).
    """
    if circuit.topology == "series":
        return 2.0 * K_B * circuit.T * circuit.R
    return 2.0 * K_B * circuit.T / circuit.R


def adiabatic_contraction_rate(
    circuit: CircuitSpec,
    pickup: PickupConfig,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
) -> float:
    """Phase-space contraction rate in the adiabatic (resistor-dominated) limit.

    Gamma_ps = R [ |grad Q_ind|^2 / m + T . I^-1 T ], the sum of the
    instantaneous momentum damping rates of all coupled modes.
    """
    grad = induced_charge_gradient(pickup, particle, r, body_frame)
    T = torque_per_voltage(pickup, particle, r, body_frame)
    R_mat = np.asarray(body_frame, dtype=float)
    inv_inertia = (R_mat / particle.inertia.as_array()) @ R_mat.T
    return circuit.R * (
        float(grad @ grad) / particle.mass + float(T @ (inv_inertia @ T))
    )


def circuit_impedance(circuit: CircuitSpec, omega) -> np.ndarray:
    """Impedance Z(omega) of the R-L branch (without the pickup capacitance)."""
    omega = np.asarray(omega, dtype=float)
    if circuit.topology == "series":
        return circuit.R + 1j * omega * circuit.L
    # parallel R and L; at omega -> 0 the inductor shorts the branch
    with np.errstate(divide="ignore", invalid="ignore"):
        y = 1.0 / circuit.R - 1j / (omega * circuit.L)
        z = np.where(omega == 0.0, 0.0 + 0.0j, 1.0 / y)
    return z


def effective_resistance(
    circuit: CircuitSpec,
    omega,
    impedance: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Re[Z / (1 + i omega C Z)] of the loaded circuit at drive frequency omega.

    With the default lumped topologies this evaluates the closed
    Lorentzian forms; a custom impedance(omega) callable for the R-L
    branch is combined with the pickup capacitance numerically.
    """
    omega = np.asarray(omega, dtype=float)
    if impedance is not None:
        z = np.asarray(impedance(omega), dtype=complex)
        return np.real(z / (1.0 + 1j * omega * circuit.C * z))
    gamma = circuit.damping
    w_lc2 = 1.0 / (circuit.L * circuit.C)
    denom = omega**2 * gamma**2 + (omega**2 - w_lc2) ** 2
    if circuit.topology == "series":
        num = gamma * w_lc2
    else:
        num = gamma * omega**2
    return num / (circuit.C * denom)


def damping_rate_vs_frequency(
    circuit: CircuitSpec,
    pickup: LinearPickup,
    q: float,
    mass: float,
    omega,
    impedance: Callable[[np.ndarray], np.ndarray] | None = None,
) -> np.ndarray:
    """Momentum damping rate of an axial mode oscillating at omega.

    Gamma(omega) = (q^2 k1^2 / m z0^2) Re[Z/(1 + i omega C Z)].  The
    mode energy decays at this rate, the amplitude at half of it.
    """
    if not isinstance(pickup, LinearPickup):
        raise TypeError("closed-form damping rate applies to the linear pickup")
    coupling = q**2 * pickup.k1**2 / (mass * pickup.z0**2)
    return coupling * effective_resistance(circuit, omega, impedance)


@dataclass(frozen=True)
class FrictionDiffusion:
    """Secular friction and diffusion tensors at a mode frequency."""

    gamma_cm: np.ndarray
    gamma_rot: np.ndarray
    d_cm: np.ndarray
    d_rot: np.ndarray


def friction_diffusion_tensors(
    circuit: CircuitSpec,
    pickup: PickupConfig,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
    omega: float,
    impedance: Callable[[np.ndarray], np.ndarray] | None = None,
) -> FrictionDiffusion:
    """Friction and momentum-diffusion tensors for macromotion at omega.

    gamma_cm = Re[.] (grad Q)(grad Q)^T / m acts on P, gamma_rot =
    Re[.] (T T^T) I^-1 on J; the diffusion tensors obey the
    fluctuation-dissipation pairing d_cm = k_B T m gamma_cm and
    d_rot = k_B T gamma_rot I at the resistor temperature.
    """
    re_z = float(effective_resistance(circuit, omega, impedance))
    grad = induced_charge_gradient(pickup, particle, r, body_frame)
    T_vec = torque_per_voltage(pickup, particle, r, body_frame)
    R_mat = np.asarray(body_frame, dtype=float)
    inertia = (R_mat * particle.inertia.as_array()) @ R_mat.T
    inv_inertia = (R_mat / particle.inertia.as_array()) @ R_mat.T
    gamma_cm = re_z * np.outer(grad, grad) / particle.mass
    gamma_rot = re_z * np.outer(T_vec, T_vec) @ inv_inertia
    kt = K_B * circuit.T
    return FrictionDiffusion(
        gamma_cm=gamma_cm,
        gamma_rot=gamma_rot,
        d_cm=kt * particle.mass * gamma_cm,
        d_rot=kt * (gamma_rot @ inertia),
    )


def circuit_energy(circuit: CircuitSpec, state: CircuitState, q_ind: float) -> float:
    """Phi^2/2L + (Q + Q_ind)^2/2C, the circuit part of the Hamiltonian."""
    return state.Phi**2 / (2.0 * circuit.L) + (state.Q + q_ind) ** 2 / (2.0 * circuit.C)


def canonical_transform(
    pickup: PickupConfig,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
    P: np.ndarray,
    J: np.ndarray,
    state: CircuitState,
) -> tuple[np.ndarray, np.ndarray, CircuitState]:
    """Shift to primed variables that decouple the pickup interaction.

    Q' = Q + Q_ind, P' = P - Phi grad Q_ind, J' = J - Phi T.  In the
    primed variables the Hamiltonian keeps its uncoupled form, so the
    energy computed from (P', J', Q') with the inverse shifts equals the
    energy of the original state.
    """
    grad = induced_charge_gradient(pickup, particle, r, body_frame)
    T_vec = torque_per_voltage(pickup, particle, r, body_frame)
    q_ind = induced_charge(pickup, particle, r, body_frame)
    P_p = np.asarray(P, dtype=float) - state.Phi * grad
    J_p = np.asarray(J, dtype=float) - state.Phi * T_vec
    return P_p, J_p, CircuitState(Q=state.Q + q_ind, Phi=state.Phi)
