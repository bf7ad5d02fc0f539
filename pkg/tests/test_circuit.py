"""Pickup coupling, RLC response functions and damping-rate identities."""

import math

import numpy as np
import pytest

from levirotor.charges import MultipoleDistribution, SymmetricParticleSpec
from levirotor.circuit import (
    CircuitSpec,
    CircuitState,
    LinearPickup,
    QuadrupolePickup,
    adiabatic_contraction_rate,
    canonical_transform,
    circuit_energy,
    circuit_impedance,
    circuit_rhs,
    damping_rate_vs_frequency,
    effective_resistance,
    friction_diffusion_tensors,
    induced_charge,
    induced_charge_gradient,
    noise_intensity,
    reference_potential,
    torque_per_voltage,
)
from levirotor.constants import AMU, ELEMENTARY_CHARGE, K_B, TWO_PI
from levirotor.kinematics import InertiaSpec, body_axes
from levirotor.particle import RigidParticle

from oracles import position_gradient, rotation_gradient

E = ELEMENTARY_CHARGE


def _dipolar_particle():
    spec = SymmetricParticleSpec(q=1e4 * E, p3=2e-22, Q3=5e-28, I=1e-27, I3=0.5e-27)
    return RigidParticle.from_symmetric(spec, 1e10 * AMU)


def test_circuit_spec_validation():
    CircuitSpec(topology="series", R=0.0, L=1.0, C=1e-9)
    with pytest.raises(ValueError):
        CircuitSpec(topology="parallel", R=0.0, L=1.0, C=1e-9)
    with pytest.raises(ValueError):
        CircuitSpec(topology="series", R=-1.0, L=1.0, C=1e-9)
    with pytest.raises(ValueError):
        CircuitSpec(topology="series", R=1.0, L=0.0, C=1e-9)
    with pytest.raises(ValueError):
        CircuitSpec(topology="ladder", R=1.0, L=1.0, C=1e-9)
    s = CircuitSpec(topology="series", R=50.0, L=0.5, C=2e-9)
    assert abs(s.omega_lc - 1.0 / math.sqrt(0.5 * 2e-9)) < 1e-6
    assert s.damping == 50.0 / 0.5
    p = CircuitSpec(topology="parallel", R=50.0, L=0.5, C=2e-9)
    assert p.damping == 1.0 / (50.0 * 2e-9)


def test_induced_charge_linear_pickup():
    part = _dipolar_particle()
    pickup = LinearPickup(k1=0.5, z0=1e-4)
    frame = body_axes(0.3, 1.1, -0.4)
    r = np.array([2e-5, -1e-5, 3e-5])
    p_space, _ = part.space_moments(frame)
    q_ind = induced_charge(pickup, part, r, frame)
    assert abs(q_ind - 0.5 / 1e-4 * (part.q * r[2] + p_space[2])) < 1e-12 * abs(q_ind)
    # reciprocity: Q_ind gradients match derivatives of q phi0 + p.grad phi0
    grad = induced_charge_gradient(pickup, part, r, frame)
    fd = position_gradient(lambda x: induced_charge(pickup, part, x, frame), r, 1e-9)
    assert np.abs(grad - fd).max() < 1e-8 * np.abs(grad).max()
    T = torque_per_voltage(pickup, part, r, frame)
    fd_T = rotation_gradient(lambda R: induced_charge(pickup, part, r, R), frame, 1e-6)
    assert np.abs(T - fd_T).max() < 1e-6 * max(np.abs(T).max(), 1e-30)
    assert abs(reference_potential(pickup, r) - 0.5 * r[2] / 1e-4) < 1e-15


def test_induced_charge_quadrupole_pickup():
    part = _dipolar_particle()
    G = np.diag([1.0, 1.0, -2.0])
    pickup = QuadrupolePickup(k2=0.3, z0=1e-4, G=G)
    frame = body_axes(0.9, 0.7, 0.2)
    r = np.array([1e-5, 2e-5, -1.5e-5])
    grad = induced_charge_gradient(pickup, part, r, frame)
    fd = position_gradient(lambda x: induced_charge(pickup, part, x, frame), r, 1e-9)
    assert np.abs(grad - fd).max() < 1e-7 * np.abs(grad).max()
    T = torque_per_voltage(pickup, part, r, frame)
    fd_T = rotation_gradient(lambda R: induced_charge(pickup, part, r, R), frame, 1e-6)
    assert np.abs(T - fd_T).max() < 1e-6 * np.abs(T).max()


def test_circuit_rhs_topologies():
    state = CircuitState(Q=2e-12, Phi=3e-9)
    q_ind = 5e-13
    s = CircuitSpec(topology="series", R=100.0, L=0.5, C=1e-9)
    dQ, dPhi = circuit_rhs(s, state, q_ind, noise_voltage=1e-6)
    u_z = (state.Q + q_ind) / s.C
    assert dQ == state.Phi / s.L
    assert abs(dPhi - (-u_z - s.R / s.L * state.Phi + 1e-6)) < 1e-18
    p = CircuitSpec(topology="parallel", R=100.0, L=0.5, C=1e-9)
    dQ, dPhi = circuit_rhs(p, state, q_ind, noise_current=1e-9)
    assert abs(dQ - (state.Phi / p.L - u_z / p.R + 1e-9)) < 1e-18
    assert dPhi == -u_z


def test_noise_intensities():
    s = CircuitSpec(topology="series", R=100.0, L=0.5, C=1e-9, T=4.0)
    assert abs(noise_intensity(s) - 2.0 * K_B * 4.0 * 100.0) < 1e-30
    p = CircuitSpec(topology="parallel", R=100.0, L=0.5, C=1e-9, T=4.0)
    assert abs(noise_intensity(p) - 2.0 * K_B * 4.0 / 100.0) < 1e-30
    cold = CircuitSpec(topology="series", R=100.0, L=0.5, C=1e-9, T=0.0)
    assert noise_intensity(cold) == 0.0


def test_effective_resistance_closed_vs_impedance():
    # the closed Lorentzians must equal the generic Re[Z/(1 + i w C Z)]
    omega = np.geomspace(1e2, 1e7, 300)
    for topology in ("series", "parallel"):
        c = CircuitSpec(topology=topology, R=3e5, L=0.565, C=10e-9)
        closed = effective_resistance(c, omega)
        generic = effective_resistance(c, omega, impedance=lambda w: circuit_impedance(c, w))
        assert np.abs(closed - generic).max() < 1e-10 * np.abs(closed).max()


def test_rate_identities():
    q = 1e4 * E
    mass = 1e10 * AMU
    pickup = LinearPickup(k1=0.5, z0=1e-4)
    R = 7.96e6
    ref = R * q**2 * pickup.k1**2 / (mass * pickup.z0**2)
    s = CircuitSpec(topology="series", R=R, L=63.3, C=1e-10)
    p = CircuitSpec(topology="parallel", R=R, L=63.3, C=1e-10)
    g_s0 = damping_rate_vs_frequency(s, pickup, q, mass, np.array([0.0]))[0]
    g_p_res = damping_rate_vs_frequency(p, pickup, q, mass, np.array([p.omega_lc]))[0]
    assert abs(g_s0 - ref) / ref < 1e-12
    assert abs(g_p_res - ref) / ref < 1e-12
    # rates scale as q^2 k1^2 / (m z0^2)
    g2 = damping_rate_vs_frequency(s, LinearPickup(k1=1.0, z0=1e-4), 2.0 * q, mass, np.array([0.0]))[0]
    assert abs(g2 - 16.0 * g_s0) / g2 < 1e-12
    with pytest.raises(TypeError):
        damping_rate_vs_frequency(s, QuadrupolePickup(k2=0.5, z0=1e-4, G=np.diag([1.0, 1.0, -2.0])), q, mass, np.array([0.0]))


def test_adiabatic_contraction_rate():
    part = _dipolar_particle()
    pickup = LinearPickup(k1=0.5, z0=1e-4)
    circ = CircuitSpec(topology="series", R=2e5, L=1.0, C=1e-9)
    # symmetry axis perpendicular to e_z: both z and beta damp
    frame = body_axes(0.0, math.pi / 2.0, 0.0)
    got = adiabatic_contraction_rate(circ, pickup, part, np.zeros(3), frame)
    b = pickup.k1**2 / pickup.z0**2
    p3 = part.multipoles.p_body[2]
    ref = circ.R * b * (part.q**2 / part.mass + p3**2 / part.inertia.I1)
    assert abs(got - ref) / ref < 1e-12
    # axis along e_z: the dipole torque channel closes
    aligned = adiabatic_contraction_rate(circ, pickup, part, np.zeros(3), np.eye(3))
    ref_aligned = circ.R * b * part.q**2 / part.mass
    assert abs(aligned - ref_aligned) / ref_aligned < 1e-12


def test_friction_diffusion_pairing():
    part = _dipolar_particle()
    pickup = LinearPickup(k1=0.5, z0=1e-4)
    circ = CircuitSpec(topology="parallel", R=2e6, L=0.565, C=10e-9, T=4.0)
    frame = body_axes(0.2, 1.0, 0.4)
    r = np.array([0.0, 0.0, 1e-5])
    omega = 0.8 * circ.omega_lc
    fd = friction_diffusion_tensors(circ, pickup, part, r, frame, omega)
    re_z = effective_resistance(circ, np.array([omega]))[0]
    grad = induced_charge_gradient(pickup, part, r, frame)
    assert np.abs(fd.gamma_cm - re_z * np.outer(grad, grad) / part.mass).max() < 1e-18
    # fluctuation-dissipation at the resistor temperature
    assert np.abs(fd.d_cm - K_B * circ.T * part.mass * fd.gamma_cm).max() < 1e-30
    inertia = (frame * part.inertia.as_array()) @ frame.T
    assert np.abs(fd.d_rot - K_B * circ.T * fd.gamma_rot @ inertia).max() < 1e-40


def test_canonical_transform_energy():
    # the primed variables leave the quadratic energy form unchanged
    part = _dipolar_particle()
    pickup = LinearPickup(k1=0.5, z0=1e-4)
    circ = CircuitSpec(topology="series", R=0.0, L=1.0, C=1e-9)
    frame = body_axes(0.3, 0.9, -0.2)
    r = np.array([1e-5, -2e-5, 1.5e-5])
    P = np.array([1e-18, 2e-18, -3e-18])
    J = np.array([2e-25, -1e-25, 3e-25])
    state = CircuitState(Q=3e-12, Phi=4e-9)
    q_ind = induced_charge(pickup, part, r, frame)
    P_p, J_p, c_p = canonical_transform(pickup, part, r, frame, P, J, state)
    assert abs(c_p.Q - (state.Q + q_ind)) < 1e-24
    assert c_p.Phi == state.Phi
    inv_inertia = (frame / part.inertia.as_array()) @ frame.T

    def energy(P_, J_, circ_state, q_off):
        return (
            float(P_ @ P_) / (2.0 * part.mass)
            + 0.5 * float(J_ @ (inv_inertia @ J_))
            + circuit_energy(circ, circ_state, q_off)
        )

    e_orig = energy(P, J, state, q_ind)
    # primed energy evaluates the same Hamiltonian after undoing the shifts
    grad = induced_charge_gradient(pickup, part, r, frame)
    T_vec = torque_per_voltage(pickup, part, r, frame)
    e_primed = energy(P_p + state.Phi * grad, J_p + state.Phi * T_vec, CircuitState(Q=c_p.Q, Phi=c_p.Phi), 0.0)
    assert abs(e_primed - e_orig) < 1e-12 * abs(e_orig)


def test_circuit_energy_form():
    circ = CircuitSpec(topology="series", R=10.0, L=2.0, C=1e-9)
    st = CircuitState(Q=1e-12, Phi=2e-9)
    ref = st.Phi**2 / (2.0 * circ.L) + (st.Q + 5e-13) ** 2 / (2.0 * circ.C)
    assert abs(circuit_energy(circ, st, 5e-13) - ref) < 1e-30
