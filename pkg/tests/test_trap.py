"""Trap fields, instantaneous and effective potentials, stability analysis."""

import math

import numpy as np
import pytest

from levirotor.charges import MultipoleDistribution, SymmetricParticleSpec
from levirotor.constants import AMU, ELEMENTARY_CHARGE, TWO_PI
from levirotor.kinematics import InertiaSpec, body_axes
from levirotor.particle import RigidParticle
from levirotor.trap import (
    TrapGeometry,
    critical_field,
    effective_force_torque,
    effective_potential,
    find_minima,
    instantaneous_potential,
    linear_trap,
    linear_trap_stability,
    mathieu_parameters,
    micromotion_amplitudes,
    momentum_micromotion_correction,
    ring_trap,
    trap_field,
    trap_force_torque,
)

from oracles import position_gradient, rotation_gradient

E = ELEMENTARY_CHARGE


def _generic_particle(seed=3):
    rng = np.random.default_rng(seed)
    Q_raw = rng.normal(size=(3, 3))
    Q_body = Q_raw + Q_raw.T
    Q_body -= np.eye(3) * np.trace(Q_body) / 3.0
    dist = MultipoleDistribution(
        q=200.0 * E,
        p_body=1e-6 * 200.0 * E * rng.normal(size=3),
        Q_body=2e-10 * E * Q_body,
    )
    I0 = 2.8e-38
    return RigidParticle(
        mass=1e6 * AMU, inertia=InertiaSpec(I0, 0.92 * I0, 0.55 * I0), multipoles=dist
    )


def test_geometry_validation():
    with pytest.raises(ValueError):
        TrapGeometry(A=np.diag([1.0, 1.0, 1.0]), ell0=1e-3, U_dc=0.0, U_ac=1.0, omega_ac=1.0)
    asym = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    with pytest.raises(ValueError):
        TrapGeometry(A=asym, ell0=1e-3, U_dc=0.0, U_ac=1.0, omega_ac=1.0)
    with pytest.raises(ValueError):
        ring_trap(1e-3, 0.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        ring_trap(-1e-3, 0.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        linear_trap(1e-3, 1.0, 1.0, ell_ec=1e-3, U_ec=1.0, k_ec=1.5)
    # U_ac = 0 is a legal static configuration
    trap = linear_trap(1e-3, 0.0, 1.0, 2.0, ell_ec=1e-3, U_ec=1.0, k_ec=1.0)
    assert trap.endcap_coefficient == 1.0 / 1e-6


def test_field_structure():
    trap = ring_trap(1e-3, 2.0, 5.0, TWO_PI * 1e6, E_hom=np.array([0.0, 0.0, 0.3]))
    r = np.array([1e-4, -2e-4, 5e-5])
    # full drive voltage at t = 0, pure dc a quarter period later
    E0 = trap_field(trap, r, 0.0)
    assert np.allclose(E0, -(7.0 / 1e-6) * (trap.A @ r) + trap.E_hom)
    t_quarter = 0.25 * TWO_PI / trap.omega_ac
    Eq = trap_field(trap, r, t_quarter)
    assert np.allclose(Eq, -(2.0 / 1e-6) * (trap.A @ r) + trap.E_hom, atol=1e-10)

    # endcaps add a static restoring field along z
    trap_ec = linear_trap(1e-3, 5.0, TWO_PI * 1e6, ell_ec=2e-3, U_ec=3.0, k_ec=0.8)
    c_ec = 0.8 * 3.0 / 4e-6
    r_z = np.array([0.0, 0.0, 1e-4])
    Ez = trap_field(trap_ec, r_z, t_quarter)
    assert np.allclose(Ez, 2.0 * c_ec * np.array([0.0, 0.0, -2.0 * r_z[2]]), atol=1e-9)


def test_instantaneous_force_torque_are_gradients():
    part = _generic_particle()
    traps = [
        ring_trap(0.25 * math.sqrt(2.0) * 1e-3, 3.0, 750.0, TWO_PI * 75e6),
        linear_trap(
            2e-4, 500.0, TWO_PI * 1e6, 1.0, ell_ec=4e-4, U_ec=5.0, k_ec=0.8,
            E_hom=np.array([2.0, -1.0, 3.0]),
        ),
    ]
    rng = np.random.default_rng(7)
    for trap in traps:
        for t in (0.0, 0.3 / trap.omega_ac):
            r = 0.3 * trap.ell0 * rng.normal(size=3)
            frame = body_axes(*rng.uniform(0.0, math.pi, size=3))
            F, N = trap_force_torque(trap, part, r, frame, t)
            fd_F = -position_gradient(
                lambda x: instantaneous_potential(trap, part, x, frame, t),
                r,
                1e-7 * trap.ell0,
            )
            fd_N = -rotation_gradient(
                lambda R: instantaneous_potential(trap, part, r, R, t), frame, 1e-6
            )
            assert np.abs(F - fd_F).max() < 1e-6 * np.abs(F).max()
            assert np.abs(N - fd_N).max() < 1e-6 * np.abs(N).max()


def test_effective_force_torque_are_gradients():
    part = _generic_particle()
    trap = linear_trap(2e-4, 500.0, TWO_PI * 1e6, 1.0, ell_ec=4e-4, U_ec=5.0, k_ec=0.8)
    rng = np.random.default_rng(11)
    r = 0.2 * trap.ell0 * rng.normal(size=3)
    frame = body_axes(0.5, 1.2, -0.8)
    F, N = effective_force_torque(trap, part, r, frame)
    fd_F = -position_gradient(
        lambda x: effective_potential(trap, part, x, frame), r, 1e-7 * trap.ell0
    )
    fd_N = -rotation_gradient(
        lambda R: effective_potential(trap, part, r, R), frame, 1e-6
    )
    assert np.abs(F - fd_F).max() < 1e-5 * np.abs(F).max()
    assert np.abs(N - fd_N).max() < 1e-5 * np.abs(N).max()


def test_effective_potential_point_charge():
    # for a structureless charge only the dc and ac translational terms act
    trap = ring_trap(1e-3, 2.0, 40.0, TWO_PI * 2e6)
    mass = 1e8 * AMU
    q = 50.0 * E
    part = RigidParticle(
        mass=mass,
        inertia=InertiaSpec(1e-33, 1e-33, 1e-33),
        multipoles=MultipoleDistribution(q=q, p_body=np.zeros(3), Q_body=np.zeros((3, 3))),
    )
    r = np.array([2e-5, -1e-5, 3e-5])
    V = effective_potential(trap, part, r, np.eye(3))
    Ar = trap.A @ r
    V_ref = (trap.U_dc / trap.ell0**2) * 0.5 * q * (r @ Ar) + (
        trap.U_ac**2 * q**2 / (4.0 * mass * trap.omega_ac**2 * trap.ell0**4)
    ) * (Ar @ Ar)
    assert abs(V - V_ref) < 1e-12 * abs(V_ref)


def test_micromotion_amplitude_conventions():
    part = _generic_particle()
    trap = ring_trap(0.25 * math.sqrt(2.0) * 1e-3, 0.0, 750.0, TWO_PI * 75e6)
    r = np.array([1e-5, 2e-5, -3e-5])
    frame = body_axes(0.4, 1.0, 0.2)
    eps0, delta0 = micromotion_amplitudes(trap, part, r, frame)
    o_inertia = (frame * part.inertia.as_array()) @ frame.T
    for t in (0.1 / trap.omega_ac, 0.8 / trap.omega_ac):
        dP, dJ = momentum_micromotion_correction(trap, part, r, frame, t)
        s = math.sin(trap.omega_ac * t)
        # Delta P = m w eps0 sin(wt), Delta J = w I delta0 sin(wt)
        assert np.allclose(dP, part.mass * trap.omega_ac * s * eps0, rtol=1e-12)
        assert np.allclose(dJ, trap.omega_ac * s * (o_inertia @ delta0), rtol=1e-12)
    # corrections vanish at the cosine extrema of the drive
    dP0, dJ0 = momentum_micromotion_correction(trap, part, r, frame, 0.0)
    assert np.abs(dP0).max() == 0.0 and np.abs(dJ0).max() == 0.0


def test_mathieu_parameters_and_warnings():
    part = _generic_particle()
    trap = ring_trap(0.25 * math.sqrt(2.0) * 1e-3, 0.0, 750.0, TWO_PI * 75e6)
    rep = mathieu_parameters(trap, part, 1e-6)
    w2l2 = part.mass * trap.omega_ac**2 * trap.ell0**2
    assert abs(rep.charge - trap.U_ac * part.q / w2l2) < 1e-15
    assert rep.as_array().shape == (4,)
    assert all(v < 0.3 for v in rep.as_array())
    assert rep.warnings == []
    # a drive 1000x stronger cannot be averaged over
    hot = ring_trap(trap.ell0, 0.0, 750e3, trap.omega_ac)
    assert len(mathieu_parameters(hot, part, 1e-6).warnings) > 0
    with pytest.raises(ValueError):
        mathieu_parameters(trap, part, 0.0)


def test_linear_trap_stability_report():
    mass = 1e7 * AMU
    q = 200.0 * E
    omega_ac = TWO_PI * 2e6
    ell0 = 200e-6
    ell_ec = 2.0 * ell0
    U_ac = 0.1 * mass * omega_ac**2 * ell0**2 / q

    def at_kappa(kappa):
        U_ec = kappa * q * (U_ac * ell_ec) ** 2 / (4.0 * mass * (omega_ac * ell0**2) ** 2)
        return linear_trap(ell0, U_ac, omega_ac, ell_ec=ell_ec, U_ec=U_ec, k_ec=1.0)

    for kappa, stable in ((0.5, True), (0.05, True), (1.2, False), (-0.1, False)):
        rep = linear_trap_stability(at_kappa(kappa), q, mass)
        assert abs(rep.kappa - kappa) < 1e-12 * max(abs(kappa), 1.0)
        assert rep.stable is stable
        # B = A^2 - kappa A_ec for the standard geometry
        A = np.diag([-1.0, 1.0, 0.0])
        A_ec = np.diag([1.0, 1.0, -2.0])
        assert np.abs(rep.B - (A @ A - kappa * A_ec)).max() < 1e-12

    with pytest.raises(ValueError):
        linear_trap_stability(ring_trap(1e-3, 0.0, 1.0, 1.0), q, mass)


def test_critical_field_formula():
    trap = ring_trap(1e-3, 0.0, 300.0, TWO_PI * 1e6)
    spec = SymmetricParticleSpec(q=100.0 * E, p3=1e-25, Q3=3e-32, I=1e-38, I3=0.5e-38)
    mass = 1e6 * AMU
    ref = abs(
        3.0 * trap.U_ac**2 * (spec.p3**2 - spec.q * spec.Q3)
        / (mass * spec.p3 * trap.omega_ac**2 * trap.ell0**4)
    )
    assert abs(critical_field(trap, spec, mass) - ref) < 1e-12 * ref
    flat = SymmetricParticleSpec(q=spec.q, p3=0.0, Q3=spec.Q3, I=1e-38, I3=0.5e-38)
    with pytest.raises(ValueError):
        critical_field(trap, flat, mass)


def test_find_minima_symmetric_dipole():
    # a dipolar symmetric rotor in a ring trap settles where force and
    # torque both vanish; every reported minimum must satisfy that
    spec = SymmetricParticleSpec(
        q=200.0 * E, p3=0.005 * 200.0 * E * 12e-9, Q3=0.0, I=2.8e-38, I3=1.4e-38
    )
    part = RigidParticle.from_symmetric(spec, 1e6 * AMU)
    trap = ring_trap(0.25 * math.sqrt(2.0) * 1e-3, 3.0, 750.0, TWO_PI * 75e6)
    minima = find_minima(trap, part, n_starts=6, seed=1)
    assert len(minima) >= 1
    for m in minima:
        F, N = effective_force_torque(trap, part, m.r, m.orientation.body_frame)
        V0 = m.value
        # stationarity: a small step along the residual gradient moves V
        # by far less than the curvature scale set by a fixed probe step
        probe = 1e-3 * trap.ell0
        dV_probe = abs(
            effective_potential(trap, part, m.r + np.array([probe, 0.0, 0.0]), m.orientation.body_frame)
            - V0
        )
        assert np.linalg.norm(F) * probe < 1e-2 * max(dV_probe, abs(V0) * 1e-12)
        assert m.alignment in ("parallel", "perpendicular", "oblique")
