"""Trajectory integration for the coupled particle-circuit system.

The exact mode integrates the full time-dependent dynamics (drive fields,
image charges, pickup back-action, circuit equations) with a fixed-step
RK4; the effective mode integrates the drive-averaged macromotion
instead.  The stochastic scheme is Euler-Maruyama with gas friction,
gas noise on momentum and angular momentum, and Johnson noise in the
circuit.  Runs are deterministic for a given seed and configuration,
independent of chunking; ensemble member k uses seed ^ k.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import _kernels
from .circuit import (
    CircuitSpec,
    CircuitState,
    PickupConfig,
    LinearPickup,
    QuadrupolePickup,
    canonical_transform,
    circuit_energy,
    induced_charge,
    induced_charge_gradient,
    noise_intensity,
    torque_per_voltage,
)
from .constants import K_B
from .images import PlateCapacitor, image_potential
from .kinematics import euler_from_matrix, orthonormalize
from .particle import RigidParticle
from .trap import (
    TrapGeometry,
    effective_potential,
    instantaneous_potential,
    micromotion_amplitudes,
    momentum_micromotion_correction,
)

_CHUNK = 1 << 16


@dataclass(frozen=True)
class GasCoupling:
    """Linear gas friction: rates per space axis (cm) and per body axis (rot)."""

    gamma_cm: np.ndarray
    gamma_rot: np.ndarray
    T_gas: float

    def __post_init__(self):
        object.__setattr__(self, "gamma_cm", np.asarray(self.gamma_cm, dtype=float))
        object.__setattr__(self, "gamma_rot", np.asarray(self.gamma_rot, dtype=float))
        if self.gamma_cm.shape != (3,) or self.gamma_rot.shape != (3,):
            raise ValueError("friction rates must be 3-vectors")
        if np.any(self.gamma_cm < 0.0) or np.any(self.gamma_rot < 0.0) or self.T_gas < 0.0:
            raise ValueError("friction rates and temperature must be non-negative")

    @classmethod
    def isotropic(cls, gamma_cm: float, gamma_rot: float, T_gas: float) -> "GasCoupling":
        return cls(np.full(3, gamma_cm), np.full(3, gamma_rot), T_gas)


@dataclass(frozen=True)
class IntegratorConfig:
    """Step-size and scheme selection.

    steps_per_cycle divides the drive period (minimum 64); dt overrides
    it for systems without a meaningful drive.  scheme is "rk4"
    (deterministic) or "em" (stochastic Euler-Maruyama).  escape_radius
    defaults to 10 ell0 (or infinity without a trap).
    """

    steps_per_cycle: int = 256
    scheme: str = "rk4"
    seed: int = 0
    escape_radius: float | None = None
    dt: float | None = None

    def __post_init__(self):
        if self.steps_per_cycle < 64:
            raise ValueError("steps_per_cycle must be at least 64")
        if self.scheme not in ("rk4", "em"):
            raise ValueError("scheme must be 'rk4' or 'em'")
        if self.dt is not None and self.dt <= 0.0:
            raise ValueError("dt must be positive")

    def step_size(self, trap: TrapGeometry | None) -> float:
        if self.dt is not None:
            return self.dt
        if trap is None:
            raise ValueError("no trap: set dt explicitly")
        return 2.0 * math.pi / trap.omega_ac / self.steps_per_cycle


@dataclass(frozen=True)
class SimulationSystem:
    """Everything static about a simulation: particle, fields, circuit, gas."""

    particle: RigidParticle
    trap: TrapGeometry | None = None
    pickup: PickupConfig | None = None
    circuit: CircuitSpec | None = None
    capacitor: PlateCapacitor | None = None
    gas: GasCoupling | None = None

    def __post_init__(self):
        if (self.circuit is None) != (self.pickup is None):
            raise ValueError("pickup and circuit must be configured together")


@dataclass
class SystemState:
    """Dynamic state: position, momentum, orientation, angular momentum, circuit."""

    r: np.ndarray
    P: np.ndarray
    body_frame: np.ndarray
    J: np.ndarray
    circuit: CircuitState = field(default_factory=CircuitState)
    t: float = 0.0

    def __post_init__(self):
        self.r = np.asarray(self.r, dtype=float).copy()
        self.P = np.asarray(self.P, dtype=float).copy()
        self.body_frame = np.asarray(self.body_frame, dtype=float).copy()
        self.J = np.asarray(self.J, dtype=float).copy()
        if self.body_frame.shape != (3, 3):
            raise ValueError("body_frame must be 3x3")
        if not np.allclose(self.body_frame @ self.body_frame.T, np.eye(3), atol=1e-8):
            raise ValueError("body_frame must be orthogonal")

    def to_vector(self) -> np.ndarray:
        y = np.empty(20)
        y[0:3] = self.r
        y[3:6] = self.P
        y[6:15] = self.body_frame.reshape(9)
        y[15:18] = self.J
        y[18] = self.circuit.Q
        y[19] = self.circuit.Phi
        return y

    @classmethod
    def from_vector(cls, y: np.ndarray, t: float) -> "SystemState":
        return cls(
            r=y[0:3],
            P=y[3:6],
            body_frame=y[6:15].reshape(3, 3),
            J=y[15:18],
            circuit=CircuitState(Q=float(y[18]), Phi=float(y[19])),
            t=t,
        )


def dressed_state(
    system: SimulationSystem,
    r: np.ndarray,
    body_frame: np.ndarray,
    P: np.ndarray | None = None,
    J: np.ndarray | None = None,
    circuit: CircuitState | None = None,
    t: float = 0.0,
) -> SystemState:
    """Macromotion initial condition dressed with its micromotion.

    Given macromotion coordinates at time t, returns the exact-dynamics
    state on the same macromotion orbit: position and orientation are
    displaced by the micromotion amplitudes at the drive phase, momenta
    by the periodic corrections.
    """
    if system.trap is None:
        raise ValueError("micromotion dressing requires a trap")
    r = np.asarray(r, dtype=float)
    body_frame = np.asarray(body_frame, dtype=float)
    P = np.zeros(3) if P is None else np.asarray(P, dtype=float)
    J = np.zeros(3) if J is None else np.asarray(J, dtype=float)
    eps0, delta0 = micromotion_amplitudes(system.trap, system.particle, r, body_frame)
    c = math.cos(system.trap.omega_ac * t)
    R_exact = r + c * eps0
    rot = _rodrigues(c * delta0)
    frame_exact = orthonormalize(rot @ body_frame)
    dP, dJ = momentum_micromotion_correction(
        system.trap, system.particle, R_exact, frame_exact, t
    )
    # exact momenta lag the macromotion by the drive-phase kick
    return SystemState(
        r=R_exact,
        P=P - dP,
        body_frame=frame_exact,
        J=J - dJ,
        circuit=circuit if circuit is not None else CircuitState(),
        t=t,
    )


def _rodrigues(v: np.ndarray) -> np.ndarray:
    angle = float(np.linalg.norm(v))
    if angle < 1e-16:
        return np.eye(3)
    k = v / angle
    K = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def _pack_params(system: SimulationSystem, mode: str, config: IntegratorConfig):
    particle = system.particle
    trap = system.trap
    flags = np.zeros(9, dtype=np.int64)
    scal = np.zeros(19)
    mats = np.zeros((4, 3, 3))
    vecs = np.zeros((7, 3))

    flags[0] = 0 if mode == "exact" else 1
    scal[0] = particle.mass
    scal[1] = particle.q
    mats[3] = particle.multipoles.Q_body
    vecs[0] = particle.multipoles.p_body
    vecs[1] = particle.inertia.as_array()

    if trap is not None:
        flags[1] = 1
        w = trap.omega_ac
        l2 = trap.ell0**2
        scal[2] = 1.0 / l2
        scal[3] = trap.U_dc
        scal[4] = trap.U_ac
        scal[5] = w
        scal[14] = trap.U_ac / (particle.mass * w**2 * l2)
        scal[15] = trap.U_ac / (w**2 * l2)
        scal[16] = trap.U_dc / l2
        scal[17] = trap.U_ac / (2.0 * l2)
        mats[0] = trap.A
        if trap.has_endcap:
            flags[2] = 1
            scal[6] = 2.0 * trap.endcap_coefficient
            mats[1] = trap.A_ec
        if trap.E_hom is not None:
            flags[3] = 1
            vecs[2] = trap.E_hom

    if system.capacitor is not None:
        flags[4] = 1
        scal[7] = system.capacitor.base_coefficient

    if system.pickup is not None:
        pk = system.pickup
        if isinstance(pk, LinearPickup):
            flags[5] = 1
            scal[8] = pk.k1 / pk.z0
        else:
            flags[5] = 2
            scal[8] = pk.k2 / (2.0 * pk.z0**2)
            mats[2] = pk.G
        circ = system.circuit
        flags[6] = 1 if circ.topology == "series" else 2
        scal[9] = 1.0 / circ.L
        scal[10] = 1.0 / circ.C
        if circ.topology == "series":
            scal[11] = circ.R / circ.L
        else:
            scal[12] = 1.0 / circ.R
        if config.scheme == "em":
            scal[13] = math.sqrt(noise_intensity(circ))

    if system.gas is not None:
        if config.scheme != "em":
            raise ValueError("gas coupling requires the stochastic scheme")
        flags[8] = 1
        vecs[3] = system.gas.gamma_cm
        vecs[4] = system.gas.gamma_rot
        kT = K_B * system.gas.T_gas
        vecs[5] = np.sqrt(2.0 * particle.mass * system.gas.gamma_cm * kT)
        vecs[6] = np.sqrt(2.0 * particle.inertia.as_array() * system.gas.gamma_rot * kT)

    flags[7] = 1 if config.scheme == "em" else 0

    if config.escape_radius is not None:
        scal[18] = config.escape_radius**2
    elif trap is not None:
        scal[18] = (10.0 * trap.ell0) ** 2
    else:
        scal[18] = np.inf
    return flags, scal, mats, vecs


_STATUS_NAMES = {
    _kernels.STATUS_OK: "ok",
    _kernels.STATUS_ESCAPED: "escaped",
    _kernels.STATUS_NONFINITE: "nonfinite",
}

TABLE_COLUMNS = (
    "t",
    "x",
    "y",
    "z",
    "Px",
    "Py",
    "Pz",
    "alpha",
    "beta",
    "gamma",
    "Jx",
    "Jy",
    "Jz",
    "Q",
    "Phi",
    "energy",
)


@dataclass
class TrajectoryResult:
    """Strided snapshots of one trajectory plus its termination status."""

    system: SimulationSystem
    mode: str
    status: str
    t: np.ndarray
    states: np.ndarray
    escape_time: float | None = None

    def state(self, i: int = -1) -> SystemState:
        return SystemState.from_vector(self.states[i], float(self.t[i]))

    def table(self) -> np.ndarray:
        """Columns: t, R, P, Euler angles, J, Q, Phi, energy."""
        n = len(self.t)
        out = np.empty((n, 16))
        out[:, 0] = self.t
        out[:, 1:7] = self.states[:, 0:6]
        out[:, 10:13] = self.states[:, 15:18]
        out[:, 13] = self.states[:, 18]
        out[:, 14] = self.states[:, 19]
        for i in range(n):
            frame = self.states[i, 6:15].reshape(3, 3)
            out[i, 7:10] = euler_from_matrix(frame)
            out[i, 15] = total_energy(
                self.system, SystemState.from_vector(self.states[i], float(self.t[i])), self.mode
            )
        return out


def total_energy(system: SimulationSystem, state: SystemState, mode: str = "exact") -> float:
    """Energy of the particle-circuit state.

    Exact mode: kinetic energies, instantaneous trap potential, image
    potential, and circuit energy including the induced charge.  Without
    a resistor and noise this is conserved.  Effective mode: kinetic
    plus the drive-averaged potential; conserved by the macromotion.
    """
    particle = system.particle
    kin = float(state.P @ state.P) / (2.0 * particle.mass)
    j_body = state.body_frame.T @ state.J
    kin += 0.5 * float(j_body @ (j_body / particle.inertia.as_array()))
    V = 0.0
    if system.trap is not None:
        if mode == "exact":
            V += instantaneous_potential(system.trap, particle, state.r, state.body_frame, state.t)
        else:
            V += effective_potential(system.trap, particle, state.r, state.body_frame)
    if system.capacitor is not None:
        V += image_potential(system.capacitor, particle, state.r, state.body_frame)
    E = kin + V
    if system.pickup is not None and mode == "exact":
        q_ind = induced_charge(system.pickup, particle, state.r, state.body_frame)
        E += circuit_energy(system.circuit, state.circuit, q_ind)
    return E


def transformed_total_energy(system: SimulationSystem, primed: SystemState) -> float:
    """Energy as a function of the shifted (primed) variables.

    Evaluates the Hamiltonian written in the variables produced by
    circuit.canonical_transform; on transformed states it equals
    total_energy of the original state.
    """
    if system.pickup is None:
        raise ValueError("transformed energy requires a pickup")
    particle = system.particle
    grad = induced_charge_gradient(system.pickup, particle, primed.r, primed.body_frame)
    T_vec = torque_per_voltage(system.pickup, particle, primed.r, primed.body_frame)
    P = primed.P + primed.circuit.Phi * grad
    J = primed.J + primed.circuit.Phi * T_vec
    kin = float(P @ P) / (2.0 * particle.mass)
    j_body = primed.body_frame.T @ J
    kin += 0.5 * float(j_body @ (j_body / particle.inertia.as_array()))
    V = 0.0
    if system.trap is not None:
        V += instantaneous_potential(system.trap, particle, primed.r, primed.body_frame, primed.t)
    if system.capacitor is not None:
        V += image_potential(system.capacitor, particle, primed.r, primed.body_frame)
    circ = system.circuit
    E_circ = primed.circuit.Phi**2 / (2.0 * circ.L) + primed.circuit.Q**2 / (2.0 * circ.C)
    return kin + V + E_circ


def run_trajectory(
    system: SimulationSystem,
    state: SystemState,
    duration: float,
    config: IntegratorConfig,
    mode: str = "exact",
    stride: int = 1,
) -> TrajectoryResult:
    """Integrate for the given duration, recording every stride-th step.

    Row 0 of the result is the initial state; integration stops early
    on escape (|R| beyond the escape radius) or non-finite state, with
    the status recorded.
    """
    if mode not in ("exact", "effective"):
        raise ValueError("mode must be 'exact' or 'effective'")
    if mode == "effective" and config.scheme == "em":
        raise ValueError("the stochastic scheme runs on the exact dynamics")
    if stride < 1:
        raise ValueError("stride must be positive")
    dt = config.step_size(system.trap)
    n_steps = int(round(duration / dt))
    flags, scal, mats, vecs = _pack_params(system, mode, config)

    y = state.to_vector()
    t0 = state.t
    n_rows = n_steps // stride + 1
    out = np.empty((n_rows, 21))
    out[0, 0] = t0
    out[0, 1:] = y

    rng = np.random.Generator(np.random.Philox(key=config.seed))
    empty_noise = np.empty((0, 7))
    stochastic = config.scheme == "em"

    status = _kernels.STATUS_OK
    g = 0
    while g < n_steps:
        nc = min(_CHUNK, n_steps - g)
        noise = rng.standard_normal((nc, 7)) if stochastic else empty_noise
        status, done = _kernels.integrate(
            y, t0, dt, g, nc, stride, flags, scal, mats, vecs, noise, out
        )
        g += done
        if status != _kernels.STATUS_OK:
            break

    valid_rows = g // stride + 1
    escape_time = t0 + g * dt if status == _kernels.STATUS_ESCAPED else None
    return TrajectoryResult(
        system=system,
        mode=mode,
        status=_STATUS_NAMES[status],
        t=out[:valid_rows, 0].copy(),
        states=out[:valid_rows, 1:].copy(),
        escape_time=escape_time,
    )


def _single_step(system, state, config, mode):
    dt = config.step_size(system.trap)
    flags, scal, mats, vecs = _pack_params(system, mode, config)
    y = state.to_vector()
    out = np.empty((2, 21))
    if config.scheme == "em":
        rng = np.random.Generator(np.random.Philox(key=config.seed))
        noise = rng.standard_normal((1, 7))
    else:
        noise = np.empty((0, 7))
    _kernels.integrate(y, state.t, dt, 0, 1, 1, flags, scal, mats, vecs, noise, out)
    return SystemState.from_vector(y, state.t + dt)


def step_exact(system: SimulationSystem, state: SystemState, config: IntegratorConfig) -> SystemState:
    """One deterministic RK4 step of the full time-dependent dynamics."""
    return _single_step(system, state, replace(config, scheme="rk4"), "exact")


def step_effective(system: SimulationSystem, state: SystemState, config: IntegratorConfig) -> SystemState:
    """One deterministic RK4 step of the drive-averaged macromotion."""
    return _single_step(system, state, replace(config, scheme="rk4"), "effective")


def step_stochastic(system: SimulationSystem, state: SystemState, config: IntegratorConfig) -> SystemState:
    """One Euler-Maruyama step with gas and circuit noise."""
    return _single_step(system, state, replace(config, scheme="em"), "exact")


def run_ensemble(
    system: SimulationSystem,
    states: list[SystemState],
    duration: float,
    config: IntegratorConfig,
    mode: str = "exact",
    stride: int = 1,
    jobs: int = 1,
) -> list[TrajectoryResult]:
    """Integrate several trajectories; member k runs with seed ^ k."""

    def one(k_state):
        k, st = k_state
        cfg = replace(config, seed=config.seed ^ k)
        return run_trajectory(system, st, duration, cfg, mode=mode, stride=stride)

    items = list(enumerate(states))
    if jobs <= 1 or len(items) <= 1:
        return [one(it) for it in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(one, items))


def axial_ring_ensemble(
    trap: TrapGeometry,
    q: float,
    mass: float,
    gamma: float,
    T_gas: float,
    *,
    n_traj: int = 1024,
    steps_per_cycle: int = 200,
    equil_cycles: int = 800,
    n_epochs: int = 100,
    epoch_cycles: int = 390,
    phases: tuple[float, ...] = (0.0, 0.25),
    seed: int = 0,
) -> dict:
    """Thermal ensemble of the axial motion of a point charge in a ring trap.

    The z-force of the ring field is linear in z and independent of the
    other coordinates, so many stochastic trajectories integrate as flat
    arrays.  After equil_cycles of burn-in, each trajectory is sampled
    once per epoch at the requested drive-phase fractions, with epochs
    spaced epoch_cycles apart to decorrelate samples.  Returns the
    per-phase momentum samples and the cycle-averaged kinetic energy
    sum P^2/2m over every post-burn-in step.
    """
    A = trap.A
    if abs(A[2, 0]) > 0.0 or abs(A[2, 1]) > 0.0:
        raise ValueError("axial motion must decouple: A must not mix z with x, y")
    c_dc = -q * trap.U_dc * A[2, 2] / trap.ell0**2
    c_ac = -q * trap.U_ac * A[2, 2] / trap.ell0**2
    dt = 2.0 * math.pi / trap.omega_ac / steps_per_cycle
    amp = math.sqrt(2.0 * mass * gamma * K_B * T_gas)
    rng = np.random.Generator(np.random.Philox(key=seed))

    z = np.zeros(n_traj)
    P = np.zeros(n_traj)
    state = {"g": 0, "acc": 0.0, "count": 0}
    max_chunk = max(1, (1 << 22) // n_traj)

    def advance(n_steps: int, accumulate: bool) -> None:
        left = n_steps
        while left > 0:
            nc = min(max_chunk, left)
            noise = rng.standard_normal((nc, n_traj))
            state["acc"] += _kernels.axial_chunk(
                z, P, state["g"], nc, dt, c_dc, c_ac, trap.omega_ac,
                mass, gamma, amp, noise, accumulate,
            )
            state["g"] += nc
            left -= nc
        if accumulate:
            state["count"] += n_steps * n_traj

    advance(equil_cycles * steps_per_cycle, False)

    offsets = sorted((round(ph * steps_per_cycle), ph) for ph in phases)
    if offsets and offsets[-1][0] >= epoch_cycles * steps_per_cycle:
        raise ValueError("phase offset beyond epoch length")
    samples: dict[float, list[np.ndarray]] = {ph: [] for ph in phases}
    epoch_steps = epoch_cycles * steps_per_cycle
    for _ in range(n_epochs):
        pos = 0
        for off, ph in offsets:
            if off > pos:
                advance(off - pos, True)
                pos = off
            samples[ph].append(P.copy())
        advance(epoch_steps - pos, True)

    mean_kinetic = state["acc"] / (2.0 * mass * state["count"])
    return {
        "phases": {ph: np.concatenate(samples[ph]) for ph in phases},
        "mean_kinetic": mean_kinetic,
        "kT": K_B * T_gas,
        "dt": dt,
        "n_samples": n_epochs * n_traj,
    }
