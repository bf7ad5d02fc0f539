"""YAML run configuration: schema validation and unit-aware parsing.

A configuration is a nested mapping with the sections

    particle   mass, charge and multipole moments (or a symmetric shortcut)
    trap       quadrupole trap geometry and drive
    pickup     electrode geometry coupling the particle to the circuit
    circuit    lumped RLC parameters and noise temperature
    capacitor  grounded plate pair generating image charges
    gas        linear friction rates and gas temperature
    run        integrator choices, duration, seeding
    initial    optional explicit initial state

Scalar values may be plain numbers (SI base units, angular frequencies
in rad/s) or strings with a unit suffix such as "750 V", "75 MHz",
"0.25 mm".  Frequencies given in Hz multiply by 2 pi; damping rates use
the kind "rate" where Hz means 1/s.  Unknown keys and unknown units are
rejected with the offending path in the message.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from .charges import MultipoleDistribution, SymmetricParticleSpec
from .circuit import CircuitSpec, LinearPickup, PickupConfig, QuadrupolePickup
from .constants import AMU, ELEMENTARY_CHARGE, TWO_PI
from .engine import (
    GasCoupling,
    IntegratorConfig,
    SimulationSystem,
    SystemState,
    dressed_state,
)
from .circuit import CircuitState
from .images import PlateCapacitor
from .kinematics import InertiaSpec, body_axes
from .particle import RigidParticle
from .trap import linear_trap, ring_trap


class ConfigError(ValueError):
    """Invalid configuration: bad key, bad unit, or missing field."""


_E = ELEMENTARY_CHARGE

_UNITS: dict[str, dict[str, float]] = {
    "voltage": {"V": 1.0, "mV": 1e-3, "uV": 1e-6, "kV": 1e3, "MV": 1e6},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6, "µm": 1e-6, "nm": 1e-9},
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6, "ug": 1e-9, "amu": AMU, "u": AMU},
    "frequency": {
        "rad/s": 1.0,
        "krad/s": 1e3,
        "Mrad/s": 1e6,
        "Hz": TWO_PI,
        "kHz": TWO_PI * 1e3,
        "MHz": TWO_PI * 1e6,
        "GHz": TWO_PI * 1e9,
    },
    "rate": {"1/s": 1.0, "Hz": 1.0, "mHz": 1e-3, "uHz": 1e-6, "kHz": 1e3},
    "resistance": {"ohm": 1.0, "Ohm": 1.0, "kohm": 1e3, "Mohm": 1e6, "Gohm": 1e9},
    "inductance": {"H": 1.0, "mH": 1e-3, "uH": 1e-6, "nH": 1e-9},
    "capacitance": {"F": 1.0, "mF": 1e-3, "uF": 1e-6, "nF": 1e-9, "pF": 1e-12},
    "temperature": {"K": 1.0, "mK": 1e-3, "uK": 1e-6},
    "charge": {"C": 1.0, "e": _E, "fC": 1e-15, "aC": 1e-18},
    "dipole": {"C m": 1.0, "e m": _E, "e um": _E * 1e-6, "e nm": _E * 1e-9},
    "quadrupole": {
        "C m^2": 1.0,
        "e m^2": _E,
        "e um^2": _E * 1e-12,
        "e nm^2": _E * 1e-18,
    },
    "inertia": {"kg m^2": 1.0},
    "field": {"V/m": 1.0, "kV/m": 1e3, "V/mm": 1e3, "V/cm": 1e2},
    "time": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "min": 60.0},
    "angle": {"rad": 1.0, "mrad": 1e-3, "deg": math.pi / 180.0},
    "momentum": {"kg m/s": 1.0},
    "angular momentum": {"kg m^2/s": 1.0, "J s": 1.0},
    "flux": {"Wb": 1.0, "V s": 1.0, "mWb": 1e-3, "uWb": 1e-6},
    "dimensionless": {},
}

_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)\s*(.*?)\s*$")


def parse_quantity(value, kind: str, path: str = "value") -> float:
    """Convert a number or a "number unit" string to SI (rad/s for frequency)."""
    table = _UNITS[kind]
    if isinstance(value, bool):
        raise ConfigError(f"{path}: expected a quantity, got a boolean")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise ConfigError(f"{path}: expected a number or 'number unit' string")
    m = _NUMBER.match(value)
    if not m:
        raise ConfigError(f"{path}: cannot parse quantity {value!r}")
    num, unit = m.groups()
    if unit == "":
        return float(num)
    if unit not in table:
        allowed = ", ".join(sorted(table)) or "none (bare number)"
        raise ConfigError(f"{path}: unknown {kind} unit {unit!r} (allowed: {allowed})")
    return float(num) * table[unit]


def _parse_vector(value, kind: str, path: str, n: int = 3) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != n:
        raise ConfigError(f"{path}: expected a list of {n} quantities")
    return np.array([parse_quantity(v, kind, f"{path}[{i}]") for i, v in enumerate(value)])


def _parse_matrix(value, kind: str, path: str) -> np.ndarray:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ConfigError(f"{path}: expected a 3x3 nested list")
    return np.stack([_parse_vector(row, kind, f"{path}[{i}]") for i, row in enumerate(value)])


def _section(cfg: dict, name: str, required: bool = False) -> dict | None:
    d = cfg.get(name)
    if d is None:
        if required:
            raise ConfigError(f"missing required section '{name}'")
        return None
    if not isinstance(d, dict):
        raise ConfigError(f"section '{name}' must be a mapping")
    return d


def _check_keys(d: dict, allowed: set[str], path: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)} (allowed: {sorted(allowed)})")


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise ConfigError(f"{path}: missing required key '{key}'")
    return d[key]


def _build_particle(d: dict) -> RigidParticle:
    _check_keys(d, {"mass", "charge", "inertia", "dipole", "quadrupole", "symmetric"}, "particle")
    mass = parse_quantity(_require(d, "mass", "particle"), "mass", "particle.mass")
    if "symmetric" in d:
        if "inertia" in d or "dipole" in d or "quadrupole" in d:
            raise ConfigError("particle: 'symmetric' replaces inertia/dipole/quadrupole")
        s = d["symmetric"]
        _check_keys(s, {"p3", "Q3", "I", "I3"}, "particle.symmetric")
        spec = SymmetricParticleSpec(
            q=parse_quantity(_require(d, "charge", "particle"), "charge", "particle.charge"),
            p3=parse_quantity(s.get("p3", 0.0), "dipole", "particle.symmetric.p3"),
            Q3=parse_quantity(s.get("Q3", 0.0), "quadrupole", "particle.symmetric.Q3"),
            I=parse_quantity(_require(s, "I", "particle.symmetric"), "inertia", "particle.symmetric.I"),
            I3=parse_quantity(_require(s, "I3", "particle.symmetric"), "inertia", "particle.symmetric.I3"),
        )
        return RigidParticle.from_symmetric(spec, mass)
    inertia = _parse_vector(_require(d, "inertia", "particle"), "inertia", "particle.inertia")
    q = parse_quantity(_require(d, "charge", "particle"), "charge", "particle.charge")
    p_body = (
        _parse_vector(d["dipole"], "dipole", "particle.dipole")
        if "dipole" in d
        else np.zeros(3)
    )
    Q_body = (
        _parse_matrix(d["quadrupole"], "quadrupole", "particle.quadrupole")
        if "quadrupole" in d
        else np.zeros((3, 3))
    )
    return RigidParticle(
        mass=mass,
        inertia=InertiaSpec(*inertia),
        multipoles=MultipoleDistribution(q=q, p_body=p_body, Q_body=Q_body),
    )


def _build_trap(d: dict):
    _check_keys(d, {"kind", "ell0", "U_dc", "U_ac", "omega_ac", "endcap", "field"}, "trap")
    kind = _require(d, "kind", "trap")
    ell0 = parse_quantity(_require(d, "ell0", "trap"), "length", "trap.ell0")
    U_dc = parse_quantity(d.get("U_dc", 0.0), "voltage", "trap.U_dc")
    U_ac = parse_quantity(d.get("U_ac", 0.0), "voltage", "trap.U_ac")
    omega = parse_quantity(_require(d, "omega_ac", "trap"), "frequency", "trap.omega_ac")
    E_hom = _parse_vector(d["field"], "field", "trap.field") if "field" in d else None
    if kind == "ring":
        if "endcap" in d:
            raise ConfigError("trap: endcaps apply to the linear geometry only")
        return ring_trap(ell0, U_dc, U_ac, omega, E_hom=E_hom)
    if kind == "linear":
        ec = d.get("endcap", {})
        _check_keys(ec, {"ell_ec", "U_ec", "k_ec"}, "trap.endcap")
        return linear_trap(
            ell0,
            U_ac,
            omega,
            U_dc,
            ell_ec=parse_quantity(ec.get("ell_ec", 0.0), "length", "trap.endcap.ell_ec"),
            U_ec=parse_quantity(ec.get("U_ec", 0.0), "voltage", "trap.endcap.U_ec"),
            k_ec=parse_quantity(ec.get("k_ec", 0.0), "dimensionless", "trap.endcap.k_ec"),
            E_hom=E_hom,
        )
    raise ConfigError(f"trap.kind: expected 'ring' or 'linear', got {kind!r}")


def _build_pickup(d: dict) -> PickupConfig:
    _check_keys(d, {"type", "k", "z0", "tensor"}, "pickup")
    kind = d.get("type", "linear")
    k = parse_quantity(_require(d, "k", "pickup"), "dimensionless", "pickup.k")
    z0 = parse_quantity(_require(d, "z0", "pickup"), "length", "pickup.z0")
    if kind == "linear":
        if "tensor" in d:
            raise ConfigError("pickup: 'tensor' applies to the quadrupole type only")
        return LinearPickup(k1=k, z0=z0)
    if kind == "quadrupole":
        G = _parse_matrix(_require(d, "tensor", "pickup"), "dimensionless", "pickup.tensor")
        return QuadrupolePickup(k2=k, z0=z0, G=G)
    raise ConfigError(f"pickup.type: expected 'linear' or 'quadrupole', got {kind!r}")


def _build_circuit(d: dict) -> CircuitSpec:
    _check_keys(d, {"topology", "R", "L", "C", "T"}, "circuit")
    return CircuitSpec(
        topology=_require(d, "topology", "circuit"),
        R=parse_quantity(_require(d, "R", "circuit"), "resistance", "circuit.R"),
        L=parse_quantity(_require(d, "L", "circuit"), "inductance", "circuit.L"),
        C=parse_quantity(_require(d, "C", "circuit"), "capacitance", "circuit.C"),
        T=parse_quantity(d.get("T", 0.0), "temperature", "circuit.T"),
    )


def _build_gas(d: dict) -> GasCoupling:
    _check_keys(d, {"gamma_cm", "gamma_rot", "T"}, "gas")

    def rates(key):
        v = d.get(key, 0.0)
        if isinstance(v, (list, tuple)):
            return _parse_vector(v, "rate", f"gas.{key}")
        return np.full(3, parse_quantity(v, "rate", f"gas.{key}"))

    return GasCoupling(
        gamma_cm=rates("gamma_cm"),
        gamma_rot=rates("gamma_rot"),
        T_gas=parse_quantity(d.get("T", 0.0), "temperature", "gas.T"),
    )


@dataclass(frozen=True)
class RunSettings:
    """What to integrate and how to report it."""

    duration: float
    mode: str = "exact"
    stride: int = 1

    def __post_init__(self):
        if self.duration <= 0.0:
            raise ConfigError("run.duration must be positive")
        if self.mode not in ("exact", "effective"):
            raise ConfigError("run.mode must be 'exact' or 'effective'")
        if self.stride < 1:
            raise ConfigError("run.stride must be at least 1")


def _build_run(d: dict) -> tuple[IntegratorConfig, RunSettings]:
    _check_keys(
        d,
        {"duration", "mode", "scheme", "steps_per_cycle", "dt", "seed", "stride", "escape_radius"},
        "run",
    )
    dt = parse_quantity(d["dt"], "time", "run.dt") if "dt" in d else None
    esc = (
        parse_quantity(d["escape_radius"], "length", "run.escape_radius")
        if "escape_radius" in d
        else None
    )
    seed = d.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ConfigError("run.seed must be an integer")
    try:
        integ = IntegratorConfig(
            steps_per_cycle=int(d.get("steps_per_cycle", 256)),
            scheme=d.get("scheme", "rk4"),
            seed=seed,
            escape_radius=esc,
            dt=dt,
        )
        run = RunSettings(
            duration=parse_quantity(_require(d, "duration", "run"), "time", "run.duration"),
            mode=d.get("mode", "exact"),
            stride=int(d.get("stride", 1)),
        )
    except ValueError as err:
        raise ConfigError(f"run: {err}") from err
    return integ, run


def _build_initial(d: dict, system: SimulationSystem) -> SystemState:
    _check_keys(d, {"r", "P", "euler", "J", "circuit", "dressed", "t"}, "initial")
    r = _parse_vector(d["r"], "length", "initial.r") if "r" in d else np.zeros(3)
    P = _parse_vector(d["P"], "momentum", "initial.P") if "P" in d else np.zeros(3)
    J = (
        _parse_vector(d["J"], "angular momentum", "initial.J")
        if "J" in d
        else np.zeros(3)
    )
    if "euler" in d:
        ang = _parse_vector(d["euler"], "angle", "initial.euler")
        frame = body_axes(*ang)
    else:
        frame = np.eye(3)
    circ = CircuitState()
    if "circuit" in d:
        c = d["circuit"]
        _check_keys(c, {"Q", "Phi"}, "initial.circuit")
        circ = CircuitState(
            Q=parse_quantity(c.get("Q", 0.0), "charge", "initial.circuit.Q"),
            Phi=parse_quantity(c.get("Phi", 0.0), "flux", "initial.circuit.Phi"),
        )
    t0 = parse_quantity(d.get("t", 0.0), "time", "initial.t")
    if d.get("dressed", False):
        return dressed_state(system, r, frame, P=P, J=J, circuit=circ, t=t0)
    return SystemState(r=r, P=P, body_frame=frame, J=J, circuit=circ, t=t0)


@dataclass(frozen=True)
class RunConfig:
    """Everything a simulation run needs, assembled from one mapping."""

    system: SimulationSystem
    integrator: IntegratorConfig
    run: RunSettings
    initial: SystemState
    raw: dict


_TOP_KEYS = {"particle", "trap", "pickup", "circuit", "capacitor", "gas", "run", "initial"}


def load_config(source) -> RunConfig:
    """Build a RunConfig from a YAML file path, YAML text, or a mapping."""
    if isinstance(source, dict):
        cfg = source
    else:
        try:
            is_file = Path(str(source)).is_file()
        except (OSError, ValueError):
            is_file = False
        text = Path(source).read_text() if is_file else str(source)
        cfg = yaml.safe_load(text)
    if not isinstance(cfg, dict):
        raise ConfigError("configuration must be a mapping")
    _check_keys(cfg, _TOP_KEYS, "top level")

    particle = _build_particle(_section(cfg, "particle", required=True))
    trap_d = _section(cfg, "trap")
    pickup_d = _section(cfg, "pickup")
    circuit_d = _section(cfg, "circuit")
    cap_d = _section(cfg, "capacitor")
    gas_d = _section(cfg, "gas")

    capacitor = None
    if cap_d is not None:
        _check_keys(cap_d, {"z0"}, "capacitor")
        capacitor = PlateCapacitor(
            z0=parse_quantity(_require(cap_d, "z0", "capacitor"), "length", "capacitor.z0")
        )
    try:
        system = SimulationSystem(
            particle=particle,
            trap=_build_trap(trap_d) if trap_d is not None else None,
            pickup=_build_pickup(pickup_d) if pickup_d is not None else None,
            circuit=_build_circuit(circuit_d) if circuit_d is not None else None,
            capacitor=capacitor,
            gas=_build_gas(gas_d) if gas_d is not None else None,
        )
    except ValueError as err:
        if isinstance(err, ConfigError):
            raise
        raise ConfigError(str(err)) from err

    integ, run = _build_run(_section(cfg, "run", required=True))
    init_d = _section(cfg, "initial")
    initial = (
        _build_initial(init_d, system)
        if init_d is not None
        else SystemState(r=np.zeros(3), P=np.zeros(3), body_frame=np.eye(3), J=np.zeros(3))
    )
    return RunConfig(system=system, integrator=integ, run=run, initial=initial, raw=cfg)
