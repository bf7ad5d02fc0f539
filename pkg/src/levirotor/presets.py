"""Ready-made parameter sets for representative trap experiments.

Every preset builds a plain configuration mapping in the schema of
levirotor.config, with all quantities already in SI units (angular
frequencies in rad/s).  The mappings are freshly constructed on each
call, so callers may mutate them freely before loading.
"""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .charges import SymmetricParticleSpec
from .circuit import CircuitSpec, LinearPickup
from .constants import AMU, ELEMENTARY_CHARGE, K_B, TWO_PI
from .kinematics import body_axes
from .linmodel import LinearModel, build_model
from .trap import linear_trap


def ring_rotor() -> dict:
    """Asymmetric charged nanorotor in a ring trap, drive at 75 MHz.

    A 1e6 amu particle carrying 200 elementary charges with all three
    inertia moments distinct and a generic dipole and quadrupole.  The
    initial state sits near an orientational minimum of the macromotion
    potential, displaced in the polar angle so that the angle oscillates
    with a well-resolved amplitude.
    """
    q = 200.0 * ELEMENTARY_CHARGE
    ell = 12e-9
    I0 = 2.8e-38
    p_scale = q * ell
    Q_scale = q * ell**2
    dipole = [0.0025 * p_scale, 0.0022 * p_scale, 0.007 * p_scale]
    # orientational minimum of the drive-averaged potential, polar angle
    # pulled back by 0.3 rad so the macromotion oscillates visibly
    euler0 = [3.332395860585142, 1.5475201474273737, 1.694045832387109]
    r0 = -body_axes(*euler0) @ np.asarray(dipole) / q
    return {
        "particle": {
            "mass": 1e6 * AMU,
            "charge": q,
            "inertia": [I0, 0.92 * I0, 0.55 * I0],
            "dipole": dipole,
            "quadrupole": [
                [-0.13 * Q_scale, 0.08 * Q_scale, 0.24 * Q_scale],
                [0.08 * Q_scale, -0.04 * Q_scale, 0.03 * Q_scale],
                [0.24 * Q_scale, 0.03 * Q_scale, 0.17 * Q_scale],
            ],
        },
        "trap": {
            "kind": "ring",
            "ell0": 0.25e-3 * math.sqrt(2.0),
            "U_dc": 0.0,
            "U_ac": 750.0,
            "omega_ac": TWO_PI * 75e6,
        },
        "run": {
            "duration": 250e-6,
            "mode": "exact",
            "scheme": "rk4",
            "steps_per_cycle": 256,
            "stride": 64,
            "seed": 0,
        },
        "initial": {
            "r": [float(x) for x in r0],
            "euler": euler0,
            "dressed": True,
        },
    }


# dimensionless drive, temperature and friction of the thermal ensemble
_THERMAL_DRIVE = 0.0034
_THERMAL_TEMP = 0.034
_THERMAL_FRICTION = 0.02


def thermal_ring() -> dict:
    """Gas-thermalized point charge in a ring trap.

    The physics is fixed by three ratios: q U_ac / (m w_ac^2 l0^2),
    k_B T / (m w_ac^2 l0^2) and Gamma / w_ac.  The absolute scales below
    merely instantiate them.
    """
    mass = 1e9 * AMU
    q = 100.0 * ELEMENTARY_CHARGE
    omega_ac = TWO_PI * 1e6
    ell0 = 100e-6
    scale = mass * omega_ac**2 * ell0**2
    return {
        "particle": {
            "mass": mass,
            "charge": q,
            "inertia": [1e-32, 1e-32, 1e-32],
        },
        "trap": {
            "kind": "ring",
            "ell0": ell0,
            "U_dc": 0.0,
            "U_ac": _THERMAL_DRIVE * scale / q,
            "omega_ac": omega_ac,
        },
        "gas": {
            "gamma_cm": _THERMAL_FRICTION * omega_ac,
            "gamma_rot": 0.0,
            "T": _THERMAL_TEMP * scale / K_B,
        },
        "run": {
            "duration": 200e-6,
            "mode": "exact",
            "scheme": "em",
            "steps_per_cycle": 200,
            "stride": 50,
            "seed": 0,
            # thermal excursions reach tens of l0; the trap stays harmonic
            "escape_radius": 1e4 * 100e-6,
        },
    }


def _axial_resonant_endcap(
    q: float,
    ell: float,
    ell0: float,
    mass: float,
    k_pick: float,
    L_cm: float,
    C_cm: float,
    ell_ec: float,
) -> float:
    """Endcap voltage that parks the axial normal mode on 1/sqrt(L C).

    The bare axial frequency is not the right tuning target: the static
    dipole couples the axial and polar modes, and their repulsion pushes
    the axial normal mode tens of hertz down.  Detuned by a linewidth,
    the first cooling stage stalls, so the voltage is solved for on the
    eigenfrequency itself.  Particle and drive here must mirror
    staged_cooling().
    """
    spec = SymmetricParticleSpec(
        q=q, p3=0.1 * q * ell, Q3=0.15 * q * ell**2, I=3.52e-27, I3=1.76e-27
    )
    pickup = LinearPickup(k1=k_pick, z0=ell0)
    circuit = CircuitSpec(topology="parallel", R=2e6, L=L_cm, C=C_cm, T=4.0)
    f_lc = 1.0 / math.sqrt(L_cm * C_cm) / TWO_PI

    def detune(U_ec: float) -> float:
        trap = linear_trap(
            ell0, 5000.0, TWO_PI * 750e3, 0.0, ell_ec=ell_ec, U_ec=U_ec, k_ec=1.0
        )
        model = build_model(trap, pickup, spec, mass, circuit, 0.0, 0.0, 300.0)
        lam = np.linalg.eigvals(model.B)
        freq = np.abs(lam.imag) / TWO_PI
        # the axial mode: weakly damped, far below the polar branch
        sel = (np.abs(lam.real) < 5.0) & (freq < 3000.0) & (freq > 0.0)
        if not sel.any():
            raise RuntimeError("no axial mode in bracket")
        return float(freq[sel].mean()) - f_lc

    return scipy.optimize.brentq(detune, 7.5, 8.8, xtol=1e-9)


def staged_cooling() -> dict:
    """Symmetric microparticle in an endcapped linear trap with pickup circuit.

    The configuration carries the centre-of-mass cooling stage of the
    two-stage scheme; staged_cooling_stages() builds both stages as
    linear models.  The run block covers a short exact-dynamics window
    only, since full cooling takes minutes of trap time.
    """
    q = 1e5 * ELEMENTARY_CHARGE
    ell = 2.5e-6
    ell0 = 250e-6 * math.sqrt(2.0)
    mass = 3.5e12 * AMU
    k_pick = 0.4
    L_cm = 0.565
    C_cm = 10e-9
    ell_ec = 2.0 * ell0
    U_ec = _axial_resonant_endcap(q, ell, ell0, mass, k_pick, L_cm, C_cm, ell_ec)
    return {
        "particle": {
            "mass": mass,
            "charge": q,
            "symmetric": {
                "p3": 0.1 * q * ell,
                "Q3": 0.15 * q * ell**2,
                "I": 3.52e-27,
                "I3": 1.76e-27,
            },
        },
        "trap": {
            "kind": "linear",
            "ell0": ell0,
            "U_dc": 0.0,
            "U_ac": 5000.0,
            "omega_ac": TWO_PI * 750e3,
            "endcap": {"ell_ec": ell_ec, "U_ec": U_ec, "k_ec": 1.0},
        },
        "pickup": {"type": "linear", "k": k_pick, "z0": ell0},
        "circuit": {
            "topology": "parallel",
            "R": 2e6,
            "L": L_cm,
            "C": C_cm,
            "T": 4.0,
        },
        "gas": {"gamma_cm": 4.5e-6, "gamma_rot": 7.8e-6, "T": 300.0},
        "run": {
            "duration": 4e-3,
            "mode": "exact",
            "scheme": "em",
            "steps_per_cycle": 128,
            "stride": 32,
            "seed": 0,
        },
    }


# rotational-stage circuit of the staged cooling scheme
_ROT_STAGE = {"R": 11.15e6, "C": 1.794e-9}
# stage durations chosen so each mode sheds well over a decade of energy
STAGE_DURATIONS = (45.0, 180.0)


@dataclass(frozen=True)
class CoolingStages:
    """Both cooling stages as linear models plus the shared start state."""

    models: tuple[LinearModel, LinearModel]
    durations: tuple[float, float]
    xi0: np.ndarray
    T_gas: float


def staged_cooling_stages(
    stage1: float | None = None, stage2: float | None = None
) -> CoolingStages:
    """Linear models of the centre-of-mass and rotational cooling stages.

    The initial state is a gas-equilibrated particle: both kinetic
    energies start at k_B T_gas, with small circuit excitations.
    """
    cfg = staged_cooling()
    part = cfg["particle"]
    sym = part["symmetric"]
    spec = SymmetricParticleSpec(
        q=part["charge"], p3=sym["p3"], Q3=sym["Q3"], I=sym["I"], I3=sym["I3"]
    )
    mass = part["mass"]
    tr = cfg["trap"]
    trap = linear_trap(
        tr["ell0"],
        tr["U_ac"],
        tr["omega_ac"],
        tr["U_dc"],
        ell_ec=tr["endcap"]["ell_ec"],
        U_ec=tr["endcap"]["U_ec"],
        k_ec=tr["endcap"]["k_ec"],
    )
    pickup = LinearPickup(k1=cfg["pickup"]["k"], z0=cfg["pickup"]["z0"])
    cc = cfg["circuit"]
    gas = cfg["gas"]
    circuit_cm = CircuitSpec(topology="parallel", R=cc["R"], L=cc["L"], C=cc["C"], T=cc["T"])
    circuit_rot = CircuitSpec(
        topology="parallel", R=_ROT_STAGE["R"], L=cc["L"], C=_ROT_STAGE["C"], T=cc["T"]
    )
    args = (trap, pickup, spec, mass, )
    rates = dict(gamma_z=gas["gamma_cm"], gamma_beta=gas["gamma_rot"], T_gas=gas["T"])
    model_cm = build_model(*args, circuit_cm, **rates)
    model_rot = build_model(*args, circuit_rot, **rates)

    T = gas["T"]
    e = ELEMENTARY_CHARGE
    xi0 = np.array(
        [
            0.0,
            0.0,
            -4.8 * e,
            -math.sqrt(2.0 * mass * K_B * T),
            -math.sqrt(2.0 * spec.I * K_B * T),
            0.4 * e * cc["L"] * model_cm.omega_z,
        ]
    )
    durations = (
        STAGE_DURATIONS[0] if stage1 is None else stage1,
        STAGE_DURATIONS[1] if stage2 is None else stage2,
    )
    return CoolingStages(
        models=(model_cm, model_rot), durations=durations, xi0=xi0, T_gas=T
    )


def stability_sweep(kappa: float = 0.5) -> dict:
    """Point charge in an endcapped linear trap at a chosen dc parameter.

    kappa measures the endcap defocusing against the drive focusing; the
    centre of mass is confined iff 0 < kappa < 1.  The drive strength
    sits at a dimensionless Mathieu parameter of 0.2.
    """
    mass = 1e7 * AMU
    q = 200.0 * ELEMENTARY_CHARGE
    omega_ac = TWO_PI * 2e6
    ell0 = 200e-6
    ell_ec = 2.0 * ell0
    U_ac = 0.1 * mass * omega_ac**2 * ell0**2 / q
    U_ec = kappa * q * (U_ac * ell_ec) ** 2 / (4.0 * mass * (omega_ac * ell0**2) ** 2)
    return {
        "particle": {
            "mass": mass,
            "charge": q,
            "inertia": [1e-33, 1e-33, 1e-33],
        },
        "trap": {
            "kind": "linear",
            "ell0": ell0,
            "U_dc": 0.0,
            "U_ac": U_ac,
            "omega_ac": omega_ac,
            "endcap": {"ell_ec": ell_ec, "U_ec": U_ec, "k_ec": 1.0},
        },
        "run": {
            "duration": 3000.0 * TWO_PI / omega_ac,
            "mode": "exact",
            "scheme": "rk4",
            "steps_per_cycle": 128,
            "stride": 128,
            "seed": 0,
        },
        "initial": {
            "r": [0.05 * ell0, 0.04 * ell0, 0.06 * ell0],
        },
    }


PRESETS: dict[str, tuple] = {
    "ring-rotor": (ring_rotor, "asymmetric nanorotor in a ring trap, exact vs effective"),
    "thermal-ring": (thermal_ring, "gas-thermalized charge in a ring trap"),
    "staged-cooling": (staged_cooling, "microparticle with pickup circuit, cooling stages"),
    "stability-sweep": (stability_sweep, "linear-trap dc stability scan particle"),
}


def get_preset(name: str) -> dict:
    """A fresh configuration mapping for the named preset."""
    try:
        builder = PRESETS[name][0]
    except KeyError:
        known = ", ".join(sorted(PRESETS))
        raise KeyError(f"unknown preset {name!r} (known: {known})") from None
    return copy.deepcopy(builder())
