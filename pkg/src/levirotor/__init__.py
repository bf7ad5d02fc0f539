"""Charged rigid rotors in quadrupole traps coupled to RLC circuits.

The package integrates the exact time-dependent dynamics of a levitated
charged particle with dipole and quadrupole moments, the drive-averaged
macromotion in the corresponding effective potential, image-charge
interactions with pickup electrodes, and the induced-charge coupling to
a series or parallel RLC circuit, including Johnson noise and gas
friction.  A linearized six-state model covers resistive cooling of the
axial and polar modes, with closed-form spectra and stationary
covariances.
"""

from .analysis import (
    bootstrap_mean,
    cycle_average,
    fit_decay_rate,
    fixed_phase_momentum_variance,
    ks_fixed_phase,
    periodogram,
)
from .charges import (
    MultipoleDistribution,
    PointChargeSet,
    SymmetricParticleSpec,
    multipoles_from_point_charges,
    spheroid_quadrupole,
)
from .circuit import (
    CircuitSpec,
    CircuitState,
    LinearPickup,
    QuadrupolePickup,
    adiabatic_contraction_rate,
    canonical_transform,
    circuit_energy,
    circuit_impedance,
    damping_rate_vs_frequency,
    effective_resistance,
    friction_diffusion_tensors,
    induced_charge,
)
from .config import ConfigError, RunConfig, RunSettings, load_config, parse_quantity
from .constants import AMU, ELEMENTARY_CHARGE, EPSILON_0, K_B
from .engine import (
    GasCoupling,
    IntegratorConfig,
    SimulationSystem,
    SystemState,
    TrajectoryResult,
    axial_ring_ensemble,
    dressed_state,
    run_ensemble,
    run_trajectory,
    step_effective,
    step_exact,
    step_stochastic,
    total_energy,
    transformed_total_energy,
)
from .images import PlateCapacitor, image_force_torque, image_potential
from .kinematics import InertiaSpec, Orientation, angular_momentum_from_conjugate
from .linmodel import (
    LinearModel,
    build_model,
    effective_temperature,
    psd_matrix,
    simulate_linear,
    simulate_staged,
    stationary_covariance,
)
from .particle import RigidParticle
from .presets import PRESETS, get_preset, staged_cooling_stages
from .trap import (
    TrapGeometry,
    effective_force_torque,
    effective_potential,
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

__version__ = "0.1.0"
