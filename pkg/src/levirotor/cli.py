"""Command-line front end.

Subcommands:

    simulate         integrate trajectories and write them as CSV tables
    rates            circuit damping rate versus mode frequency
    pseudopotential  scan the macromotion potential along one coordinate
    psd              analytic noise spectra of the linearized dynamics
    cool             staged resistive-cooling run of the linearized dynamics
    presets          list the built-in parameter sets

Every data-producing command writes delimited text with a `# key: value`
manifest header into the output directory (--out, falling back to the
LEVIROTOR_OUT environment variable, then the working directory).
--plot additionally renders the matching figure next to the data.

Exit codes: 0 success, 2 configuration or usage error, 3 numerical
failure, 4 instability (trajectory escape, non-finite state, or a
linearization without a stationary point).
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .charges import SymmetricParticleSpec
from .circuit import LinearPickup, damping_rate_vs_frequency
from .config import ConfigError, RunConfig, load_config
from .constants import K_B
from .engine import TABLE_COLUMNS, run_ensemble
from .kinematics import body_axes, euler_from_matrix
from .linmodel import (
    UnstableModelError,
    build_model,
    effective_temperature,
    psd_matrix,
    simulate_staged,
)
from .presets import PRESETS, get_preset, staged_cooling_stages
from .trap import effective_force_torque, effective_potential


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _out_dir(args) -> Path:
    out = args.out or os.environ.get("LEVIROTOR_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _apply_override(cfg: dict, spec: str) -> None:
    key, sep, raw = spec.partition("=")
    if not sep:
        raise ConfigError(f"override {spec!r} must look like section.key=value")
    node = cfg
    parts = key.strip().split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
        if not isinstance(node, dict):
            raise ConfigError(f"override {key!r} traverses a non-mapping entry")
    node[parts[-1]] = yaml.safe_load(raw)


def _load(args) -> tuple[dict, str]:
    if args.preset and args.config:
        raise ConfigError("give either --preset or --config, not both")
    if args.preset:
        cfg = get_preset(args.preset)
        source = f"preset {args.preset}"
    elif args.config:
        path = Path(args.config)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        cfg = yaml.safe_load(path.read_text())
        source = str(path)
    else:
        raise ConfigError("a --preset or --config is required")
    for spec in args.override or []:
        _apply_override(cfg, spec)
    if args.seed is not None:
        cfg.setdefault("run", {})["seed"] = args.seed
    return cfg, source


def _write_table(path: Path, manifest: dict, header: tuple[str, ...], rows: np.ndarray) -> None:
    lines = [f"# {k}: {v}" for k, v in manifest.items()]
    lines.append(",".join(header))
    np.savetxt(path, np.atleast_2d(rows), delimiter=",", fmt="%.10e", header="\n".join(lines), comments="")
    print(path)


def _add_common(p: argparse.ArgumentParser, config: bool = True) -> None:
    if config:
        p.add_argument("--preset", help="built-in parameter set name")
        p.add_argument("--config", help="YAML configuration file")
        p.add_argument(
            "--override",
            action="append",
            metavar="KEY=VALUE",
            help="set a configuration entry, e.g. trap.U_ac=800",
        )
    p.add_argument("--seed", type=int, default=None, help="noise seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--plot", action="store_true", help="render figures next to the data")


def _cmd_simulate(args) -> int:
    cfg, source = _load(args)
    if args.duration is not None:
        cfg.setdefault("run", {})["duration"] = args.duration
    if args.mode is not None:
        cfg.setdefault("run", {})["mode"] = args.mode
    rc: RunConfig = load_config(cfg)
    out = _out_dir(args)

    states = [rc.initial] * args.repeat
    results = run_ensemble(
        rc.system,
        states,
        rc.run.duration,
        rc.integrator,
        mode=rc.run.mode,
        stride=rc.run.stride,
        jobs=args.jobs,
    )
    dt = rc.integrator.step_size(rc.system.trap)
    worst = 0
    for k, res in enumerate(results):
        name = "trajectory.csv" if args.repeat == 1 else f"trajectory_{k:03d}.csv"
        manifest = {
            "generator": f"levirotor {__version__} simulate",
            "source": source,
            "mode": rc.run.mode,
            "scheme": rc.integrator.scheme,
            "dt": dt,
            "seed": rc.integrator.seed ^ k,
            "status": res.status,
        }
        if res.escape_time is not None:
            manifest["escape_time"] = res.escape_time
        _write_table(out / name, manifest, TABLE_COLUMNS, res.table())
        if args.plot:
            from .plotting import plot_trajectory

            plot_trajectory(res.table(), TABLE_COLUMNS, (out / name).with_suffix(".png"))
        if res.status != "ok":
            print(f"trajectory {k}: {res.status}", file=sys.stderr)
            worst = 4
    return worst


def _cmd_rates(args) -> int:
    cfg, source = _load(args)
    rc = load_config(cfg)
    if rc.system.circuit is None or rc.system.pickup is None:
        return _fail("rates needs a circuit and a pickup section", 2)
    if not isinstance(rc.system.pickup, LinearPickup):
        return _fail("closed-form rates apply to the linear pickup", 2)
    w_lc = rc.system.circuit.omega_lc
    lo = args.omega_min if args.omega_min is not None else w_lc / 100.0
    hi = args.omega_max if args.omega_max is not None else w_lc * 100.0
    if not 0.0 < lo < hi:
        return _fail("need 0 < omega-min < omega-max", 2)
    omega = np.geomspace(lo, hi, args.points)
    gamma = damping_rate_vs_frequency(
        rc.system.circuit,
        rc.system.pickup,
        rc.system.particle.q,
        rc.system.particle.mass,
        omega,
    )
    out = _out_dir(args)
    manifest = {
        "generator": f"levirotor {__version__} rates",
        "source": source,
        "topology": rc.system.circuit.topology,
        "omega_lc": w_lc,
        "damping": rc.system.circuit.damping,
    }
    _write_table(out / "rates.csv", manifest, ("omega", "gamma"), np.column_stack([omega, gamma]))
    if args.plot:
        from .plotting import plot_rates

        plot_rates(omega, gamma, out / "rates.png")
    return 0


_SCAN_AXES = ("x", "y", "z", "alpha", "beta", "gamma")


def _cmd_pseudopotential(args) -> int:
    cfg, source = _load(args)
    rc = load_config(cfg)
    if rc.system.trap is None:
        return _fail("pseudopotential needs a trap section", 2)
    axis = args.axis
    base_r = rc.initial.r.copy()
    base_euler = np.array(euler_from_matrix(rc.initial.body_frame))
    if axis in ("x", "y", "z"):
        span = args.span * rc.system.trap.ell0
    else:
        span = args.span
    offsets = np.linspace(-span, span, args.points)
    rows = np.empty((args.points, 3))
    for i, s in enumerate(offsets):
        r = base_r.copy()
        euler = base_euler.copy()
        if axis in ("x", "y", "z"):
            r["xyz".index(axis)] += s
        else:
            euler[("alpha", "beta", "gamma").index(axis)] += s
        frame = body_axes(*euler)
        V = effective_potential(rc.system.trap, rc.system.particle, r, frame)
        F, N = effective_force_torque(rc.system.trap, rc.system.particle, r, frame)
        if axis in ("x", "y", "z"):
            g = F["xyz".index(axis)]
        else:
            # generalized force -dV/d(angle) is the torque about the
            # angle's rotation axis: e_z, the node line, or the body axis
            if axis == "alpha":
                axis_vec = np.array([0.0, 0.0, 1.0])
            elif axis == "beta":
                axis_vec = np.array([-math.sin(euler[0]), math.cos(euler[0]), 0.0])
            else:
                axis_vec = frame[:, 2]
            g = float(N @ axis_vec)
        rows[i] = (s, V, g)
    out = _out_dir(args)
    manifest = {
        "generator": f"levirotor {__version__} pseudopotential",
        "source": source,
        "axis": axis,
    }
    _write_table(out / "pseudopotential.csv", manifest, ("offset", "V_eff", "force"), rows)
    if args.plot:
        from .plotting import plot_scan

        plot_scan(rows[:, 0], rows[:, 1], f"{axis} offset", out / "pseudopotential.png")
    return 0


def _model_from_config(rc: RunConfig):
    part = rc.system.particle
    p_body = part.multipoles.p_body
    Q_body = part.multipoles.Q_body
    axis = np.array([0.0, 0.0, 1.0])
    if not (
        np.allclose(p_body[:2], 0.0)
        and np.allclose(Q_body, Q_body[2, 2] / 2.0 * (3.0 * np.outer(axis, axis) - np.eye(3)))
        and part.inertia.I1 == part.inertia.I2
    ):
        raise ConfigError("the linearized model needs a cylindrically symmetric particle")
    spec = SymmetricParticleSpec(
        q=part.q,
        p3=p_body[2],
        Q3=Q_body[2, 2] / 2.0,
        I=part.inertia.I1,
        I3=part.inertia.I3,
    )
    gas = rc.system.gas
    if rc.system.trap is None or rc.system.circuit is None or rc.system.pickup is None:
        raise ConfigError("the linearized model needs trap, pickup and circuit sections")
    return build_model(
        rc.system.trap,
        rc.system.pickup,
        spec,
        part.mass,
        rc.system.circuit,
        gamma_z=float(gas.gamma_cm[2]) if gas is not None else 0.0,
        gamma_beta=float(gas.gamma_rot[0]) if gas is not None else 0.0,
        T_gas=gas.T_gas if gas is not None else 0.0,
    )


def _cmd_psd(args) -> int:
    cfg, source = _load(args)
    rc = load_config(cfg)
    model = _model_from_config(rc)
    w_ref = max(model.omega_z, model.omega_beta, model.circuit.omega_lc)
    lo = args.omega_min if args.omega_min is not None else w_ref / 50.0
    hi = args.omega_max if args.omega_max is not None else w_ref * 10.0
    if not 0.0 < lo < hi:
        return _fail("need 0 < omega-min < omega-max", 2)
    omega = np.geomspace(lo, hi, args.points)
    S = psd_matrix(model, omega)
    diag = np.real(np.einsum("nii->ni", S))
    temps = effective_temperature(model)
    out = _out_dir(args)
    manifest = {
        "generator": f"levirotor {__version__} psd",
        "source": source,
        "omega_z": model.omega_z,
        "omega_beta": model.omega_beta,
        "omega_lc": model.circuit.omega_lc,
        "T_z": temps["z"],
        "T_beta": temps["beta"],
    }
    header = ("omega",) + tuple(f"S_{l}" for l in model.labels)
    _write_table(out / "psd.csv", manifest, header, np.column_stack([omega, diag]))
    if args.plot:
        from .plotting import plot_psd

        plot_psd(
            omega,
            {"z": diag[:, 0], "beta": diag[:, 1], "Q": diag[:, 2]},
            out / "psd.png",
        )
    return 0


def _cmd_cool(args) -> int:
    stages = staged_cooling_stages(args.stage1, args.stage2)
    seed = args.seed if args.seed is not None else 0
    t, xi = simulate_staged(
        list(stages.models),
        list(stages.durations),
        stages.xi0,
        args.dt,
        scheme="exact",
        stride=args.stride,
        seed=seed,
    )
    m_cm, m_rot = stages.models
    mass, I1 = m_cm.mass, m_cm.I1
    E_z = xi[:, 3] ** 2 / (2.0 * mass) + 0.5 * mass * m_cm.omega_z**2 * xi[:, 0] ** 2
    E_b = xi[:, 4] ** 2 / (2.0 * I1) + 0.5 * I1 * m_cm.omega_beta**2 * xi[:, 1] ** 2
    rows = np.column_stack([t, xi, E_z, E_b])
    tail = t > t[-1] - 0.1 * stages.durations[1]
    T_z = float(np.mean(xi[tail, 3] ** 2)) / (mass * K_B)
    T_b = float(np.mean(xi[tail, 4] ** 2)) / (I1 * K_B)
    out = _out_dir(args)
    manifest = {
        "generator": f"levirotor {__version__} cool",
        "stage1_duration": stages.durations[0],
        "stage2_duration": stages.durations[1],
        "dt": args.dt,
        "seed": seed,
        "omega_z": m_cm.omega_z,
        "omega_beta": m_cm.omega_beta,
        "final_T_z": T_z,
        "final_T_beta": T_b,
    }
    header = ("t",) + m_cm.labels + ("E_z", "E_beta")
    _write_table(out / "cooling.csv", manifest, header, rows)
    if args.plot:
        from .plotting import plot_cooling

        plot_cooling(t, {"E_z": E_z, "E_beta": E_b}, out / "cooling.png")
    return 0


def _cmd_presets(args) -> int:
    width = max(len(name) for name in PRESETS)
    for name in sorted(PRESETS):
        print(f"{name:<{width}}  {PRESETS[name][1]}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="levirotor",
        description="charged-rotor dynamics in quadrupole traps with pickup circuits",
    )
    parser.add_argument("--version", action="version", version=f"levirotor {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate trajectories")
    _add_common(p)
    p.add_argument("--duration", type=float, default=None, help="override run duration (s)")
    p.add_argument("--mode", choices=("exact", "effective"), default=None)
    p.add_argument("--repeat", type=int, default=1, help="number of trajectories")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for --repeat")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("rates", help="circuit damping rate versus frequency")
    _add_common(p)
    p.add_argument("--omega-min", type=float, default=None)
    p.add_argument("--omega-max", type=float, default=None)
    p.add_argument("--points", type=int, default=400)
    p.set_defaults(func=_cmd_rates)

    p = sub.add_parser("pseudopotential", help="scan the macromotion potential")
    _add_common(p)
    p.add_argument("--axis", choices=_SCAN_AXES, default="z")
    p.add_argument(
        "--span",
        type=float,
        default=1.0,
        help="half-range of the scan (units of ell0 for x/y/z, rad for angles)",
    )
    p.add_argument("--points", type=int, default=201)
    p.set_defaults(func=_cmd_pseudopotential)

    p = sub.add_parser("psd", help="noise spectra of the linearized dynamics")
    _add_common(p)
    p.add_argument("--omega-min", type=float, default=None)
    p.add_argument("--omega-max", type=float, default=None)
    p.add_argument("--points", type=int, default=800)
    p.set_defaults(func=_cmd_psd)

    p = sub.add_parser("cool", help="staged resistive cooling (linearized)")
    _add_common(p, config=False)
    p.add_argument("--stage1", type=float, default=None, help="first stage duration (s)")
    p.add_argument("--stage2", type=float, default=None, help="second stage duration (s)")
    p.add_argument("--dt", type=float, default=2e-5, help="sample step (s)")
    p.add_argument("--stride", type=int, default=500, help="steps per output row")
    p.set_defaults(func=_cmd_cool)

    p = sub.add_parser("presets", help="list built-in parameter sets")
    p.set_defaults(func=_cmd_presets)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        return _fail(str(err), 2)
    except KeyError as err:
        return _fail(str(err.args[0]) if err.args else str(err), 2)
    except UnstableModelError as err:
        return _fail(str(err), 4)
    except (np.linalg.LinAlgError, ValueError) as err:
        return _fail(str(err), 3)


if __name__ == "__main__":
    sys.exit(main())
