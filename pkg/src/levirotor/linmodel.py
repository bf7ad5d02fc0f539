"""Linearized dynamics of a symmetric rotor near its trap minimum.

For a cylindrically symmetric particle in a linear Paul trap with endcap
electrodes wired to a parallel RLC circuit, small oscillations of the
axial position z and the polar angle around pi/2 couple linearly to the
circuit charge.  The state tuple is

    xi = (z, beta - pi/2, Q, p_z, p_beta, Phi)

and evolves as d xi = B xi dt + N dW with white, uncorrelated Wiener
increments.  The drift uses the mode frequencies

    omega_z^2    = 4 k_ec U_ec q / (m l_ec^2) + k^2 q^2 / (m C z0^2)
    omega_beta^2 = (2 k_ec U_ec / I1 l_ec^2)(3 Q3 - p3^2/q)
                   + k^2 p3^2 / (I1 C z0^2)
                   + (U_ac^2 / 2 I1^2 l0^4 w_ac^2)(Q3 - p3^2/q)^2

with couplings g_zQ = k q / C z0, g_bQ = -k p3 / C z0 and
g_zb = -4 k_ec U_ec p3 / l_ec^2 - k^2 q p3 / C z0^2, evaluated at the
minimum x = z = 0, y = -p3/q, alpha = beta = pi/2.  Noise intensities
are D_cir = k_B T_cir / R, D_z = m Gamma_z k_B T_gas and
D_beta = I1 Gamma_beta k_B T_gas.

simulate_linear discretizes the recursion xi_{k+1} = M xi_k + w_k either
with Euler-Maruyama (M = 1 + B dt) or with the exact exponential map of
the linear SDE, which stays stable for arbitrarily stiff B.  Both run
through one eigenbasis recursion engine whose output is bitwise
reproducible for a given seed and independent of staging.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal
import scipy.integrate

from .charges import SymmetricParticleSpec
from .circuit import CircuitSpec, LinearPickup
from .constants import K_B
from .trap import TrapGeometry

_CHUNK = 1 << 16


class UnstableModelError(ValueError):
    """The configured system has no confined, stationary linear dynamics."""


@dataclass(frozen=True)
class LinearModel:
    """Drift matrix B, noise matrix N, and the scalars that built them."""

    B: np.ndarray
    N: np.ndarray
    mass: float
    I1: float
    omega_z: float
    omega_beta: float
    g_zQ: float
    g_bQ: float
    g_zb: float
    circuit: CircuitSpec
    T_gas: float

    @property
    def labels(self) -> tuple[str, ...]:
        return ("z", "beta", "Q", "p_z", "p_beta", "Phi")


def build_model(
    trap: TrapGeometry,
    pickup: LinearPickup,
    spec: SymmetricParticleSpec,
    mass: float,
    circuit: CircuitSpec,
    gamma_z: float,
    gamma_beta: float,
    T_gas: float,
) -> LinearModel:
    """Assemble the 6-state model from trap, pickup, particle and circuit.

    Requires a linear trap with endcaps and a parallel circuit; raises if
    either harmonic frequency comes out non-positive (no stable minimum
    to linearize around).
    """
    if not trap.has_endcap:
        raise ValueError("the linear model needs endcap electrodes")
    if circuit.topology != "parallel":
        raise ValueError("the linear model describes a parallel circuit")
    if not isinstance(pickup, LinearPickup):
        raise TypeError("the linear model uses the linear pickup")
    if spec.q <= 0.0:
        raise ValueError("total charge must be positive")

    k = pickup.k1
    z0 = pickup.z0
    q = spec.q
    p3 = spec.p3
    Q3 = spec.Q3
    I1 = spec.I
    C = circuit.C
    c_ec = trap.endcap_coefficient

    w_z2 = 4.0 * c_ec * q / mass + k**2 * q**2 / (mass * C * z0**2)
    w_b2 = (
        2.0 * c_ec / I1 * (3.0 * Q3 - p3**2 / q)
        + k**2 * p3**2 / (I1 * C * z0**2)
        + trap.U_ac**2 / (2.0 * I1**2 * trap.ell0**4 * trap.omega_ac**2)
        * (Q3 - p3**2 / q) ** 2
    )
    if w_z2 <= 0.0:
        raise UnstableModelError("axial frequency is not real: no harmonic confinement in z")
    if w_b2 <= 0.0:
        raise UnstableModelError("polar frequency is not real: no harmonic confinement in beta")

    g_zQ = k * q / (C * z0)
    g_bQ = -k * p3 / (C * z0)
    g_zb = -4.0 * c_ec * p3 - k**2 * q * p3 / (C * z0**2)

    R = circuit.R
    L = circuit.L
    B = np.zeros((6, 6))
    B[0, 3] = 1.0 / mass
    B[1, 4] = 1.0 / I1
    B[2, 0] = -g_zQ / R
    B[2, 1] = -g_bQ / R
    B[2, 2] = -1.0 / (R * C)
    B[2, 5] = 1.0 / L
    B[3, 0] = -mass * w_z2
    B[3, 1] = -g_zb
    B[3, 2] = -g_zQ
    B[3, 3] = -gamma_z
    B[4, 0] = -g_zb
    B[4, 1] = -I1 * w_b2
    B[4, 2] = -g_bQ
    B[4, 4] = -gamma_beta
    B[5, 0] = -g_zQ
    B[5, 1] = -g_bQ
    B[5, 2] = -1.0 / C

    D_cir = K_B * circuit.T / R
    D_z = mass * gamma_z * K_B * T_gas
    D_b = I1 * gamma_beta * K_B * T_gas
    N = np.zeros((6, 6))
    N[2, 2] = math.sqrt(2.0 * D_cir)
    N[3, 3] = math.sqrt(2.0 * D_z)
    N[4, 4] = math.sqrt(2.0 * D_b)

    return LinearModel(
        B=B,
        N=N,
        mass=mass,
        I1=I1,
        omega_z=math.sqrt(w_z2),
        omega_beta=math.sqrt(w_b2),
        g_zQ=g_zQ,
        g_bQ=g_bQ,
        g_zb=g_zb,
        circuit=circuit,
        T_gas=T_gas,
    )


def _scales(model: LinearModel) -> np.ndarray:
    """Thermal-equipartition unit for each state variable.

    Raw SI entries of B span twenty orders of magnitude (1/m against
    m omega^2), which destroys every dense solver; all linear algebra
    here runs on the rescaled drift S^-1 B S instead.
    """
    kT = K_B * max(model.T_gas, model.circuit.T, 1.0)
    return np.sqrt(
        np.array(
            [
                kT / (model.mass * model.omega_z**2),
                kT / (model.I1 * model.omega_beta**2),
                kT * model.circuit.C,
                kT * model.mass,
                kT * model.I1,
                kT * model.circuit.L,
            ]
        )
    )


def _scaled_drift(model: LinearModel) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    s = _scales(model)
    B = model.B * (s[None, :] / s[:, None])
    D = (model.N @ model.N.T) / (s[:, None] * s[None, :])
    return B, D, s


def _require_hurwitz(B: np.ndarray) -> None:
    rates = np.linalg.eigvals(B).real
    if rates.max() >= 0.0:
        raise UnstableModelError("drift matrix is not Hurwitz: no stationary state")


def psd_matrix(model: LinearModel, omega) -> np.ndarray:
    """Stationary power spectral density S(omega), shape (..., 6, 6).

    S = (1/2pi) (iw - B)^-1 N N^T [(-iw - B)^-1]^T; diagonal entries are
    the one-variable PSDs on the full frequency line.
    """
    B, D, s = _scaled_drift(model)
    _require_hurwitz(B)
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    eye = np.eye(6)
    iw = 1j * omega[:, None, None] * eye
    left = np.linalg.solve(iw - B, np.broadcast_to(D, iw.shape).copy())
    right = np.linalg.inv(-iw - B)
    S = left @ np.transpose(right, (0, 2, 1)) / (2.0 * math.pi)
    return S * (s[:, None] * s[None, :])


def stationary_covariance(model: LinearModel) -> np.ndarray:
    """Steady-state covariance from the Lyapunov equation B S + S B^T + NN^T = 0.

    Solved in the eigenbasis of the rescaled B, which stays accurate
    when some modes are damped many orders of magnitude more weakly
    than others (their eigenvalue-pair sums are tiny against ||B||,
    which breaks the standard Schur solver).
    """
    B, D, s = _scaled_drift(model)
    _require_hurwitz(B)
    lam, V = np.linalg.eig(B)
    cond = np.linalg.cond(V)
    if not np.isfinite(cond) or cond > 1e9:
        sigma = scipy.linalg.solve_continuous_lyapunov(B, -D)
    else:
        Vinv = np.linalg.inv(V)
        G = Vinv @ D @ Vinv.T
        Y = -G / (lam[:, None] + lam[None, :])
        sigma = np.real(V @ Y @ V.T)
    return sigma * (s[:, None] * s[None, :])


def integrate_psd(model: LinearModel, upper: float | None = None) -> np.ndarray:
    """Full-line integral of each diagonal PSD entry by adaptive quadrature.

    Integrates 2 * S_ii over [0, upper] and adds the analytic
    (NN^T)_ii / (pi * upper) tail of the 1/omega^2 falloff.  Equals the
    stationary variances.

    Quadrature alone cannot find resonances a billion times narrower
    than the band, so the axis is cut at the midpoints between poles
    and each piece is integrated in the variable u = atan((w - w_m)/g)
    of its own pole, which flattens the resonance and compresses its
    far tails onto a resolvable scale.
    """
    B, D, s = _scaled_drift(model)
    _require_hurwitz(B)
    lam = np.linalg.eigvals(B)
    w_top = max(np.abs(lam.imag).max(), np.abs(lam.real).max())
    if upper is None:
        upper = 2e3 * w_top

    pole = {}
    for eig in lam:
        w = abs(eig.imag)
        pole[w] = max(pole.get(w, 0.0), abs(eig.real))
    centers = sorted(pole)
    bounds = (
        [0.0]
        + [0.5 * (lo + hi) for lo, hi in zip(centers[:-1], centers[1:])]
        + [upper]
    )

    # tan windows span 1e7 half widths; what they leave out is smooth on
    # a logarithmic frequency scale and integrated there
    reach = 1e7
    segments = []
    for w_m, a, b in zip(centers, bounds[:-1], bounds[1:]):
        g = pole[w_m]
        lo = max(a, w_m - reach * g)
        hi = min(b, w_m + reach * g)
        segments.append(("tan", lo, hi, w_m, g))
        if lo > a:
            segments.append(("lin" if a == 0.0 else "log", a, lo, 0.0, 0.0))
        if hi < b:
            segments.append(("log", hi, b, 0.0, 0.0))

    eye = np.eye(6)

    def s_diag(w):
        iw = 1j * w * eye
        left = np.linalg.solve(iw - B, D)
        right = np.linalg.inv(-iw - B)
        return np.real(np.diagonal(left @ right.T)) / (2.0 * math.pi)

    out = np.zeros(6)
    with warnings.catch_warnings():
        # quad flags roundoff near the narrowest peaks although the
        # result is far tighter than needed here
        warnings.simplefilter("ignore", scipy.integrate.IntegrationWarning)
        for i in range(6):
            total = 0.0
            for kind, a, b, w_m, g in segments:
                if kind == "tan":
                    f = lambda u, i=i: s_diag(w_m + g * math.tan(u))[i] * g / math.cos(u) ** 2
                    a, b = math.atan((a - w_m) / g), math.atan((b - w_m) / g)
                elif kind == "log":
                    f = lambda v, i=i: s_diag(math.exp(v))[i] * math.exp(v)
                    a, b = math.log(a), math.log(b)
                else:
                    f = lambda w, i=i: s_diag(w)[i]
                val, _ = scipy.integrate.quad(
                    f, a, b, limit=400, epsabs=0.0, epsrel=1e-11
                )
                total += val
            out[i] = (2.0 * total + D[i, i] / (math.pi * upper)) * s[i] ** 2
    return out


def effective_temperature(model: LinearModel, method: str = "covariance") -> dict:
    """Mode temperatures from momentum variances, <p^2>/m k_B per mode."""
    if method == "covariance":
        var = np.diag(stationary_covariance(model))
    elif method == "psd":
        var = integrate_psd(model)
    else:
        raise ValueError("method must be 'covariance' or 'psd'")
    return {
        "z": float(var[3]) / (model.mass * K_B),
        "beta": float(var[4]) / (model.I1 * K_B),
    }


def _discrete_map(B: np.ndarray, D: np.ndarray, dt: float, scheme: str):
    """One-step propagator M and per-step noise covariance."""
    if scheme == "em":
        M = np.eye(6) + B * dt
        S = D * dt
    elif scheme == "exact":
        block = np.zeros((12, 12))
        block[:6, :6] = B
        block[:6, 6:] = D
        block[6:, 6:] = -B.T
        F = scipy.linalg.expm(block * dt)
        M = F[:6, :6]
        S = F[:6, 6:] @ M.T
        S = 0.5 * (S + S.T)
    else:
        raise ValueError("scheme must be 'em' or 'exact'")
    return M, S


def _noise_factor(S: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(S)
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals)


def simulate_linear(
    model: LinearModel,
    xi0: np.ndarray,
    duration: float,
    dt: float,
    scheme: str = "exact",
    stride: int = 1,
    seed: int = 0,
    rng: np.random.Generator | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Sample a trajectory of the linear SDE on a fixed grid.

    scheme "em" is plain Euler-Maruyama and requires dt to resolve the
    stiffest circuit rate; "exact" uses the exponential map of the SDE
    and is unconditionally stable, so dt only needs to resolve the
    frequencies of interest.  Pass an explicit rng to continue a noise
    stream across staged runs: consecutive calls reproduce a single
    piecewise run bitwise.  Returns (t, xi) with the initial state in
    row 0 and one row per stride steps.
    """
    if stride < 1:
        raise ValueError("stride must be positive")
    if dt <= 0.0 or duration < 0.0:
        raise ValueError("need dt > 0 and duration >= 0")
    n_steps = int(round(duration / dt))
    B_s, D_s, s = _scaled_drift(model)
    M, S = _discrete_map(B_s, D_s, dt, scheme)
    L = _noise_factor(S)
    if rng is None:
        rng = np.random.Generator(np.random.Philox(key=seed))

    lam, V = np.linalg.eig(M)
    Vinv = np.linalg.inv(V)
    cond = np.linalg.cond(V)
    use_eig = np.isfinite(cond) and cond < 1e8

    xi0 = np.asarray(xi0, dtype=float) / s
    n_rows = n_steps // stride + 1
    out = np.empty((n_rows, 6))
    out[0] = xi0
    t = np.arange(n_rows) * (stride * dt)

    if use_eig:
        zeta = Vinv @ xi0.astype(complex)
        g = 0
        while g < n_steps:
            nc = min(_CHUNK, n_steps - g)
            w = rng.standard_normal((nc, 6)) @ L.T
            u = w @ Vinv.T
            y = np.empty((nc, 6), dtype=complex)
            for i in range(6):
                y[:, i], zf = scipy.signal.lfilter(
                    [1.0], [1.0, -lam[i]], u[:, i], zi=np.array([lam[i] * zeta[i]])
                )
                zeta[i] = zf[0]
            xi_chunk = (y @ V.T).real
            ks = np.arange(g + 1, g + nc + 1)
            sel = ks % stride == 0
            out[ks[sel] // stride] = xi_chunk[sel]
            g += nc
    else:
        # defective propagator: fall back to the direct recursion
        xi = xi0.copy()
        g = 0
        while g < n_steps:
            nc = min(_CHUNK, n_steps - g)
            w = rng.standard_normal((nc, 6)) @ L.T
            for j in range(nc):
                xi = M @ xi + w[j]
                k = g + j + 1
                if k % stride == 0:
                    out[k // stride] = xi
            g += nc

    return t, out * s


def simulate_staged(
    models: list[LinearModel],
    durations: list[float],
    xi0: np.ndarray,
    dt: float,
    scheme: str = "exact",
    stride: int = 1,
    seed: int = 0,
) -> tuple[np.ndarray, np.ndarray]:
    """Piecewise run with the circuit (or gas) switched between stages.

    Equivalent, sample for sample, to calling simulate_linear per stage
    while sharing one seeded rng and chaining the end state of each
    stage into the next.
    """
    if len(models) != len(durations):
        raise ValueError("need one duration per stage")
    rng = np.random.Generator(np.random.Philox(key=seed))
    xi = np.asarray(xi0, dtype=float)
    ts = []
    xs = []
    t_off = 0.0
    for j, (model, dur) in enumerate(zip(models, durations)):
        t, x = simulate_linear(model, xi, dur, dt, scheme=scheme, stride=stride, rng=rng)
        xi = x[-1]
        if j == 0:
            ts.append(t + t_off)
            xs.append(x)
        else:
            ts.append(t[1:] + t_off)
            xs.append(x[1:])
        t_off += t[-1]
    return np.concatenate(ts), np.concatenate(xs)
