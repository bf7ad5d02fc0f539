"""Trajectory post-processing: averages, decay fits, spectra, statistics."""

from __future__ import annotations

import math

import numpy as np
import scipy.signal
import scipy.stats

from .constants import K_B
from .particle import RigidParticle
from .trap import TrapGeometry, effective_potential, momentum_micromotion_correction


def cycle_average(t: np.ndarray, x: np.ndarray, period: float):
    """Block average over consecutive windows of one period.

    Expects a uniform time grid; x may be (n,) or (n, k).  Returns the
    window-center times and the window means, dropping the trailing
    partial window.  Applying the same call to two signals on the same
    grid filters both identically, so filter bias cancels in their
    difference.
    """
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two samples")
    dt = t[1] - t[0]
    w = int(round(period / dt))
    if w < 1:
        raise ValueError("period is shorter than the sampling step")
    n_win = t.size // w
    if n_win == 0:
        raise ValueError("signal is shorter than one period")
    tc = t[: n_win * w].reshape(n_win, w).mean(axis=1)
    xa = x[: n_win * w].reshape(n_win, w, -1).mean(axis=1)
    if x.ndim == 1:
        xa = xa[:, 0]
    return tc, xa


def fit_decay_rate(t: np.ndarray, e: np.ndarray):
    """Least-squares exponential rate: fit log(e) = a - rate * t.

    Only strictly positive samples participate.  Returns (rate,
    standard error of the rate).
    """
    t = np.asarray(t, dtype=float)
    e = np.asarray(e, dtype=float)
    keep = e > 0.0
    if keep.sum() < 3:
        raise ValueError("need at least three positive samples")
    t = t[keep]
    y = np.log(e[keep])
    tm = t - t.mean()
    denom = float(tm @ tm)
    if denom == 0.0:
        raise ValueError("time values are all equal")
    slope = float(tm @ y) / denom
    resid = y - y.mean() - slope * tm
    var = float(resid @ resid) / max(t.size - 2, 1) / denom
    return -slope, math.sqrt(var)


def periodogram(x: np.ndarray, dt: float, segments: int = 64, window: str = "hann"):
    """Averaged one-sided periodogram over angular frequency.

    Welch's method on `segments` non-overlapping blocks.  The window
    matters: spectra here span many decades, and a bare rectangular
    window leaks the tall resonances all over the far tails.
    Returns (omega, psd) with omega[0] = 0 and the density normalized
    so that its omega-integral recovers the signal variance.
    """
    x = np.asarray(x, dtype=float)
    n_seg = x.size // segments
    if n_seg < 2:
        raise ValueError("signal too short for that many segments")
    freq, psd = scipy.signal.welch(
        x[: segments * n_seg],
        fs=1.0 / dt,
        window=window,
        nperseg=n_seg,
        noverlap=0,
        detrend="constant",
        scaling="density",
    )
    return 2.0 * math.pi * freq, psd / (2.0 * math.pi)


def binned_average(omega: np.ndarray, psd: np.ndarray, edges: np.ndarray):
    """Mean of psd within each [edges[i], edges[i+1]) bin; empty bins give nan."""
    omega = np.asarray(omega, dtype=float)
    psd = np.asarray(psd, dtype=float)
    edges = np.asarray(edges, dtype=float)
    idx = np.digitize(omega, edges) - 1
    out = np.full(edges.size - 1, np.nan)
    for i in range(edges.size - 1):
        sel = idx == i
        if sel.any():
            out[i] = psd[sel].mean()
    return out


def fixed_phase_momentum_variance(mass: float, T: float, omega_ac: float, t) -> np.ndarray:
    """Axial momentum variance at drive phase omega_ac * t in a thermal ring trap.

    The macromotion contributes m k_B T; the micromotion kick, whose
    amplitude rides on the thermally distributed position, adds
    2 m k_B T sin^2: in total m k_B T (2 - cos(2 omega_ac t)).
    """
    t = np.asarray(t, dtype=float)
    return mass * K_B * T * (2.0 - np.cos(2.0 * omega_ac * t))


def ks_fixed_phase(samples: np.ndarray, mass: float, T: float, omega_ac: float, t: float):
    """KS test of axial momentum samples against the fixed-phase marginal.

    Returns (statistic, pvalue) for the zero-mean Gaussian with the
    phase-dependent variance.
    """
    sigma = math.sqrt(float(fixed_phase_momentum_variance(mass, T, omega_ac, t)))
    res = scipy.stats.kstest(np.asarray(samples, dtype=float), "norm", args=(0.0, sigma))
    return res.statistic, res.pvalue


def equilibrium_weight(
    trap: TrapGeometry,
    particle: RigidParticle,
    r: np.ndarray,
    body_frame: np.ndarray,
    P: np.ndarray,
    J: np.ndarray,
    T: float,
    t: float = 0.0,
) -> float:
    """Unnormalized stationary phase-space weight at drive phase omega_ac * t.

    exp(-[ (P + dP)^2/2m + (J + dJ) I^-1 (J + dJ)/2 + V_eff ] / k_B T)
    where dP, dJ are the instantaneous micromotion momenta; the exact
    momenta lag the macromotion ones by dP, dJ, so P + dP and J + dJ
    recover the thermal macromotion values.  The weight is a density
    over (r, P, J) and the rotation group; expressed in Euler angles
    the measure carries the usual sin(beta) factor, which is not
    included here.
    """
    dP, dJ = momentum_micromotion_correction(trap, particle, r, body_frame, t)
    p_rel = np.asarray(P, dtype=float) + dP
    j_rel = np.asarray(J, dtype=float) + dJ
    kin = float(p_rel @ p_rel) / (2.0 * particle.mass)
    j_body = np.asarray(body_frame, dtype=float).T @ j_rel
    kin += float(0.5 * np.sum(j_body**2 / particle.inertia.as_array()))
    pot = effective_potential(trap, particle, r, body_frame)
    return math.exp(-(kin + pot) / (K_B * T))


def bootstrap_mean(samples: np.ndarray, n_boot: int = 400, seed: int = 0):
    """Bootstrap (mean, std of the mean) of a 1-D sample set."""
    samples = np.asarray(samples, dtype=float)
    rng = np.random.Generator(np.random.Philox(key=seed))
    idx = rng.integers(0, samples.size, size=(n_boot, samples.size))
    means = samples[idx].mean(axis=1)
    return float(samples.mean()), float(means.std(ddof=1))
