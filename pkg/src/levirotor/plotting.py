"""File-based rendering of simulation outputs (headless backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_trajectory(table: np.ndarray, columns: tuple[str, ...], path) -> Path:
    """Position, Euler angle and energy panels of a trajectory table."""
    path = Path(path)
    t = table[:, columns.index("t")]
    fig, axes = plt.subplots(3, 1, figsize=(8, 9), sharex=True)
    for name in ("x", "y", "z"):
        axes[0].plot(t, table[:, columns.index(name)], label=name, lw=0.8)
    axes[0].set_ylabel("position (m)")
    axes[0].legend(loc="upper right")
    for name in ("alpha", "beta", "gamma"):
        axes[1].plot(t, table[:, columns.index(name)], label=name, lw=0.8)
    axes[1].set_ylabel("Euler angle (rad)")
    axes[1].legend(loc="upper right")
    axes[2].plot(t, table[:, columns.index("energy")], color="k", lw=0.8)
    axes[2].set_ylabel("energy (J)")
    axes[2].set_xlabel("t (s)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_rates(omega: np.ndarray, gamma: np.ndarray, path) -> Path:
    """Damping rate versus mode frequency, log-log."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.loglog(omega, gamma, lw=1.2)
    ax.set_xlabel("mode frequency (rad/s)")
    ax.set_ylabel("damping rate (1/s)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_scan(coord: np.ndarray, V: np.ndarray, xlabel: str, path) -> Path:
    """Potential energy along a one-dimensional scan."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 5))
    ax.plot(coord, V, lw=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("effective potential (J)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_psd(omega: np.ndarray, curves: dict[str, np.ndarray], path) -> Path:
    """Power spectral densities on a log-log grid, one curve per label."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, psd in curves.items():
        keep = (omega > 0.0) & (psd > 0.0)
        ax.loglog(omega[keep], psd[keep], lw=1.0, label=label)
    ax.set_xlabel("omega (rad/s)")
    ax.set_ylabel("PSD")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_cooling(t: np.ndarray, energies: dict[str, np.ndarray], path) -> Path:
    """Mode energies versus time on a log scale."""
    path = Path(path)
    fig, ax = plt.subplots(figsize=(7, 5))
    for label, e in energies.items():
        ax.semilogy(t, e, lw=1.0, label=label)
    ax.set_xlabel("t (s)")
    ax.set_ylabel("energy (J)")
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
