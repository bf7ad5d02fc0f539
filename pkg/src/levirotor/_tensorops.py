"""Small tensor helpers shared by field and pickup computations."""

from __future__ import annotations

import numpy as np


def skew(v: np.ndarray) -> np.ndarray:
    """Matrix of the cross product, skew(v) @ u = v x u."""
    return np.array(
        [[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]]
    )


def quadrupole_torque_sum(M: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """(1/3) sum_i m_i  m^_i x (Q m^_i) over the eigenpairs of symmetric M."""
    eigvals, eigvecs = np.linalg.eigh(M)
    out = np.zeros(3)
    for m_i, v in zip(eigvals, eigvecs.T):
        out += m_i * np.cross(v, Q @ v)
    return out / 3.0


def torque_direction(M: np.ndarray, p: np.ndarray, Q: np.ndarray, r: np.ndarray) -> np.ndarray:
    """W = p x (M r) - (1/3) sum_i m_i m^_i x (Q m^_i).

    The direction of the torque a quadrupole field with geometry tensor M
    exerts on a distribution with space-frame moments (p, Q) at r.
    """
    return np.cross(p, M @ r) - quadrupole_torque_sum(M, Q)


def quadrupole_energy_sum(M: np.ndarray, Q: np.ndarray) -> float:
    """(1/6) sum_i m_i  m^_i . Q m^_i = tr(M Q) / 6."""
    return float(np.trace(M @ Q)) / 6.0
