"""Independent brute-force references the tests compare the package against.

Everything here is deliberately dumb: direct lattice sums, midpoint
quadrature, central differences.  No code is shared with the package
beyond the constants module.
"""

import math

import numpy as np

from levirotor.constants import EPSILON_0, TWO_PI


def rot(axis, angle):
    """Rotation matrix about a unit axis (Rodrigues)."""
    K = np.array(
        [
            [0.0, -axis[2], axis[1]],
            [axis[2], 0.0, -axis[0]],
            [-axis[1], axis[0], 0.0],
        ]
    )
    return np.eye(3) + math.sin(angle) * K + (1.0 - math.cos(angle)) * (K @ K)


def position_gradient(f, r, h):
    """Central-difference gradient of a scalar f(r)."""
    g = np.empty(3)
    for i in range(3):
        dr = np.zeros(3)
        dr[i] = h
        g[i] = (f(r + dr) - f(r - dr)) / (2.0 * h)
    return g


def rotation_gradient(f, frame, h):
    """Derivative of f(frame) along rotations about the three space axes.

    The negative of this is the torque when f is a potential.
    """
    g = np.empty(3)
    for i, ax in enumerate(np.eye(3)):
        g[i] = (f(rot(ax, h) @ frame) - f(rot(ax, -h) @ frame)) / (2.0 * h)
    return g


def plate_image_energy(charges, positions, z0, n_max=10000):
    """Image interaction energy of point charges between grounded plates.

    Plates at z = +/- z0.  Each charge q at (x, y, z) spawns the image
    towers +q at (x, y, z +/- 4 n z0) and -q at (x, y, -z +/- (4n - 2) z0)
    for n >= 1; the interaction energy is half the sum of real-image pair
    energies.  Truncation error falls off as 1/n_max^2.
    """
    charges = np.asarray(charges, dtype=float)
    positions = np.asarray(positions, dtype=float)
    ns = np.arange(1, n_max + 1)
    zp = 4.0 * ns * z0
    zm = (4.0 * ns - 2.0) * z0
    V = 0.0
    for a in range(len(charges)):
        for b in range(len(charges)):
            rho2 = (positions[a, 0] - positions[b, 0]) ** 2 + (
                positions[a, 1] - positions[b, 1]
            ) ** 2
            dz = positions[a, 2] - positions[b, 2]
            sz = positions[a, 2] + positions[b, 2]
            V += (
                0.5
                * charges[a]
                * charges[b]
                * (
                    np.sum(1.0 / np.sqrt(rho2 + (dz - zp) ** 2))
                    + np.sum(1.0 / np.sqrt(rho2 + (dz + zp) ** 2))
                    - np.sum(1.0 / np.sqrt(rho2 + (sz - zm) ** 2))
                    - np.sum(1.0 / np.sqrt(rho2 + (sz + zm) ** 2))
                )
            )
    return V / (4.0 * math.pi * EPSILON_0)


def spheroid_surface_moments(q, a, r, n=4000):
    """Monopole and Q_zz of a conducting spheroid by surface quadrature.

    Semi-axis a along z, r transverse.  The equilibrium surface density
    of an isolated conducting ellipsoid is
    sigma = q / (4 pi a r^2) * ((x^2+y^2)/r^4 + z^2/a^4)^(-1/2);
    integrated with a theta midpoint rule.
    """
    th = (np.arange(n) + 0.5) * math.pi / n
    dth = math.pi / n
    z = a * np.cos(th)
    rho = r * np.sin(th)
    dA = TWO_PI * rho * np.sqrt((r * np.cos(th)) ** 2 + (a * np.sin(th)) ** 2) * dth
    sigma = q / (4.0 * math.pi * a * r**2) / np.sqrt(rho**2 / r**4 + z**2 / a**4)
    q_tot = float(np.sum(sigma * dA))
    Qzz = float(np.sum(sigma * dA * (3.0 * z**2 - (rho**2 + z**2))))
    return q_tot, Qzz
