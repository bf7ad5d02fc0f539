"""Physical constants and unit conversions (SI throughout)."""

import math

EPSILON_0 = 8.8541878128e-12  # vacuum permittivity, F/m
K_B = 1.380649e-23            # Boltzmann constant, J/K
ELEMENTARY_CHARGE = 1.602176634e-19  # C
AMU = 1.66053906660e-27       # atomic mass unit, kg

# zeta(3), the only special value entering the plate-capacitor image sums
ZETA_3 = 1.2020569031595942854

TWO_PI = 2.0 * math.pi
