"""Independent re-derivations and frozen reference values used across the tests.

Nothing here imports the package under test except plain data types, so every
comparison against these functions is a second route to the same quantity.
"""
from __future__ import annotations

import math

import numpy as np

# frozen values, computed by hand or from the closed forms
KEPLER_XI2_LAGRANGE_R2 = 0.13671875  # 1/8 + (3 - 9*0.25)/64
CYL_XI1_SQ = 0.1296875  # (8 + 3 - 2.7)/64
ISOLATED_XI2_SQ = 0.14375  # (8 + 3 - 1.8)/64
HYP_XI_MAG = math.sqrt(CYL_XI1_SQ)  # 0.36012151
HYP_ETA = 0.25 * HYP_XI_MAG * 0.5  # -((I2-I1)/I1) = 0.25, times sin(pi/6)
R_CRIT_LAGRANGE = 1.4569
R_CRIT_SQ_LAGRANGE = (3.45 + math.sqrt(3.45**2 + 8 * 1.6875)) / 4  # 2.1225223
ALPHA_CONIC_04_03_R2 = -3.29 / 3.56
HYP_BOUND_03 = 1.75887
H2_PROLATE = 3 * 0.2 * 4.4**2 / 2**5  # 0.363


def v2_terms(I, R) -> float:
    """Second-order potential written as a monopole plus the MacCullagh quadrupole, term by term."""
    I = np.asarray(I, dtype=float)
    x, y, z = (float(c) for c in R)
    r = math.sqrt(x * x + y * y + z * z)
    trace = I[0] + I[1] + I[2]
    quad = I[0] * x * x + I[1] * y * y + I[2] * z * z
    return -1.0 / r - trace / (2 * r**3) + 3 * quad / (2 * r**5)


def fd_grad(f, x, h=1e-6):
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for k in range(len(x)):
        e = np.zeros_like(x)
        e[k] = h
        g[k] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def kinetic_energy_direct(I, R, v) -> float:
    """Rigid rotation plus translation of the center of mass in the body frame."""
    Om, Rd = np.asarray(v[:3], dtype=float), np.asarray(v[3:], dtype=float)
    u = Rd + np.cross(Om, R)
    return 0.5 * float(Om @ (np.asarray(I) * Om)) + 0.5 * float(u @ u)


def metric_by_polarization(I, R) -> np.ndarray:
    G = np.zeros((6, 6))
    E = np.eye(6)
    for i in range(6):
        for j in range(6):
            G[i, j] = (kinetic_energy_direct(I, R, E[i] + E[j]) - kinetic_energy_direct(I, R, E[i] - E[j])) / 2
    return G


def kepler_rate2(I_R: float, R: float) -> float:
    """Circular rate from the radial force balance |xi|^2 R = dV/dr along a principal axis."""
    e = np.zeros(3)
    # along a principal axis only I_R enters the radial derivative
    I = np.array([I_R, (1 - I_R) / 2, (1 - I_R) / 2])
    e[0] = 1.0
    g = fd_grad(lambda x: v2_terms(I, x), R * e, h=1e-5)
    return float(g[0]) / R


def lagrange_inertia(rng) -> np.ndarray:
    """Random inertia with I1 > I3 > I2 and all moments in (0, 1/2)."""
    while True:
        d = rng.dirichlet([4, 4, 4])
        d = np.sort(d)[::-1]
        I = np.array([d[0], d[2], d[1]])
        if np.all(I < 0.5) and I[0] > I[2] > I[1] and min(np.diff(np.sort(I))) > 1e-3:
            return I


def admissible_inertia(rng) -> np.ndarray:
    while True:
        d = rng.dirichlet([4, 4, 4])
        if np.all(d < 0.5) and min(abs(d[0] - d[1]), abs(d[1] - d[2]), abs(d[0] - d[2])) > 1e-3:
            return d


def rel_err(a, b) -> float:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))
