"""Relative equilibria of an asymmetric body: existence, closed-form stability, bifurcations.

Axes are 1-based in the public API (``axis_R=2`` means ``R`` along ``e2``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diagram import BifurcationDiagram, Branch, Junction
from .equilibrium import Equilibrium, NoEquilibrium, make, warn_small_orbit
from .model import InertiaTensor, as_diag
from .potential import grad_v2
from .rem import INCONCLUSIVE, classify, regular_stability


class LagrangeOrderingError(ValueError):
    pass


def _inertia(I) -> InertiaTensor:
    if not isinstance(I, InertiaTensor):
        I = InertiaTensor(*as_diag(I))
    if I.symmetry != "asymmetric":
        raise ValueError(f"family solvers for the asymmetric body need distinct moments, got {I.symmetry}")
    return I


def _axis(a: int) -> int:
    if a not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3, got {a}")
    return a - 1


def _unit(k: int) -> np.ndarray:
    e = np.zeros(3)
    e[k] = 1.0
    return e


def kepler_xi2(I_R: float, R: float) -> float:
    """Squared orbital rate of an orthogonal equilibrium: ``1/R^3 + (3 - 9 I_R)/(2 R^5)``."""
    return 1.0 / R**3 + (3.0 - 9.0 * I_R) / (2.0 * R**5)


# --- existence ---


def solve_orthogonal(I, R: float, axis_R: int = 2, axis_xi: int = 1) -> Equilibrium:
    I = _inertia(I)
    kr, kx = _axis(axis_R), _axis(axis_xi)
    if kr == kx:
        raise ValueError("axis_R and axis_xi must differ")
    if not R > 0:
        raise ValueError("R must be positive")
    w2 = kepler_xi2(I.diag[kr], R)
    if w2 < 0:
        raise NoEquilibrium(f"no orthogonal equilibrium: |xi|^2 = {w2:.6g} < 0 at R = {R}")
    warn_small_orbit(R)
    w = np.sqrt(w2)
    fam = f"Orth^{axis_xi}_{axis_R}"
    return make(fam, I, R * _unit(kr), w * _unit(kx),
                params={"R": R, "axis_R": axis_R, "axis_xi": axis_xi},
                aux={"xi_norm2": w2, "alpha": float(I.diag[kx]) + (R * R if kx != kr else 0.0)},
                isotropy=f"Orth{axis_xi}{axis_R}").checked()


def parallel_radius2(I_axis: float) -> float:
    """``R^2 = (9 I_axis - 3)/2``, the radius where the gradient of the potential vanishes on an axis."""
    return 0.5 * (9.0 * I_axis - 3.0)


def solve_parallel(I, axis: int = 2, xi_mag: float = 0.0) -> Equilibrium:
    I = _inertia(I)
    k = _axis(axis)
    r2 = parallel_radius2(I.diag[k])
    if not r2 > 0:
        raise NoEquilibrium(f"no parallel family on axis {axis}: I_{axis} = {I.diag[k]:.6g} <= 1/3")
    R = np.sqrt(r2)
    warn_small_orbit(R)
    return make(f"Par_{axis}", I, R * _unit(k), xi_mag * _unit(k),
                params={"axis": axis, "xi_mag": xi_mag},
                aux={"R_star": R, "alpha": float(I.diag[k])},
                isotropy=f"Par{axis}" if xi_mag != 0 else f"Par{axis}_0").checked()


def conical_coefficients(I1: float, I2: float, R: float) -> tuple[float, float, float]:
    """Coefficients ``(A4, A2, A0)`` of the quadratic in ``S = cos^2 psi``."""
    R2 = R * R
    A4 = 225.0 * (I2 - I1) ** 2
    A2 = 6.0 * (I2 - I1) * (19.0 * R2 + 15.0 * I1 - 60.0 * I2 + 15.0)
    A0 = (2.0 * R2 - 9.0 * I2 + 3.0) * (8.0 * R2 + 6.0 * I1 - 15.0 * I2 + 3.0)
    return A4, A2, A0


def _plane(plane) -> tuple[int, int]:
    i, j = sorted(_axis(a) for a in plane)
    if i == j:
        raise ValueError("plane needs two distinct axes")
    return i, j


class ConicalSolutions(list):
    """List of conical equilibria; ``discarded`` holds ``(S, reason)`` for rejected roots."""

    def __init__(self, items=(), discarded=()):
        super().__init__(items)
        self.discarded = list(discarded)


def solve_conical(I, R: float, plane=(1, 2)) -> ConicalSolutions:
    I = _inertia(I)
    if not R > 0:
        raise ValueError("R must be positive")
    i, j = _plane(plane)
    Ii, Ij = I.diag[i], I.diag[j]
    A4, A2, A0 = conical_coefficients(Ii, Ij, R)
    roots = np.roots([A4, A2, A0])
    out = ConicalSolutions()
    tag = f"Obl_{i + 1}{j + 1}"
    for S in sorted({float(s.real) for s in roots if abs(s.imag) <= 1e-12 * max(1.0, abs(s))}):
        if not 0.0 < S < 1.0:
            out.discarded.append((S, "root outside (0, 1)"))
            continue
        psi = float(np.arccos(np.sqrt(S)))
        Rv = R * (np.cos(psi) * _unit(i) + np.sin(psi) * _unit(j))
        g = grad_v2(I, Rv)
        g1, g2 = g[i], g[j]
        gR = float(g @ Rv)
        if not gR > 0:
            out.discarded.append((S, f"grad V . R = {gR:.3e} <= 0"))
            continue
        cross = g2 * Rv[i] - g1 * Rv[j]
        k2 = (R * R * float(g @ g) - cross**2) / gR
        k = np.sqrt(k2)
        xi = (-g2 * _unit(i) + g1 * _unit(j)) / k
        eq = make(tag, I, Rv, xi, params={"R": R, "plane": (i + 1, j + 1)},
                  aux={"S": S, "psi": psi, "k": k, "g": (g1, g2), "sin_offset": float(Rv @ xi) / (R * np.linalg.norm(xi))},
                  isotropy="conical")
        out.append(eq.checked())
    if out:
        warn_small_orbit(R)
    return out


def conical_window(I, plane, psi: float) -> tuple[float, float] | tuple[()]:
    """Radius interval where both necessary conditions for conical equilibria hold.

    ``2R^2 + 3 - 9 I_psi > 0`` and ``2R^2 + 3 - 15 I_psi < 0`` with
    ``I_psi = I_i cos^2 psi + I_j sin^2 psi``. Empty tuple when the window is empty.
    """
    I = _inertia(I)
    i, j = _plane(plane)
    if not 0.0 < psi < 0.5 * np.pi:
        raise ValueError("psi must lie in (0, pi/2)")
    Ip = I.diag[i] * np.cos(psi) ** 2 + I.diag[j] * np.sin(psi) ** 2
    lo2 = max(0.0, 0.5 * (9.0 * Ip - 3.0))
    hi2 = 0.5 * (15.0 * Ip - 3.0)
    if hi2 <= lo2:
        return ()
    return (float(np.sqrt(lo2)), float(np.sqrt(hi2)))


# --- closed-form stability ---


@dataclass(frozen=True)
class OrthEigs:
    """Closed-form eigenvalues of an orthogonal equilibrium (``R || e2``, ``xi || e1`` after relabeling).

    ``A1..S3`` are the reduced (sign-equivalent) forms; ``arnold`` and ``smale``
    are the diagonal entries of the forms in the adapted bases ``arnold_basis`` and ``smale_basis``.
    """

    A1: float
    A2: float
    S1: float
    S2: float
    S3: float
    xi2: float
    arnold: tuple[float, float]
    smale: tuple[float, float, float]
    arnold_basis: np.ndarray
    smale_basis: np.ndarray

    @property
    def reduced(self) -> tuple[float, float, float, float, float]:
        return (self.A1, self.A2, self.S1, self.S2, self.S3)


def _orth_perm(axis_xi: int, axis_R: int) -> list[int]:
    kx, kr = _axis(axis_xi), _axis(axis_R)
    if kx == kr:
        raise ValueError("axis_R and axis_xi must differ")
    return [kx, kr, 3 - kx - kr]


def _embed(perm: list[int], v6: np.ndarray) -> np.ndarray:
    """Map a tangent vector written in relabeled axes back to body axes."""
    # rotation components are pseudovectors: an odd relabeling flips their sign
    sgn = np.linalg.det(np.eye(3)[:, perm])
    out = np.zeros(6)
    for a in range(3):
        out[perm[a]] = sgn * v6[a]
        out[3 + perm[a]] = v6[3 + a]
    return out


def orth_eigs_closed(I, R: float, axis_xi: int = 1, axis_R: int = 2) -> OrthEigs:
    I = _inertia(I)
    perm = _orth_perm(axis_xi, axis_R)
    I1, I2, I3 = (float(I.diag[p]) for p in perm)
    x2 = kepler_xi2(I2, R)
    if not x2 > 0:
        raise NoEquilibrium(f"no orthogonal equilibrium at R = {R}")
    R2 = R * R
    A1 = I1 - I3
    A2 = 1.0 + (I1 - I2) / R2
    S1 = (2 * R2**2 + (9 * I2 - 6 * I1 - 3) * R2 - 15 * I1 + 45 * I1 * I2) / ((I1 + R2) * 2 * R**5 * x2)
    S2 = I3 - I2
    S3 = (I1 - I2) * (1 + (I1 - I2) / R2) * (8 * R2 + 6 * I1 + 3 - 15 * I2)
    arnold = (x2 * (I1 - I3) * (I1 + R2) / (I3 + R2), x2 * (I1 - I2 + R2) * (I1 + R2) / I2)
    smale = (
        x2 * ((3 * R2 - I1) / (R2 + I1) - 4 + 2 / (R**3 * x2)),
        3 * (I1 + R2) ** 2 * (I3 - I2) / R**5,
        (I1 - I2 + R2) * (I1 - I2) * (6 * I1 + 8 * R2 + 3 - 15 * I2) / R**5,
    )
    E = np.eye(6)
    ab = np.column_stack([_embed(perm, E[1]), _embed(perm, E[2])])[:3]
    sb = np.column_stack([
        _embed(perm, E[4]),
        _embed(perm, -R * E[0] + (R2 + I1) * E[5]),
        _embed(perm, R * E[2] + (R2 + I1 - I2) * E[3]),
    ])
    return OrthEigs(A1, A2, S1, S2, S3, x2, arnold, smale, ab, sb)


def r_crit(I) -> float:
    """Radius where the orthogonal family with ``xi || e1``, ``R || e2`` loses stability."""
    I = _inertia(I)
    I1, I2, I3 = I.diag
    if not I1 > I3 > I2:
        raise LagrangeOrderingError(f"Lagrange ordering I1 > I3 > I2 violated: {tuple(I.diag)}")
    b = 9 * I2 - 6 * I1 - 3
    c = -15 * I1 + 45 * I1 * I2
    x = (-b + np.sqrt(b * b - 8 * c)) / 4
    return float(np.sqrt(x))


@dataclass(frozen=True)
class ParEigs:
    A1: float
    A2: float
    S1: float
    S2: float
    S3: float
    R_star: float
    arnold_basis: np.ndarray
    smale_basis: np.ndarray

    @property
    def values(self) -> tuple[float, float, float, float, float]:
        return (self.A1, self.A2, self.S1, self.S2, self.S3)


def _par_perm(axis: int) -> list[int]:
    k = _axis(axis)
    a, c = [m for m in range(3) if m != k]
    return [a, k, c]


def par_eigs_closed(I, axis: int = 2, xi_mag: float = 1.0) -> ParEigs:
    I = _inertia(I)
    perm = _par_perm(axis)
    I1, I2, I3 = (float(I.diag[p]) for p in perm)
    r2 = parallel_radius2(I2)
    if not r2 > 0:
        raise NoEquilibrium(f"no parallel family on axis {axis}")
    Rs = np.sqrt(r2)
    x2 = xi_mag * xi_mag
    A1 = -x2 * I2 * (7 * I2 + 2 * I3 - 3) / (9 * I2 + 2 * I3 - 3)
    A2 = -x2 * I2 * (7 * I2 + 2 * I1 - 3) / (2 * I1 + 9 * I2 - 3)
    S1 = (I2 - I3) * (x2 * Rs**5 - 3 * r2 + 3 * I2 - 3 * I3) * (r2 - I2 + I3) / Rs**5
    S2 = (I2 - I1) * (x2 * Rs**5 - 3 * r2 + 3 * I2 - 3 * I1) * (r2 - I2 + I1) / Rs**5
    S3 = 2 / Rs**3
    E = np.eye(6)
    ab = np.column_stack([_embed(perm, E[0]), _embed(perm, E[2])])[:3]
    sb = np.column_stack([
        _embed(perm, -Rs * E[0] + (r2 + I3 - I2) * E[5]),
        _embed(perm, Rs * E[2] + (r2 + I1 - I2) * E[3]),
        _embed(perm, E[4]),
    ])
    return ParEigs(A1, A2, S1, S2, S3, Rs, ab, sb)


def par_degenerate_rates(I, axis: int = 2) -> tuple[float, float]:
    """Rates ``xi >= 0`` along the parallel family where ``S1`` or ``S2`` vanishes (NaN if none)."""
    I = _inertia(I)
    perm = _par_perm(axis)
    I1, I2, I3 = (float(I.diag[p]) for p in perm)
    r2 = parallel_radius2(I2)
    if not r2 > 0:
        raise NoEquilibrium(f"no parallel family on axis {axis}")
    Rs = np.sqrt(r2)
    out = []
    for Ik in (I3, I1):
        v = (3 * r2 - 3 * I2 + 3 * Ik) / Rs**5
        out.append(float(np.sqrt(v)) if v > 0 else float("nan"))
    return tuple(out)


def delta_orth(I, R2: float) -> float:
    """Determinant governing bifurcations of the orthogonal family, up to a constant factor."""
    I = _inertia(I)
    I1, I2, I3 = I.diag
    x2 = kepler_xi2(I2, R2)
    if x2 < 0:
        raise NoEquilibrium(f"no orthogonal equilibrium at R = {R2}")
    x1 = np.sqrt(x2)
    return float(x1**3 * (I3 - I1) * (I2 - I3) * (I2 - I1) * (8 * R2 * R2 + 6 * I1 - 15 * I2 + 3))


@dataclass(frozen=True)
class ParBifurcation:
    R_star: float
    alpha1: float
    alpha2: float
    alpha3: float


def par_bifurcation_points(I) -> ParBifurcation:
    """Eigen-shift values where the parallel family on ``e2`` with ``xi = 0`` can bifurcate."""
    I = _inertia(I)
    I1, I2, I3 = I.diag
    r2 = parallel_radius2(I2)
    if not r2 > 0:
        raise NoEquilibrium(f"parallel family on e2 needs I2 > 1/3, got {I2}")
    return ParBifurcation(float(np.sqrt(r2)), float(I1 + r2), float(I2), float(I3 + r2))


def momentum_norm_profile(I, R2: float) -> tuple[float, float]:
    """``|mu|^2`` along the orthogonal family ``xi || e1``, ``R || e2`` and its derivative in ``R``."""
    I = _inertia(I)
    I1, I2 = I.diag[0], I.diag[1]
    R = float(R2)
    c = 3.0 - 9.0 * I2
    a = (I1 + R * R) ** 2
    b = (2 * R * R + c) / (2 * R**5)
    da = 4 * R * (I1 + R * R)
    db = -3 / R**4 - 2.5 * c / R**6
    return float(a * b), float(da * b + a * db)


# --- bifurcation diagram ---


def _orth_verdict(I, R, axis_xi, axis_R):
    e = orth_eigs_closed(I, R, axis_xi, axis_R)
    return classify(e.reduced[:2], e.reduced[2:], 3).classification


def _par_verdict(I, xi):
    if xi == 0.0:
        return INCONCLUSIVE
    e = par_eigs_closed(I, 2, xi)
    return classify((e.A1, e.A2), (e.S1, e.S2, e.S3), 3).classification


def asym_diagram(I, R_max: float = 3.0, n: int = 60) -> BifurcationDiagram:
    """Orthogonal, parallel and conical branches near the parallel-family radius on ``e2``."""
    I = _inertia(I)
    d = BifurcationDiagram("asym", tuple(float(x) for x in I.diag))
    I2 = I.diag[1]
    r2 = parallel_radius2(I2)
    R_lo = np.sqrt(r2) if r2 > 0 else 0.3
    Rs = np.linspace(R_lo, R_max, n + 1)[1:]
    import warnings

    from .equilibrium import SmallOrbitWarning

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallOrbitWarning)
        for name, ax in (("Orth^1_2", 1), ("Orth^3_2", 3)):
            b = d.add_branch(Branch(name, "R", isotropy=f"Orth{ax}2"))
            if r2 > 0:
                b.add(R_lo, R_lo, 0.0, INCONCLUSIVE)
            for R in Rs:
                try:
                    eq = solve_orthogonal(I, R, 2, ax)
                except NoEquilibrium:
                    continue
                b.add(R, R, eq.orbital_rate, _orth_verdict(I, R, ax, 2))
        if r2 > 0:
            rates = par_degenerate_rates(I, 2)
            top = 1.5 * np.nanmax(rates) if np.any(np.isfinite(rates)) else 1.0
            b = d.add_branch(Branch("Par_2", "xi", isotropy="Par2"))
            for x in np.linspace(0.0, top, n + 1):
                b.add(x, R_lo, x, _par_verdict(I, float(x)))
            pb = par_bifurcation_points(I)
            d.junctions.append(Junction("R*", "R", pb.R_star, ("Orth^1_2", "Orth^3_2", "Par_2"), pb.R_star,
                                        note="orthogonal families terminate with xi -> 0 on the parallel family"))
            d.meta["R_star"] = pb.R_star
            d.meta["alpha"] = [pb.alpha1, pb.alpha2, pb.alpha3]
        for name, plane, slot in (("Obl_12", (1, 2), 1), ("Obl_23", (2, 3), 0)):
            b = d.add_branch(Branch(name, "R", isotropy="conical"))
            for R in np.linspace(0.25, R_max, 4 * n + 1):
                for eq in solve_conical(I, float(R), plane):
                    try:
                        v, _ = regular_stability(I, eq.q, eq.gen)
                        stab = v.classification
                    except Exception:
                        stab = INCONCLUSIVE
                    b.add(R, R, eq.orbital_rate, stab)
            if r2 > 0:
                # the S-eigenvalue paired with this plane vanishes where the cone closes onto the parallel axis
                rate = rates[slot]
                if np.isfinite(rate):
                    d.junctions.append(Junction(f"Par_2/{name}", "xi", rate, ("Par_2", name), float(R_lo),
                                                note="parallel Smale form degenerate"))
    d.validate()
    return d
