"""Relative equilibria of an axisymmetric body (symmetry axis ``e1``, moments ``(I1, I2, I2)``).

Generators are ``(xi, eta)`` with ``eta`` the spin about the symmetry axis.
Each ``*_classify`` returns closed-form eigenvalues as printed in the source
derivation, the corrected values that agree with the numeric REM engine, and
the verdict from both.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.optimize import brentq

from .asym import kepler_xi2
from .diagram import INCONCLUSIVE, BifurcationDiagram, Branch, Junction
from .equilibrium import (
    Equilibrium,
    NoEquilibrium,
    ResidualTooLarge,
    RESIDUAL_TOL,
    SmallOrbitWarning,
    make,
    warn_small_orbit,
)
from .model import AXI, GroupElement, InertiaTensor, act, adjoint, axi_discrete
from .rem import (
    DEGENERACY_RTOL,
    GMU_STABLE,
    UNSTABLE,
    StabilityVerdict,
    arnold_form,
    build_splitting,
    classify,
    form_eigs,
    regular_stability,
    singular_data,
    singular_form,
    smale_form,
)

# beyond this radius the double-precision amended Hessian loses the O(R^-5) Smale entries
HP_RADIUS = 100.0
MP_DPS = 60
# relative size below which an extended-precision eigenvalue counts as zero
MP_DEGENERACY_RTOL = 1e-30
RICHARDSON_EPS = 1e-3
LIMIT_TOL = 1e-6
JUNCTION_TOL = 1e-15
# closed forms are exact, so only values this close to zero count as degenerate
CLOSED_FORM_ZERO = 1e-12


def axi_inertia(I1: float, I2: float) -> InertiaTensor:
    I = InertiaTensor(float(I1), float(I2), float(I2))
    if I.symmetry == "spherical":
        raise ValueError("axisymmetric families need I1 != I2")
    return I


def _check_R(R: float) -> float:
    R = float(R)
    if not R > 0:
        raise ValueError("R must be positive")
    return R


def _rate2(I_R: float, R: float, what: str) -> float:
    x2 = kepler_xi2(I_R, R)
    if x2 < 0:
        raise NoEquilibrium(f"no {what} equilibrium: 2R^2 + 3 - 9 I = {2 * R * R + 3 - 9 * I_R:.6g} < 0")
    return x2


# --- existence ---


def solve_cylindrical(I1: float, I2: float, R: float, alpha: float) -> Equilibrium:
    """``xi || e1``, ``R || e2``, spin ``eta = -alpha xi1``."""
    I, R = axi_inertia(I1, I2), _check_R(R)
    x1 = np.sqrt(_rate2(I2, R, "cylindrical"))
    warn_small_orbit(R)
    return make("cylindrical", I, (0.0, R, 0.0), (x1, 0.0, 0.0), -alpha * x1,
                params={"R": R, "alpha": alpha}, aux={"alpha": alpha},
                isotropy="cylindrical_0" if alpha == 0 else "cylindrical").checked()


def solve_hyperbolic(I1: float, I2: float, R: float, theta: float) -> Equilibrium:
    """``xi = |xi| (sin theta, 0, cos theta)``, ``R || e2``."""
    I, R = axi_inertia(I1, I2), _check_R(R)
    c, s = np.cos(theta), np.sin(theta)
    if abs(c) < 1e-12:
        raise ValueError("theta = pi/2 is the cylindrical family; use solve_cylindrical")
    xm = np.sqrt(_rate2(I2, R, "hyperbolic"))
    warn_small_orbit(R)
    eta = -((I2 - I1) / I1) * xm * s
    return make("hyperbolic", I, (0.0, R, 0.0), (xm * s, 0.0, xm * c), eta,
                params={"R": R, "theta": theta}, aux={"theta": theta, "alpha": (I2 - I1) / I1},
                isotropy="hyperbolic_0" if theta == 0 else "hyperbolic").checked()


def solve_isolated(I1: float, I2: float, R: float) -> Equilibrium:
    """``R || e1``, ``xi || e2``, no spin; the locked inertia is singular here."""
    I, R = axi_inertia(I1, I2), _check_R(R)
    x2 = np.sqrt(_rate2(I1, R, "isolated"))
    warn_small_orbit(R)
    return make("isolated", I, (R, 0.0, 0.0), (0.0, x2, 0.0), 0.0,
                params={"R": R}, aux={}, isotropy="isolated").checked()


def conical_lambda2(I1: float, I2: float, R: float, psi: float) -> float:
    c, s = np.cos(psi), np.sin(psi)
    d = I1 - I2
    num = c * c * (2 * R * R + (9 - 15 * c * c) * d) ** 2
    den = 2 * R**7 * s * s * (2 * R * R + (3 - 9 * c * c) * d)
    return num / den


def conical_eta_display(I1: float, I2: float, R: float, psi: float, lam: float) -> float:
    """Spin as printed (before the sign fixed by the residual)."""
    c, s = np.cos(psi), np.sin(psi)
    d = I1 - I2
    br = (15 * c * c - 9) * d - 8 * R * R + 6 * R * R * c * c + 2 * lam * lam * R**7 * s * s
    return c * (I2 - I1) / (2 * s * s * lam * I1 * R**6) * br


_XI1_VARIANTS = {
    # eta coefficient as stated vs as derived; the residual decides
    "statement": lambda I1, I2: I1 / (I2 - I1),
    "proof": lambda I1, I2: I1 / (I1 - I2),
}


def _conical_candidates(I1, I2, R, psi):
    lam2 = conical_lambda2(I1, I2, R, psi)
    if not lam2 > 0:
        raise NoEquilibrium(f"no conical equilibrium at R = {R}, psi = {psi}: lambda^2 = {lam2:.6g}")
    lam = np.sqrt(lam2)
    c, s = np.cos(psi), np.sin(psi)
    eta_d = conical_eta_display(I1, I2, R, psi, lam)
    for eta_sign in (1.0, -1.0):
        eta = eta_sign * eta_d
        for name, k in _XI1_VARIANTS.items():
            x1 = 3 * c / (lam * R**4) + k(I1, I2) * eta
            yield lam, eta_sign, name, np.array([x1, lam * R * s, 0.0]), eta


def solve_conical_axi(I1: float, I2: float, R: float, psi: float) -> Equilibrium:
    """``R = R (cos psi, sin psi, 0)``, ``xi = (xi1, lambda R sin psi, 0)`` with ``lambda > 0``.

    Four sign variants of ``(eta, xi1)`` are tried; the one with the smallest
    residual is kept and must pass the residual tolerance.
    """
    I, R = axi_inertia(I1, I2), _check_R(R)
    if not (0 < abs(psi) < np.pi / 2):
        raise ValueError("psi must lie in (-pi/2, pi/2) without 0")
    Rv = R * np.array([np.cos(psi), np.sin(psi), 0.0])
    best = None
    for lam, es, name, xi, eta in _conical_candidates(I1, I2, R, psi):
        eq = make("conical", I, Rv, xi, eta)
        r = eq.residual_norm
        if best is None or r < best[0]:
            best = (r, lam, es, name, xi, eta)
    r, lam, es, name, xi, eta = best
    if not r < RESIDUAL_TOL:
        raise ResidualTooLarge(f"conical: best sign variant leaves residual {r:.3e}")
    warn_small_orbit(R)
    companion = np.append(-xi, -eta)
    aux = {
        "psi": psi,
        "lambda": lam,
        "lambda_negative_gen": companion,
        "eta_sign": es,
        "xi1_variant": name,
        "alpha": -eta / xi[0] if xi[0] != 0 else float("nan"),
        "alpha_conic": alpha_conic(I1, I2, R),
        "offset": float(np.arcsin(abs(Rv @ xi) / (R * np.linalg.norm(xi)))),
    }
    return make("conical", I, Rv, xi, eta, params={"R": R, "psi": psi}, aux=aux, isotropy="conical").checked()


def parallel_axi_radius2(I_axis: float) -> float:
    return 0.5 * (9.0 * I_axis - 3.0)


def solve_parallel_axi(I1: float, I2: float, axis: int = 1, xi_mag: float = 0.0) -> Equilibrium:
    """``xi`` parallel to ``R`` along a principal axis, no spin."""
    I = axi_inertia(I1, I2)
    if axis not in (1, 2, 3):
        raise ValueError("axis must be 1, 2 or 3")
    I_ax = I1 if axis == 1 else I2
    r2 = parallel_axi_radius2(I_ax)
    if not r2 > 0:
        raise NoEquilibrium(f"no parallel equilibrium on axis {axis}: I = {I_ax:.6g} <= 1/3")
    R = np.sqrt(r2)
    warn_small_orbit(R)
    e = np.zeros(3)
    e[axis - 1] = 1.0
    return make("parallel", I, R * e, xi_mag * e, 0.0, params={"axis": axis, "xi_mag": xi_mag},
                aux={"R_star": R}).checked()


def alpha_conic(I1: float, I2: float, R: float) -> float:
    """Spinning quotient where the conical family meets the cylindrical one."""
    d = I1 - I2
    return -d * (8 * R * R + 9 * d) / (I1 * (2 * R * R + 9 * d))


# --- stability reports ---


@dataclass(frozen=True)
class AxiStability:
    family: str
    verdict: StabilityVerdict
    engine: StabilityVerdict
    printed: dict
    corrected: dict
    conditions: dict = field(default_factory=dict)
    proposition: str = INCONCLUSIVE
    report: dict = field(default_factory=dict)

    @property
    def classification(self) -> str:
        return self.verdict.classification

    @property
    def agrees(self) -> bool:
        return self.verdict.classification == self.engine.classification

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "classification": self.classification,
            "verdict": self.verdict.to_dict(),
            "engine": self.engine.to_dict(),
            "printed": dict(self.printed),
            "corrected": dict(self.corrected),
            "conditions": dict(self.conditions),
            "proposition": self.proposition,
            "report": {k: v for k, v in self.report.items()},
        }


def _engine_on_basis(eq: Equilibrium, arnold_basis, smale_basis):
    sp = build_splitting(eq.inertia, eq.q, eq.gen)
    A = arnold_form(eq.inertia, eq.q, eq.gen, splitting=sp, basis=arnold_basis)
    S = smale_form(eq.inertia, eq.q, sp.mu, basis=smale_basis)
    return A, S


def cyl_eigs_closed(I1: float, I2: float, R: float, alpha: float) -> tuple[dict, dict, np.ndarray, np.ndarray]:
    """Printed and corrected eigenvalues plus the adapted bases of the two forms."""
    x2 = _rate2(I2, R, "cylindrical")
    R2 = R * R
    k = (1 + alpha) * I1
    c = R2 + k - I2
    A1 = x2 * (k + R2) * (k - I2) / (I2 + R2)
    printed = {
        "A1": A1,
        "A2": x2 * (k + R2) * (k + R2 - I2) / (I2 + R2),
        "S1": c / R**5 * (2 * R2 * ((4 + alpha) * I1 - 4 * I2) + 3 * (I1 - I2) * (k - I2)),
        "S2": x2,
    }
    corrected = {
        "A1": A1,
        "A2": x2 * (k + R2) * (k + R2 - I2) / I2,
        "S1": c * (2 * R2 * ((4 + alpha) * I1 - 4 * I2) + 9 * (I1 - I2) * (k - I2)) / (2 * R**5),
        "S2": (2 * R2 + 9 * I2 - 3) / (2 * R**5),
    }
    E4, E6 = np.eye(4), np.eye(6)
    ab = np.column_stack([E4[1], E4[2]])
    sb = np.column_stack([R * E6[2] + c * E6[3], E6[4]])
    return printed, corrected, ab, sb


def cyl_conditions(I1: float, I2: float, R: float, alpha: float) -> dict:
    k = (1 + alpha) * I1
    return {
        "R2 > -(1+alpha) I1": R * R > -k,
        "I1 (1+alpha) > I2": k > I2,
        "S1 condition": I1 * (4 + alpha) - 4 * I2 > -(3 / (2 * R * R)) * (I1 - I2) * (k - I2),
    }


def cyl_classify(I1: float, I2: float, R: float, alpha: float, engine: bool = True) -> AxiStability:
    eq = solve_cylindrical(I1, I2, R, alpha)
    printed, corrected, ab, sb = cyl_eigs_closed(I1, I2, R, alpha)
    v = _closed_verdict((corrected["A1"], corrected["A2"]), (corrected["S1"], corrected["S2"]))
    ev = _engine_verdict(eq, ab, sb) if engine else v
    cond = cyl_conditions(I1, I2, R, alpha)
    prop = GMU_STABLE if all(cond.values()) else INCONCLUSIVE
    return AxiStability("cylindrical", v, ev, printed, corrected, cond, prop)


def _closed_verdict(arnold, smale, method: str = "regular") -> StabilityVerdict:
    return classify(arnold, smale, 4, scale=CLOSED_FORM_ZERO / DEGENERACY_RTOL, method=method)


def _engine_verdict(eq: Equilibrium, ab, sb) -> StabilityVerdict:
    A, S = _engine_on_basis(eq, ab, sb)
    return classify(form_eigs(A), form_eigs(S), 4)


def hyp_bound(I2: float) -> float:
    """Large-orbit bound on ``R^2`` for the hyperbolic family (as printed); NaN where undefined."""
    d = 3 + 102 * I2 - 351 * I2 * I2
    return 0.5 * (3 * (1 - I2) + np.sqrt(d)) if d >= 0 else float("nan")


def hyp_root(I2: float) -> float:
    """Largest root in ``R^2`` of the hyperbolic ``S2``; zero when ``S2 > 0`` for every radius."""
    d = 9 + 102 * I2 - 351 * I2 * I2
    return 0.25 * (3 * (1 - I2) + np.sqrt(d)) if d >= 0 else 0.0


def hyp_eigs_closed(I1: float, I2: float, R: float, theta: float) -> tuple[dict, dict, np.ndarray, np.ndarray]:
    x2 = _rate2(I2, R, "hyperbolic")
    R2 = R * R
    c, s = np.cos(theta), np.sin(theta)
    A1 = (R2 + I2) * x2 * c * c * I2 / R2
    A2 = x2 * R2 * (R2 + I2) * (R2 * R2 + 2 * R2 * c * c * I2 + I2 * I2 * c**4) / I2
    S1 = 3 * (I1 - I2) * (R2 + I2 * c * c) ** 2 * (R2 + I2) ** 2 / R**5
    S2p = 2 * R2 * R2 - 3 * R2 * (I1 + I2) + 15 * I2 * (I2 - I1)
    printed = {"A1": A1, "A2": A2, "S1": S1, "S2": S2p}
    corrected = {"A1": A1, "A2": A2, "S1": S1, "S2": S2p * (I2 + R2) * c * c / (2 * R**5)}
    E6 = np.eye(6)
    ab = np.column_stack([np.eye(4)[1], [(I2 + R2) * c, 0.0, -R2 * s, (I2 + R2) * c]])
    v1 = (R2 + I2) * (R * E6[2] - I2 * s * c * E6[5]) + (R2 * R2 + R2 * I2 * (1 + c * c) + I2 * I2 * c * c) * E6[3]
    v2 = -2 * R * s * E6[1] + (R2 + I2) * c * E6[4]
    return printed, corrected, ab, np.column_stack([v1, v2])


def hyp_classify(I1: float, I2: float, R: float, theta: float, engine: bool = True) -> AxiStability:
    eq = solve_hyperbolic(I1, I2, R, theta)
    printed, corrected, ab, sb = hyp_eigs_closed(I1, I2, R, theta)
    v = _closed_verdict((corrected["A1"], corrected["A2"]), (corrected["S1"], corrected["S2"]))
    ev = _engine_verdict(eq, ab, sb) if engine else v
    cond = {"oblate": I1 > I2, "R2 > bound": R * R > hyp_root(I2)}
    prop = GMU_STABLE if all(cond.values()) else (UNSTABLE if I1 < I2 else INCONCLUSIVE)
    return AxiStability("hyperbolic", v, ev, printed, corrected, cond, prop)


# the quarter turn about the symmetry axis carrying the isolated point to xi || e3
_QUARTER = axi_discrete(1.0, np.array([[0.0, -1.0], [1.0, 0.0]]))


def isolated_to_e3(eq: Equilibrium) -> Equilibrium:
    g = GroupElement(_QUARTER, _QUARTER, AXI)
    q = act(g, eq.q, AXI)
    v = adjoint(g, eq.gen)
    return make(eq.family, eq.inertia, q.position, v[:3], v[3], eq.params, eq.aux, eq.isotropy)


def isolated_eigs_closed(I1: float, I2: float, R: float) -> tuple[dict, np.ndarray]:
    """``H1..H3`` on the basis of ``Sigma`` in the ``xi || e3`` picture."""
    R2 = R * R
    H = {
        "H1": (R2 * R2 + 3 * R2 * (I1 - 2 * I2) + 15 * I2 * (I1 - I2)) / (R**5 * (R2 + I2)),
        "H2": 3 * (I2 - I1) * (R2 + I2) ** 2 / R**5,
        "H3": (R2 * (4 * I2 - 3 * I1) - 6 * I2 * (I1 - I2)) * (R2 + I2) / R**5,
    }
    E6 = np.eye(6)
    basis = np.column_stack([E6[3], -R * E6[2] + (I2 + R2) * E6[4], R * E6[1] + (I2 + R2) * E6[5]])
    return H, basis


def isolated_conditions(I1: float, I2: float, R: float) -> dict:
    R2 = R * R
    return {
        "prolate": I1 < I2,
        "large orbit": R2 * R2 > 3 * R2 * (2 * I2 - 2 * I1) + 15 * I2 * (I2 - I1),
        "oblate instability": I1 > I2 and 4 * I2 - 3 * I1 > 6 * I2 * (I1 - I2) / R2,
    }


def isolated_classify(I1: float, I2: float, R: float, engine: bool = True) -> AxiStability:
    eq = isolated_to_e3(solve_isolated(I1, I2, R))
    H, basis = isolated_eigs_closed(I1, I2, R)
    v = _closed_verdict((), tuple(H.values()), method="singular")
    if engine:
        data = singular_data(eq.inertia, eq.q, eq.gen)
        F = singular_form(eq.inertia, eq.q, eq.gen, data, basis=basis)
        ev = classify((), form_eigs(F), 4, method="singular")
        numeric = dict(zip(("H1", "H2", "H3"), np.diag(F).tolist()))
    else:
        ev, numeric = v, {}
    cond = isolated_conditions(I1, I2, R)
    if cond["prolate"] and cond["large orbit"]:
        prop = GMU_STABLE
    elif cond["oblate instability"]:
        prop = UNSTABLE
    else:
        prop = INCONCLUSIVE
    return AxiStability("isolated", v, ev, dict(H), dict(H), cond, prop, {"engine_diag": numeric})


# --- conical family: asymptotics and extended-precision forms ---


def conical_asymptotics(I1: float, I2: float, R: float, psi: float) -> dict:
    """Leading large-R expansions of the conical Arnold and Smale entries."""
    c, s = np.cos(psi), np.sin(psi)
    s2, c2 = s * s, c * c
    S1 = 1 / (R**3 * s2) + 3 * (I1 - I2) * (3 * c2 - 1) / (2 * R**5 * s2)
    S2 = c2 / (R * s2) + ((45 * I1 - 39 * I2) * s2 + 6 * I1 - 2 * I2) / (2 * R**3 * s2)
    S12 = c / (R * R * s2) - c * ((21 * I1 - 23 * I2) * s2 - 6 * I1 + 4 * I2) / (2 * R**4 * s2)
    return {
        "A1": R / (s2 * I2),
        "A2": (I2 - I1) * 3 * s2 / (R**3 * c2),
        "S1": S1,
        "S2": S2,
        "S12": S12,
        "det_lead": (4 * I2 - 3 * I1) / R**6,
    }


def _mp_hat(v):
    return mp.matrix([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])


def _mp_locked(I1, I2, Rv):
    r2 = sum(x * x for x in Rv)
    L = mp.matrix(4, 4)
    d = (I1, I2, I2)
    for i in range(3):
        for j in range(3):
            L[i, j] = (d[i] + r2 if i == j else 0) - Rv[i] * Rv[j]
    L[0, 3] = L[3, 0] = -I1
    L[3, 3] = I1
    return L


def _mp_v2(I1, I2, Rv):
    r = mp.sqrt(sum(x * x for x in Rv))
    q = I1 * Rv[0] ** 2 + I2 * (Rv[1] ** 2 + Rv[2] ** 2)
    return -1 / r - 1 / (2 * r**3) + 3 * q / (2 * r**5)


def _mp_null(A, k):
    """Last ``k`` right singular vectors of ``A`` as columns."""
    n = A.cols
    _, _, V = mp.svd_r(A, full_matrices=True)
    return mp.matrix([[V[n - k + j, i] for j in range(k)] for i in range(n)])


@dataclass(frozen=True)
class ConicalForms:
    arnold: np.ndarray
    smale: np.ndarray
    smale_radial: tuple[float, float, float]  # (F_rr, F_rt, F_tt) on the radial/tangential internal basis
    arnold_eigs: tuple[float, ...]
    smale_eigs: tuple[float, ...]
    det: float


def conical_forms_mp(eq: Equilibrium, dps: int = MP_DPS) -> ConicalForms:
    """Arnold and Smale forms of a conical equilibrium in extended precision.

    The Smale form is reported on the internal variations ``v1 = r/s``,
    ``v2 = (c R / s) r + (s R / c) t`` where ``r``, ``t`` are the internal
    variations whose position part is the radial and in-plane tangential unit vector.
    """
    with mp.workdps(dps):
        I1, I2 = mp.mpf(eq.inertia.i1), mp.mpf(eq.inertia.i2)
        psi = mp.mpf(eq.params["psi"])
        R = mp.mpf(eq.params["R"])
        c, s = mp.cos(psi), mp.sin(psi)
        lam = mp.sqrt(mp.mpf(1) * c**2 * (2 * R**2 + (9 - 15 * c**2) * (I1 - I2)) ** 2
                      / (2 * R**7 * s**2 * (2 * R**2 + (3 - 9 * c**2) * (I1 - I2))))
        br = (15 * c**2 - 9) * (I1 - I2) - 8 * R**2 + 6 * R**2 * c**2 + 2 * lam**2 * R**7 * s**2
        eta = eq.aux["eta_sign"] * c * (I2 - I1) / (2 * s**2 * lam * I1 * R**6) * br
        k = I1 / (I2 - I1) if eq.aux["xi1_variant"] == "statement" else I1 / (I1 - I2)
        gen = mp.matrix([3 * c / (lam * R**4) + k * eta, lam * R * s, 0, eta])
        Rv = [R * c, R * s, mp.mpf(0)]
        L = _mp_locked(I1, I2, Rv)
        mu = L * gen
        # g_mu = span{(mu3, 0), e4}; g_perp is its L-orthogonal complement
        gmu = mp.matrix([[mu[0], 0], [mu[1], 0], [mu[2], 0], [0, 1]])
        gperp = _mp_null((gmu.T * L), 2)
        # fundamental fields at B = Id and kinetic metric
        X = mp.matrix(6, 4)
        for i in range(3):
            X[i, i] = 1
        X[0, 3] = -1
        e1xR = [0, -Rv[2], Rv[1]]
        for i in range(3):
            X[3 + i, 3] = e1xR[i]
        G = mp.matrix(6, 6)
        Rh = _mp_hat(Rv)
        J = mp.matrix([[L[i, j] for j in range(3)] for i in range(3)])
        for i in range(3):
            for j in range(3):
                G[i, j] = J[i, j]
                G[i, 3 + j] = Rh[i, j]
                G[3 + i, j] = -Rh[i, j]
            G[3 + i, 3 + i] = 1
        # D(I xi)[v] for the six tangent directions
        D = mp.matrix(4, 6)
        for kk in range(6):
            U = mp.matrix(4, 4)
            dB = mp.matrix(4, 4)
            if kk < 3:
                e = [0, 0, 0]
                e[kk] = 1
                eh = _mp_hat(e)
                for i in range(3):
                    for j in range(3):
                        U[i, j] = eh[i, j]
            else:
                w = [0, 0, 0]
                w[kk - 3] = 1
                rw = sum(Rv[i] * w[i] for i in range(3))
                for i in range(3):
                    for j in range(3):
                        dB[i, j] = (2 * rw if i == j else 0) - Rv[i] * w[j] - w[i] * Rv[j]
            col = (U * L - L * U + dB) * gen
            for i in range(4):
                D[i, kk] = col[i]
        cons = mp.matrix(4, 6)
        top = (X * gmu).T * G
        bot = gperp.T * D
        for i in range(2):
            for j in range(6):
                cons[i, j] = top[i, j]
                cons[2 + i, j] = bot[i, j]
        Vint = _mp_null(cons, 2)
        # internal variations with prescribed in-plane position part
        P = mp.matrix([[Vint[3, 0], Vint[3, 1]], [Vint[4, 0], Vint[4, 1]]])

        def lift(d1, d2):
            a = mp.lu_solve(P, mp.matrix([d1, d2]))
            return Vint * a

        vr, vt = lift(c, s), lift(-s, c)
        v1 = vr / s
        v2 = (c * R / s) * vr + (s * R / c) * vt

        def amended(v, t):
            th = _mp_hat([t * v[0], t * v[1], t * v[2]])
            Bt = mp.expm(-th)
            m3 = Bt * mp.matrix([mu[0], mu[1], mu[2]])
            m = mp.matrix([m3[0], m3[1], m3[2], mu[3]])
            Rt = [Rv[i] + t * v[3 + i] for i in range(3)]
            Lt = _mp_locked(I1, I2, Rt)
            return _mp_v2(I1, I2, Rt) + (m.T * mp.lu_solve(Lt, m))[0] / 2

        def quad(v):
            return mp.diff(lambda t: amended(v, t), 0, 2)

        def bil(a, b):
            return (quad(a + b) - quad(a - b)) / 4

        F = [[bil(v1, v1), bil(v1, v2)], [bil(v1, v2), bil(v2, v2)]]
        rad = (bil(vr, vr), bil(vr, vt), bil(vt, vt))
        # Arnold form on g_perp
        C = mp.matrix(4, 4)
        mh = _mp_hat([mu[0], mu[1], mu[2]])
        xh = _mp_hat([gen[0], gen[1], gen[2]])
        ad = mp.matrix(4, 4)
        for i in range(3):
            for j in range(3):
                C[i, j] = mh[i, j]
                ad[i, j] = xh[i, j]
        CW = C * gperp
        A = CW.T * mp.inverse(L) * CW + CW.T * (-ad) * gperp
        A = (A + A.T) / 2
        Fm = mp.matrix(F)
        ae = sorted(float(x) for x in mp.eigsy(A, eigvals_only=True))
        se = sorted(float(x) for x in mp.eigsy(Fm, eigvals_only=True))
        to_np = lambda M: np.array([[float(M[i, j]) for j in range(M.cols)] for i in range(M.rows)])
        return ConicalForms(to_np(A), to_np(Fm), tuple(float(x) for x in rad), tuple(ae), tuple(se), float(mp.det(Fm)))


def conical_proposition(I1: float, I2: float) -> str:
    if I1 < I2:
        return GMU_STABLE
    if 4 * I2 > 3 * I1:
        return UNSTABLE
    return INCONCLUSIVE


def conical_classify(I1: float, I2: float, R: float, psi: float, report: bool = True) -> AxiStability:
    """REM verdict at a conical point plus the large-R asymptotic report.

    The verdict uses the extended-precision forms: the Smale entries are
    ``O(R^-5)`` against ``O(R^-1)`` and lose their digits in double precision
    at large ``R``. ``engine`` holds the double-precision verdict as a cross-check.
    """
    eq = solve_conical_axi(I1, I2, R, psi)
    forms = conical_forms_mp(eq)
    allv = np.abs(forms.arnold_eigs + forms.smale_eigs)
    v = classify(forms.arnold_eigs, forms.smale_eigs, 4, scale=MP_DEGENERACY_RTOL / DEGENERACY_RTOL * allv.max(),
                 method="regular-mp")
    ev = regular_stability(eq.inertia, eq.q, eq.gen)[0] if R <= HP_RADIUS else v
    printed = conical_asymptotics(I1, I2, R, psi)
    corrected: dict = {}
    rep: dict = {"arnold_eigs": list(forms.arnold_eigs), "smale_eigs": list(forms.smale_eigs)}
    if report:
        F = forms.smale
        c = np.cos(psi)
        corrected = {"S1": F[0, 0], "S2": F[1, 1], "S12": F[0, 1], "det": forms.det}
        rep.update({
            "det_R6": forms.det * R**6,
            "det_lead_R6": 4 * I2 - 3 * I1,
            "det_ratio": forms.det / printed["det_lead"] if printed["det_lead"] != 0 else float("nan"),
            "tangential_R5_over_c2": forms.smale_radial[2] * R**5 / (c * c),
        })
    cond = {"prolate": I1 < I2, "4 I2 > 3 I1": 4 * I2 > 3 * I1}
    return AxiStability("conical", v, ev, printed, corrected, cond, conical_proposition(I1, I2), rep)


# --- endpoint limits of the conical family ---


def _richardson(f, x0: float, step: float):
    """``(8 f(x0+h) - 6 f(x0+2h) + f(x0+4h)) / 3`` removes the linear and quadratic terms."""
    return (8 * f(x0 + step) - 6 * f(x0 + 2 * step) + f(x0 + 4 * step)) / 3


def _conical_state(I1, I2, R, psi):
    eq = solve_conical_axi(I1, I2, R, psi)
    return np.concatenate([eq.q.position, eq.gen.vector])


@dataclass(frozen=True)
class ConicalLimits:
    psi_to_0: Equilibrium
    psi_to_half_pi: Equilibrium
    alpha_conic: float
    isolated_gap: float
    cylindrical_gap: float


def conical_limits(I1: float, I2: float, R: float, eps: float = RICHARDSON_EPS) -> ConicalLimits:
    """Endpoint limits of the conical family by Richardson extrapolation in ``psi``.

    The ``psi -> pi/2`` limit arrives with ``xi1 < 0``; it is compared with the
    cylindrical point after the discrete element ``diag(1, 1, -1)``, which maps
    ``(xi1, eta) -> (-xi1, -eta)`` and keeps the spinning quotient.
    """
    I = axi_inertia(I1, I2)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallOrbitWarning)
        z0 = _richardson(lambda p: _conical_state(I1, I2, R, p), 0.0, eps)
        z1 = _richardson(lambda p: _conical_state(I1, I2, R, p), np.pi / 2, -eps)
        iso = solve_isolated(I1, I2, R)
        ac = alpha_conic(I1, I2, R)
        cyl = solve_cylindrical(I1, I2, R, ac)
    lim0 = make("isolated", I, z0[:3], z0[3:6], z0[6], params={"R": R, "psi": 0.0})
    lim1 = make("cylindrical", I, z1[:3], z1[3:6], z1[6], params={"R": R, "psi": np.pi / 2})
    flip = GroupElement.fixing_body(np.diag([1.0, 1.0, -1.0]), AXI)
    mapped = np.concatenate([act(flip, lim1.q, AXI).position, adjoint(flip, lim1.gen)])
    g0 = float(np.abs(z0 - np.concatenate([iso.q.position, iso.gen.vector])).max())
    g1 = float(np.abs(mapped - np.concatenate([cyl.q.position, cyl.gen.vector])).max())
    if not (np.all(np.isfinite(z0)) and np.all(np.isfinite(z1))):
        raise ArithmeticError("conical endpoint extrapolation did not converge")
    return ConicalLimits(lim0, lim1, ac, g0, g1)


# --- bifurcation diagram ---


def _root(f, a: float, b: float) -> float:
    return float(brentq(f, a, b, xtol=JUNCTION_TOL, rtol=4 * np.finfo(float).eps))


def _around(x: float, width: float) -> tuple[float, float]:
    return x - width, x + width


def axi_diagram(I1: float, I2: float, R: float, n: int = 80) -> BifurcationDiagram:
    """Cylindrical (in alpha), hyperbolic (theta), conical (psi) and isolated branches at fixed ``R``.

    The plotted value is the spinning quotient ``-eta / xi1``.
    """
    I = axi_inertia(I1, I2)
    d = BifurcationDiagram("axi", (float(I1), float(I2), float(I2)))
    prolate = I1 < I2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallOrbitWarning)
        # junctions on the cylindrical family from closed-form sign changes
        a1 = lambda a: cyl_eigs_closed(I1, I2, R, a)[1]["A1"]
        s1 = lambda a: cyl_eigs_closed(I1, I2, R, a)[1]["S1"]
        p1_guess = (I2 - I1) / I1
        p5_guess = alpha_conic(I1, I2, R)
        p1 = _root(a1, *_around(p1_guess, 0.5))
        p5 = _root(s1, *_around(p5_guess, 0.5))
        marks = [p1, p5, 0.0]
        lo, hi = min(marks) - 1.0, max(marks) + 1.0
        cyl = d.add_branch(Branch("cylindrical", "alpha", isotropy="cylindrical"))
        for a in np.union1d(np.linspace(lo, hi, n + 1), marks):
            cyl.add(a, R, a, cyl_classify(I1, I2, R, float(a), engine=False).classification)

        hyp = d.add_branch(Branch("hyperbolic", "theta", isotropy="hyperbolic"))
        for th in np.linspace(0.0, np.pi / 2, n + 1)[:-1]:
            hyp.add(th, R, p1_guess, hyp_classify(I1, I2, R, float(th), engine=False).classification)

        con = d.add_branch(Branch("conical", "psi", isotropy="conical"))
        for psi in np.linspace(0.0, np.pi / 2, n + 1)[1:-1]:
            try:
                eq = solve_conical_axi(I1, I2, R, float(psi))
            except (NoEquilibrium, ResidualTooLarge):
                continue
            stab = conical_classify(I1, I2, R, float(psi), report=False).classification
            con.add(psi, R, eq.aux["alpha"], stab)

        lim = conical_limits(I1, I2, R)
        iso = d.add_branch(Branch("isolated", "R", isotropy="isolated"))
        x0 = _richardson(lambda p: solve_conical_axi(I1, I2, R, p).aux["alpha"], 0.0, RICHARDSON_EPS)
        iso.add(R, R, x0, isolated_classify(I1, I2, R, engine=False).classification)

    d.junctions += [
        Junction("P1", "alpha", p1, ("cylindrical", "hyperbolic"), R,
                 note="A1 of the cylindrical family vanishes; hyperbolic theta -> pi/2"),
        Junction("P5", "alpha", p5, ("cylindrical", "conical"), R,
                 note="S1 of the cylindrical family vanishes; conical psi -> pi/2"),
        Junction("P7", "alpha", p5, ("cylindrical", "conical"), R,
                 note="conical psi -> -pi/2; image of P5 under a discrete symmetry"),
        Junction("P2", "theta", 0.0, ("hyperbolic",), R, note="theta = 0, no spin"),
        Junction("P6", "psi", 0.0, ("conical", "isolated"), R, note="conical psi -> 0"),
        Junction("P9", "alpha", 0.0, ("cylindrical",), R, note="alpha = 0, no spin"),
    ]
    order = sorted((("P1", p1), ("P5", p5)), key=lambda t: -t[1])
    d.meta.update({
        "R": R,
        "body": "prolate" if prolate else "oblate",
        "alpha_P1": p1,
        "alpha_P5": p5,
        "largest_alpha_junction": order[0][0],
        "limit_gaps": {"isolated": lim.isolated_gap, "cylindrical": lim.cylindrical_gap},
    })
    d.validate()
    return d
