"""Core kinematic types: inertia, configurations, symmetry groups and their actions.

Configurations are stored in body coordinates ``(B, R)``: ``B`` is the attitude
and ``R = B^T r`` the position of the center of mass seen from the body.
Tangent vectors are ``(dtheta, dR)`` with ``dB = B hat(dtheta)``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

ORTHO_TOL = 1e-10
TRACE_TOL = 1e-12
SYMMETRY_RTOL = 1e-9

ASYM = "asym"
AXI = "axi"
MODES = (ASYM, AXI)


class ModeMismatch(ValueError):
    pass


class InvalidInertia(ValueError):
    pass


def hat(v) -> np.ndarray:
    """Skew matrix with ``hat(v) @ u == cross(v, u)``."""
    x, y, z = v
    return np.array([[0.0 * x, -z, y], [z, 0.0 * x, -x], [-y, x, 0.0 * x]])


def vee(S: np.ndarray) -> np.ndarray:
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def expm_so3(w) -> np.ndarray:
    """Rodrigues formula for ``exp(hat(w))``."""
    w = np.asarray(w, dtype=float)
    th = float(np.linalg.norm(w))
    W = hat(w)
    if th < 1e-8:
        # series through third order keeps orthogonality to roundoff
        return np.eye(3) + W + 0.5 * W @ W
    return np.eye(3) + (np.sin(th) / th) * W + ((1.0 - np.cos(th)) / th**2) * (W @ W)


def axis_rotation(angle: float, axis: int = 0) -> np.ndarray:
    w = np.zeros(3)
    w[axis] = angle
    return expm_so3(w)


@dataclass(frozen=True)
class InertiaTensor:
    """Normalized principal moments (trace one)."""

    i1: float
    i2: float
    i3: float

    def __post_init__(self):
        d = np.array([self.i1, self.i2, self.i3], dtype=float)
        if not np.all(np.isfinite(d)):
            raise InvalidInertia("principal moments must be finite")
        if abs(d.sum() - 1.0) > TRACE_TOL:
            raise InvalidInertia(f"trace must be 1, got {d.sum()!r}")
        bad = [k + 1 for k in range(3) if not 0.0 < d[k] < 0.5]
        if bad:
            raise InvalidInertia(
                f"moments {bad} violate 0 < I_k < 1/2 (triangle inequality): {tuple(d)}"
            )

    @classmethod
    def from_moments(cls, moments: Sequence[float]) -> "InertiaTensor":
        d = np.asarray(moments, dtype=float)
        d = d / d.sum()
        return cls(*map(float, d))

    @classmethod
    def axisymmetric(cls, i1: float) -> "InertiaTensor":
        """Body with symmetry axis e1: ``diag(i1, i2, i2)`` and ``i1 + 2 i2 = 1``."""
        i2 = 0.5 * (1.0 - i1)
        return cls(float(i1), i2, 1.0 - i1 - i2)

    @property
    def diag(self) -> np.ndarray:
        return np.array([self.i1, self.i2, self.i3])

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.diag)

    def _close(self, a: float, b: float) -> bool:
        return abs(a - b) <= SYMMETRY_RTOL * max(abs(a), abs(b))

    @property
    def symmetry(self) -> str:
        d = self.diag
        eq = [self._close(d[0], d[1]), self._close(d[1], d[2]), self._close(d[0], d[2])]
        if all(eq):
            return "spherical"
        if any(eq):
            return "axisymmetric"
        return "asymmetric"

    @property
    def is_axisymmetric_e1(self) -> bool:
        return self.symmetry == "axisymmetric" and self._close(self.i2, self.i3)

    @property
    def oblate(self) -> bool:
        return self.i1 > self.i2


def as_diag(I) -> np.ndarray:
    if isinstance(I, InertiaTensor):
        return I.diag
    d = np.asarray(I, dtype=float)
    if d.shape == (3, 3):
        d = np.diag(d)
    return d


def normalize_units(mass: float, inertia, G_m1: float):
    """Rescale physical data to the unit system with m = 1 and tr(I) = 1.

    Returns ``(InertiaTensor, length_scale, time_scale)``.
    """
    if mass <= 0 or G_m1 <= 0:
        raise ValueError("mass and G*m1 must be positive")
    J = np.asarray(inertia, dtype=float)
    if J.shape == (3,):
        J = np.diag(J)
    if J.shape != (3, 3) or not np.allclose(J, J.T):
        raise InvalidInertia("inertia must be a symmetric 3x3 matrix")
    if np.any(np.abs(J - np.diag(np.diag(J))) > 1e-12 * np.abs(J).max()):
        raise InvalidInertia("inertia must be given in a principal-axis frame")
    d = np.diag(J)
    if np.any(d <= 0):
        raise InvalidInertia("inertia must be positive definite")
    tr = d.sum()
    length = np.sqrt(tr / mass)
    time = np.sqrt(length**3 / G_m1)
    return InertiaTensor(*map(float, d / tr)), float(length), float(time)


@dataclass(frozen=True)
class Configuration:
    attitude: np.ndarray = field(default_factory=lambda: np.eye(3))
    position: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        B = np.asarray(self.attitude, dtype=float)
        R = np.asarray(self.position, dtype=float)
        if B.shape != (3, 3) or R.shape != (3,):
            raise ValueError("attitude must be 3x3 and position a 3-vector")
        if np.abs(B.T @ B - np.eye(3)).max() > ORTHO_TOL or abs(np.linalg.det(B) - 1) > ORTHO_TOL:
            raise ValueError("attitude is not a rotation matrix")
        object.__setattr__(self, "attitude", B)
        object.__setattr__(self, "position", R)

    @classmethod
    def at(cls, R) -> "Configuration":
        return cls(np.eye(3), np.asarray(R, dtype=float))

    @property
    def spatial_position(self) -> np.ndarray:
        return self.attitude @ self.position

    def distance(self, other: "Configuration") -> float:
        return float(
            np.abs(self.attitude - other.attitude).max()
            + np.abs(self.position - other.position).max()
        )


@dataclass(frozen=True)
class Generator:
    """Lie-algebra velocity: ``xi`` (asym) or ``(xi, eta)`` (axi)."""

    xi: np.ndarray
    eta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "xi", np.asarray(self.xi, dtype=float).reshape(3))

    @property
    def mode(self) -> str:
        return ASYM if self.eta is None else AXI

    @property
    def vector(self) -> np.ndarray:
        if self.eta is None:
            return self.xi.copy()
        return np.append(self.xi, self.eta)

    @classmethod
    def from_vector(cls, v) -> "Generator":
        v = np.asarray(v, dtype=float)
        if v.shape == (3,):
            return cls(v)
        if v.shape == (4,):
            return cls(v[:3], float(v[3]))
        raise ValueError("generator vector must have length 3 or 4")


def gen_vector(gen) -> np.ndarray:
    if isinstance(gen, Generator):
        return gen.vector
    v = np.asarray(gen, dtype=float)
    if v.shape not in ((3,), (4,)):
        raise ValueError("generator vector must have length 3 or 4")
    return v


def mode_of(vec) -> str:
    return ASYM if len(vec) == 3 else AXI


def discrete_character(N: np.ndarray) -> int:
    """chi(N): determinant of the lower-right 2x2 block of an axisymmetric element."""
    return int(round(np.linalg.det(N[1:, 1:])))


def _is_asym_discrete(A: np.ndarray) -> bool:
    return np.allclose(A, np.diag(np.diag(A))) and np.allclose(np.abs(np.diag(A)), 1.0)


def _is_axi_discrete(N: np.ndarray) -> bool:
    if abs(abs(N[0, 0]) - 1) > ORTHO_TOL or np.abs(N[0, 1:]).max() > ORTHO_TOL or np.abs(N[1:, 0]).max() > ORTHO_TOL:
        return False
    O = N[1:, 1:]
    return np.abs(O.T @ O - np.eye(2)).max() <= ORTHO_TOL


@dataclass(frozen=True)
class GroupElement:
    """Element ``(M, A)`` of SO(3) x Gamma, Gamma stored as an explicit matrix.

    In ``axi`` mode ``A`` is a block matrix ``diag(s, O)`` with O in O(2); the
    circle factor acting on the body is the SO(2) part of ``O``.
    """

    M: np.ndarray = field(default_factory=lambda: np.eye(3))
    A: np.ndarray = field(default_factory=lambda: np.eye(3))
    mode: str = ASYM

    def __post_init__(self):
        M = np.asarray(self.M, dtype=float)
        A = np.asarray(self.A, dtype=float)
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if np.abs(M.T @ M - np.eye(3)).max() > ORTHO_TOL or abs(np.linalg.det(M) - 1) > ORTHO_TOL:
            raise ValueError("M must lie in SO(3)")
        ok = _is_asym_discrete(A) if self.mode == ASYM else _is_axi_discrete(A)
        if not ok:
            raise ValueError(f"A is not an element of the {self.mode} discrete group")
        object.__setattr__(self, "M", M)
        object.__setattr__(self, "A", A)

    @property
    def det(self) -> float:
        return float(round(np.linalg.det(self.A)))

    @property
    def chi(self) -> int:
        return discrete_character(self.A) if self.mode == AXI else 1

    def __matmul__(self, other: "GroupElement") -> "GroupElement":
        if other.mode != self.mode:
            raise ModeMismatch("cannot compose elements of different groups")
        return GroupElement(self.M @ other.M, self.A @ other.A, self.mode)

    def inverse(self) -> "GroupElement":
        return GroupElement(self.M.T, self.A.T, self.mode)

    @classmethod
    def identity(cls, mode: str = ASYM) -> "GroupElement":
        return cls(np.eye(3), np.eye(3), mode)

    @classmethod
    def fixing_body(cls, A, mode: str = ASYM) -> "GroupElement":
        """The element ``(A det(A), A)``: leaves ``B = Id`` unchanged."""
        A = np.asarray(A, dtype=float)
        return cls(A * round(np.linalg.det(A)), A, mode)

    @classmethod
    def spin(cls, theta: float) -> "GroupElement":
        """Circle action about the symmetry axis (axi mode only)."""
        return cls(np.eye(3), axis_rotation(theta, 0), AXI)


# generators of the asymmetric discrete group
S_INV = -np.eye(3)
RHO = [np.diag([1.0, -1.0, -1.0]), np.diag([-1.0, 1.0, -1.0]), np.diag([-1.0, -1.0, 1.0])]


def asym_discrete_elements() -> list[np.ndarray]:
    """All eight diagonal sign matrices generated by s, rho1, rho2, rho3."""
    out = []
    for a in (1.0, -1.0):
        for b in (1.0, -1.0):
            for c in (1.0, -1.0):
                out.append(np.diag([a, b, c]))
    return out


def act(g: GroupElement, q: Configuration, mode: str | None = None) -> Configuration:
    """``(M, A) . (B, R) = (M B A^T det A, A R)``."""
    if mode is not None and g.mode != mode:
        raise ModeMismatch(f"group element is {g.mode!r}, system is {mode!r}")
    B = g.M @ q.attitude @ g.A.T * g.det
    return Configuration(B, g.A @ q.position)


def act_tangent(g: GroupElement, v, mode: str | None = None) -> np.ndarray:
    """Tangent lift on body velocities ``(dtheta, dR) -> (A det A dtheta, A dR)``."""
    if mode is not None and g.mode != mode:
        raise ModeMismatch(f"group element is {g.mode!r}, system is {mode!r}")
    v = np.asarray(v, dtype=float)
    return np.concatenate([g.det * g.A @ v[:3], g.A @ v[3:]])


def coadjoint(g: GroupElement, mu) -> np.ndarray:
    """``Ad*_{g^-1}(mu, nu) = (M mu, chi(N) nu)``."""
    mu = np.asarray(mu, dtype=float)
    if len(mu) == 4:
        if g.mode != AXI:
            raise ModeMismatch("a 4-component momentum needs an axisymmetric element")
        return np.append(g.M @ mu[:3], g.chi * mu[3])
    return g.M @ mu


def adjoint(g: GroupElement, gen) -> np.ndarray:
    """Action on generators matching ``coadjoint`` (for ``g . (q, xi)``)."""
    v = gen_vector(gen)
    if len(v) == 4:
        return np.append(g.M @ v[:3], g.chi * v[3])
    return g.M @ v


def load_inertia_config(source) -> tuple[InertiaTensor, str]:
    """Read ``{"inertia": [i1, i2, i3], "mode": "asym"|"axi"}``.

    ``source`` may be a path, a JSON string or an already parsed mapping.
    Errors carry a JSON pointer to the offending member.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        if not text.lstrip().startswith("{"):
            with open(text) as fh:
                text = fh.read()
        doc = json.loads(text)
    if "inertia" not in doc:
        raise InvalidInertia("/inertia: required member missing")
    vals = doc["inertia"]
    if not isinstance(vals, list) or len(vals) != 3:
        raise InvalidInertia("/inertia: expected an array of three numbers")
    for k, x in enumerate(vals):
        if not isinstance(x, (int, float)) or isinstance(x, bool):
            raise InvalidInertia(f"/inertia/{k}: expected a number")
    mode = doc.get("mode", ASYM)
    if mode not in MODES:
        raise InvalidInertia(f"/mode: expected one of {MODES}, got {mode!r}")
    try:
        inertia = InertiaTensor(*map(float, vals))
    except InvalidInertia as exc:
        raise InvalidInertia(f"/inertia: {exc}") from None
    if mode == AXI and not inertia.is_axisymmetric_e1:
        raise InvalidInertia("/inertia: axi mode requires i2 == i3")
    if mode == ASYM and inertia.symmetry != "asymmetric":
        raise InvalidInertia("/inertia: asym mode requires pairwise distinct moments")
    return inertia, mode


@dataclass(frozen=True)
class MassCloud:
    """Point masses in the body frame."""

    points: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        P = np.atleast_2d(np.asarray(self.points, dtype=float))
        m = np.asarray(self.masses, dtype=float).reshape(-1)
        if P.shape != (len(m), 3):
            raise ValueError("points must be (n, 3) with one mass per point")
        if np.any(m <= 0):
            raise ValueError("masses must be positive")
        object.__setattr__(self, "points", P)
        object.__setattr__(self, "masses", m)

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def center_of_mass(self) -> np.ndarray:
        return self.masses @ self.points / self.total_mass

    def recentered(self) -> "MassCloud":
        return MassCloud(self.points - self.center_of_mass, self.masses)

    def inertia_matrix(self) -> np.ndarray:
        P, m = self.points, self.masses
        r2 = np.einsum("ij,ij->i", P, P)
        return np.einsum("i,jk->jk", m * r2, np.eye(3)) - np.einsum("i,ij,ik->jk", m, P, P)

    def normalized(self) -> "MassCloud":
        """Recenter and rescale to unit mass and unit inertia trace."""
        c = self.recentered()
        m = c.masses / c.total_mass
        tr = np.trace(MassCloud(c.points, m).inertia_matrix())
        return MassCloud(c.points / np.sqrt(tr), m)

    def inertia(self) -> InertiaTensor:
        """Induced normalized inertia; the cloud must be in a principal frame."""
        c = self.normalized()
        J = c.inertia_matrix()
        if np.abs(J - np.diag(np.diag(J))).max() > 1e-9:
            raise InvalidInertia("cloud inertia is not diagonal in the body frame")
        return InertiaTensor.from_moments(np.diag(J))

    @classmethod
    def from_csv(cls, path) -> "MassCloud":
        """Rows ``x,y,z,mass``; recentered to the center of mass on load."""
        data = np.loadtxt(path, delimiter=",", ndmin=2, comments="#")
        if data.shape[1] != 4:
            raise ValueError("mass cloud CSV needs four columns x,y,z,mass")
        return cls(data[:, :3], data[:, 3]).recentered()

    @classmethod
    def six_point(cls, a: Sequence[float], mass: float = 1.0) -> "MassCloud":
        """Pairs of equal masses at +-a_k e_k; octupole vanishes by symmetry."""
        pts = []
        for k in range(3):
            e = np.zeros(3)
            e[k] = a[k]
            pts += [e, -e]
        return cls(np.array(pts), np.full(6, mass / 6))


# --- isotropy subgroups of canonical representatives ---

_T_SAMPLES = (0.0, 0.4, 1.3, np.pi, 4.1)
_PHI_SAMPLES = tuple(k * np.pi / 4 for k in range(8))
_GENERIC_PHI = 0.37


class IsotropyFailure(AssertionError):
    """A listed isotropy element does not fix the object it is claimed to fix."""


def _rot2(phi: float) -> np.ndarray:
    c, s = np.cos(phi), np.sin(phi)
    return np.array([[c, -s], [s, c]])


def axi_discrete(s: float, O: np.ndarray) -> np.ndarray:
    N = np.zeros((3, 3))
    N[0, 0] = s
    N[1:, 1:] = O
    return N


def axi_discrete_samples(rotations_only: bool = False) -> list[np.ndarray]:
    """Finite sample of the axisymmetric discrete group: both signs, O(2) on an eighth-turn grid."""
    flip = np.diag([1.0, -1.0])
    out = []
    for s in (1.0, -1.0):
        for phi in _PHI_SAMPLES:
            out.append(axi_discrete(s, _rot2(phi)))
            if not rotations_only:
                out.append(axi_discrete(s, _rot2(phi) @ flip))
    return out


def _fb(diag, mode: str) -> GroupElement:
    return GroupElement.fixing_body(np.diag(np.asarray(diag, dtype=float)), mode)


def _signs2():
    return [(a, b) for a in (1.0, -1.0) for b in (1.0, -1.0)]


def _unit_or(v: np.ndarray, k: int) -> np.ndarray:
    n = float(np.linalg.norm(v))
    if n == 0.0:
        e = np.zeros(3)
        e[k] = 1.0
        return e
    return v / n


def _mu_group(axis: np.ndarray, mode: str, chi_one: bool) -> list[GroupElement]:
    if mode == ASYM:
        As = asym_discrete_elements()
    else:
        As = axi_discrete_samples(rotations_only=chi_one)
    return [GroupElement(expm_so3(t * axis), A, mode) for t in _T_SAMPLES for A in As]


@dataclass(frozen=True)
class IsotropyRow:
    mode: str
    q_order: int | None  # None means continuous
    z_order: int
    q_elems: object
    mu_elems: object
    z_elems: object


def _rows() -> dict[str, IsotropyRow]:
    e1, e2, e3 = np.eye(3)
    q_orth = lambda mode: lambda mu: [_fb((a, 1, b), mode) for a, b in _signs2()]  # noqa: E731
    q_obl = lambda mode: lambda mu: [_fb((1, 1, b), mode) for b in (1.0, -1.0)]  # noqa: E731
    ident = lambda mode: lambda mu: [GroupElement.identity(mode)]  # noqa: E731
    return {
        "Orth12": IsotropyRow(ASYM, 4, 2, q_orth(ASYM),
                              lambda mu: _mu_group(e1, ASYM, False),
                              lambda mu: [_fb((a, 1, 1), ASYM) for a in (1.0, -1.0)]),
        "Par2": IsotropyRow(ASYM, 4, 2, q_orth(ASYM),
                            lambda mu: _mu_group(e2, ASYM, False),
                            lambda mu: [GroupElement(np.diag([a, 1, a]), np.diag([a, 1, a])) for a in (1.0, -1.0)]),
        "Par2_0": IsotropyRow(ASYM, 4, 4, q_orth(ASYM),
                              lambda mu: [GroupElement(expm_so3(w), A) for w in (e1, 0.7 * e2 - 1.1 * e3, 2.0 * e3)
                                          for A in asym_discrete_elements()],
                              q_orth(ASYM)),
        "Obl12": IsotropyRow(ASYM, 2, 1, q_obl(ASYM),
                             lambda mu: _mu_group(_unit_or(mu[:3], 0), ASYM, False), ident(ASYM)),
        "cylindrical": IsotropyRow(AXI, 4, 2, q_orth(AXI),
                                   lambda mu: _mu_group(e1, AXI, True),
                                   lambda mu: [_fb((a, 1, 1), AXI) for a in (1.0, -1.0)]),
        "cylindrical_0": IsotropyRow(AXI, 4, 2, q_orth(AXI),
                                     lambda mu: _mu_group(e1, AXI, False),
                                     lambda mu: [_fb((a, 1, 1), AXI) for a in (1.0, -1.0)]),
        "hyperbolic": IsotropyRow(AXI, 4, 1, q_orth(AXI),
                                  lambda mu: _mu_group(_unit_or(mu[:3], 2), AXI, True), ident(AXI)),
        "hyperbolic_0": IsotropyRow(AXI, 4, 2, q_orth(AXI),
                                    lambda mu: _mu_group(e3, AXI, False),
                                    lambda mu: [_fb((1, 1, b), AXI) for b in (1.0, -1.0)]),
        "conical": IsotropyRow(AXI, 2, 1, q_obl(AXI),
                               lambda mu: _mu_group(_unit_or(mu[:3], 0), AXI, True), ident(AXI)),
        "isolated": IsotropyRow(AXI, None, 2,
                                lambda mu: [GroupElement.fixing_body(A, AXI) for A in axi_discrete_samples()
                                            if A[0, 0] > 0],
                                lambda mu: _mu_group(e2, AXI, False),
                                lambda mu: [_fb((1, b, 1), AXI) for b in (1.0, -1.0)]),
    }


ISOTROPY_LABELS = tuple(_rows())


@dataclass(frozen=True)
class IsotropyReport:
    label: str
    checked: dict
    q_order: int | str
    z_order: int
    failures: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {"label": self.label, "checked": self.checked, "q_order": self.q_order,
                "z_order": self.z_order, "ok": self.ok, "failures": [str(f) for f in self.failures]}


def _fixes_q(g: GroupElement, q: Configuration, tol: float) -> bool:
    p = act(g, q)
    return np.abs(p.attitude - q.attitude).max() <= tol and np.abs(p.position - q.position).max() <= tol


def _fixes_vec(g: GroupElement, v: np.ndarray, fn, tol: float) -> bool:
    return np.abs(fn(g, v) - v).max() <= tol * max(1.0, float(np.abs(v).max()))


def _candidates(mode: str) -> list[GroupElement]:
    As = asym_discrete_elements() if mode == ASYM else axi_discrete_samples()
    return [GroupElement.fixing_body(A, mode) for A in As]


def isotropy_verify(label: str, q: Configuration, gen, mu, tol: float = 1e-10, strict: bool = True) -> IsotropyReport:
    """Check the tabulated isotropy elements of a canonical representative ``z = (q, gen)`` with momentum ``mu``.

    Every listed element of ``G_q``, ``G_mu`` and ``G_z`` must fix ``q``, ``mu`` and
    ``(q, gen)`` respectively. Orders of ``G_q`` and ``G_z`` are recounted by brute force
    over the elements that leave ``B`` unchanged (a sample of O(2) in the axisymmetric case).
    """
    if label not in ISOTROPY_LABELS:
        raise KeyError(f"no isotropy table entry {label!r}; known: {ISOTROPY_LABELS}")
    row = _rows()[label]
    g = gen_vector(gen)
    mu = np.asarray(mu, dtype=float)
    if mode_of(g) != row.mode:
        raise ModeMismatch(f"{label} is an {row.mode} family")
    failures = []
    checked = {"q": 0, "mu": 0, "z": 0}
    for el in row.q_elems(mu):
        checked["q"] += 1
        if not _fixes_q(el, q, tol):
            failures.append(("G_q", el.M.tolist(), el.A.tolist()))
    for el in row.mu_elems(mu):
        checked["mu"] += 1
        if not _fixes_vec(el, mu, coadjoint, tol):
            failures.append(("G_mu", el.M.tolist(), el.A.tolist()))
    for el in row.z_elems(mu):
        checked["z"] += 1
        if not (_fixes_q(el, q, tol) and _fixes_vec(el, g, adjoint, tol)):
            failures.append(("G_z", el.M.tolist(), el.A.tolist()))
    fq = [el for el in _candidates(row.mode) if _fixes_q(el, q, tol)]
    fz = [el for el in fq if _fixes_vec(el, g, adjoint, tol)]
    if row.mode == AXI and _fixes_q(GroupElement.fixing_body(axi_discrete(1.0, _rot2(_GENERIC_PHI)), AXI), q, tol):
        q_order: int | str = "continuous"
    else:
        q_order = len(fq)
    expected_q = "continuous" if row.q_order is None else row.q_order
    if q_order != expected_q:
        failures.append(("order G_q", q_order, expected_q))
    if len(fz) != row.z_order:
        failures.append(("order G_z", len(fz), row.z_order))
    report = IsotropyReport(label, checked, q_order, len(fz), tuple(failures))
    if strict and failures:
        raise IsotropyFailure(f"{label}: {failures[0]}")
    return report
