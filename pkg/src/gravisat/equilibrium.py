"""Relative-equilibrium records shared by the family solvers, dynamics and the CLI."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .model import ASYM, AXI, Configuration, Generator, InertiaTensor
from .potential import equilibrium_residual, momentum_of

RESIDUAL_TOL = 1e-10
SMALL_ORBIT_R2 = 0.75


class NoEquilibrium(ValueError):
    """The requested family has no member at the given parameters."""


class ResidualTooLarge(RuntimeError):
    pass


class SmallOrbitWarning(UserWarning):
    """Orbit radius below the range where the second-order potential is physically meaningful."""


def warn_small_orbit(R: float) -> None:
    if R * R < SMALL_ORBIT_R2:
        warnings.warn(f"orbit radius {R:.6g} has R^2 < 3/4", SmallOrbitWarning, stacklevel=3)


@dataclass(frozen=True, eq=False)
class Equilibrium:
    """A relative equilibrium in canonical position ``B = Id``.

    ``family`` is a tag such as ``"Orth^1_2"``, ``"Par_2"``, ``"Obl_12"``,
    ``"cylindrical"``, ``"hyperbolic"``, ``"isolated"``, ``"conical"`` or ``"parallel"``.
    """

    family: str
    mode: str
    inertia: InertiaTensor
    q: Configuration
    gen: Generator
    params: dict = field(default_factory=dict)
    aux: dict = field(default_factory=dict)
    isotropy: str = ""

    @property
    def mu(self) -> np.ndarray:
        return momentum_of(self.inertia, self.q, self.gen)

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.q.position))

    @property
    def xi(self) -> np.ndarray:
        return self.gen.xi

    @property
    def eta(self) -> float:
        return 0.0 if self.gen.eta is None else float(self.gen.eta)

    def residual(self) -> np.ndarray:
        return equilibrium_residual(self.inertia, self.q, self.gen)

    @property
    def residual_norm(self) -> float:
        return float(np.linalg.norm(self.residual()))

    @property
    def sin_offset(self) -> float:
        """``sin(kappa) = (R . xi) / (|R| |xi|)``; zero for orthogonal equilibria."""
        nx = float(np.linalg.norm(self.xi))
        if nx == 0.0:
            return 0.0
        return float(self.q.position @ self.xi) / (self.radius * nx)

    @property
    def orbital_rate(self) -> float:
        return float(np.linalg.norm(self.xi))

    @property
    def period(self) -> float:
        w = self.orbital_rate
        return 2 * np.pi / w if w > 0 else float("inf")

    def checked(self, tol: float = RESIDUAL_TOL) -> "Equilibrium":
        r = self.residual_norm
        if not r < tol:
            raise ResidualTooLarge(f"{self.family}: residual {r:.3e} exceeds {tol:.0e}")
        return self

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "mode": self.mode,
            "inertia": [self.inertia.i1, self.inertia.i2, self.inertia.i3],
            "params": {k: _plain(v) for k, v in self.params.items()},
            "R": self.q.position.tolist(),
            "B": self.q.attitude.reshape(-1).tolist(),
            "xi": self.xi.tolist(),
            "eta": None if self.mode == ASYM else self.eta,
            "mu": self.mu.tolist(),
            "residual": self.residual_norm,
            "sin_offset": self.sin_offset,
            "isotropy": self.isotropy,
            "aux": {k: _plain(v) for k, v in self.aux.items()},
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Equilibrium":
        inertia = InertiaTensor(*doc["inertia"])
        q = Configuration(np.array(doc["B"], dtype=float).reshape(3, 3), np.array(doc["R"], dtype=float))
        eta = doc.get("eta")
        gen = Generator(np.array(doc["xi"], dtype=float), None if eta is None else float(eta))
        return cls(doc["family"], doc["mode"], inertia, q, gen, dict(doc.get("params", {})),
                   dict(doc.get("aux", {})), doc.get("isotropy", ""))


def _plain(v):
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, Equilibrium):
        return v.to_dict()
    return v


def make(family: str, inertia: InertiaTensor, R, xi, eta=None, params=None, aux=None, isotropy="") -> Equilibrium:
    mode = ASYM if eta is None else AXI
    return Equilibrium(family, mode, inertia, Configuration.at(np.asarray(R, dtype=float)),
                       Generator(np.asarray(xi, dtype=float), None if eta is None else float(eta)),
                       dict(params or {}), dict(aux or {}), isotropy)
