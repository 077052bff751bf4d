"""Bifurcation-diagram containers."""
from __future__ import annotations

from dataclasses import dataclass, field

STABLE = "stable"
UNSTABLE = "unstable"
INCONCLUSIVE = "inconclusive"

_LABELS = {"GmuStable": STABLE, "Unstable": UNSTABLE, "Inconclusive": INCONCLUSIVE}


def label(classification: str) -> str:
    return _LABELS.get(classification, classification)


@dataclass
class Branch:
    name: str
    param_name: str
    params: list[float] = field(default_factory=list)
    radii: list[float] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    stability: list[str] = field(default_factory=list)
    isotropy: str = ""

    def add(self, param: float, R: float, value: float, stab: str) -> None:
        self.params.append(float(param))
        self.radii.append(float(R))
        self.values.append(float(value))
        self.stability.append(label(stab))

    def segments(self) -> list[tuple[float, float, str]]:
        """Maximal runs of equal stability labels as ``(start, end, label)``."""
        out: list[tuple[float, float, str]] = []
        for p, s in zip(self.params, self.stability):
            if out and out[-1][2] == s:
                out[-1] = (out[-1][0], p, s)
            else:
                out.append((p, p, s))
        return out

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "param_name": self.param_name,
            "params": self.params,
            "R": self.radii,
            "values": self.values,
            "stability": self.stability,
            "isotropy": self.isotropy,
        }


@dataclass
class Junction:
    name: str
    param_name: str
    location: float
    branches: tuple[str, ...]
    R: float
    note: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "param_name": self.param_name,
            "location": self.location,
            "branches": list(self.branches),
            "R": self.R,
            "note": self.note,
        }


@dataclass
class BifurcationDiagram:
    kind: str
    inertia: tuple[float, float, float]
    branches: dict[str, Branch] = field(default_factory=dict)
    junctions: list[Junction] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add_branch(self, b: Branch) -> Branch:
        self.branches[b.name] = b
        return b

    def junction(self, name: str) -> Junction:
        for j in self.junctions:
            if j.name == name:
                return j
        raise KeyError(name)

    def validate(self) -> None:
        for j in self.junctions:
            for b in j.branches:
                if b not in self.branches:
                    raise ValueError(f"junction {j.name} references unknown branch {b}")
        for b in self.branches.values():
            bad = set(b.stability) - {STABLE, UNSTABLE, INCONCLUSIVE}
            if bad:
                raise ValueError(f"branch {b.name} has invalid labels {bad}")

    def to_dict(self) -> dict:
        self.validate()
        return {
            "kind": self.kind,
            "inertia": list(self.inertia),
            "branches": [b.to_dict() for b in self.branches.values()],
            "junctions": [j.to_dict() for j in self.junctions],
            "meta": self.meta,
        }

    def rows(self):
        """Plot-ready rows ``(branch, param, R, value, stability)``."""
        for b in self.branches.values():
            for p, r, v, s in zip(b.params, b.radii, b.values, b.stability):
                yield (b.name, p, r, v, s)
