"""Command-line surface: family enumeration, stability tables, bifurcation documents and simulations.

Every command accepts ``--config FILE`` holding a JSON object whose keys mirror
the long flag names (``"inertia": [0.45, 0.25, 0.3]``, ``"R": "2:5:4"``, ...);
flags given on the command line override the file. JSON output carries
``"schema": "gravisat/1"`` and floats with 17 significant digits.

Exit codes: 0 success, 2 invalid input, 3 missing reference, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import asym, axi
from .diagram import label
from .dynamics import (
    IntegrationError,
    State,
    integrate,
    linearized_spectrum,
    perturbation_probe,
    trajectory_csv,
    verify_relative_equilibrium,
)
from .equilibrium import Equilibrium, NoEquilibrium, ResidualTooLarge, SmallOrbitWarning
from .model import ASYM, AXI, InertiaTensor, InvalidInertia
from .rem import (
    INCONCLUSIVE,
    SingularHypothesis,
    SingularPathRequired,
    StabilityVerdict,
    classify,
    regular_stability,
    singular_stability,
)

SCHEMA = "gravisat/1"
EXIT_OK, EXIT_INPUT, EXIT_MISSING, EXIT_NUMERIC = 0, 2, 3, 4

DEFAULT_INERTIA = {ASYM: (0.45, 0.25, 0.30), AXI: (0.4, 0.3, 0.3)}
DEFAULT_GRIDS = {
    "R": "2",
    "alpha": "0:2:5",
    "theta": "0:1.2:4",
    "psi": "0.3:1.2:4",
    "xi": "0",
}
FAMILIES = {
    ASYM: ("orthogonal", "parallel", "conical"),
    AXI: ("cylindrical", "hyperbolic", "isolated", "conical", "parallel"),
}


class MissingReference(LookupError):
    pass


# --- serialization ---


def fmt_float(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    s = format(x, ".17g")
    return s if any(ch in s for ch in ".en") else s + ".0"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    return obj


def _emit(obj, out: list[str], indent: int, level: int) -> None:
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        for k, (key, v) in enumerate(obj.items()):
            out.append(inner + json.dumps(key) + ": ")
            _emit(v, out, indent, level + 1)
            out.append(",\n" if k < len(obj) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, list):
        if not obj:
            out.append("[]")
        elif all(not isinstance(v, (dict, list)) for v in obj):
            out.append("[" + ", ".join(_scalar(v) for v in obj) + "]")
        else:
            out.append("[\n")
            for k, v in enumerate(obj):
                out.append(inner)
                _emit(v, out, indent, level + 1)
                out.append(",\n" if k < len(obj) - 1 else "\n")
            out.append(pad + "]")
    else:
        out.append(_scalar(obj))


def _scalar(v) -> str:
    if isinstance(v, float):
        return fmt_float(v)
    return json.dumps(v)


def dumps(obj, indent: int = 1) -> str:
    """Deterministic JSON with floats written to 17 significant digits."""
    out: list[str] = []
    _emit(_plain(obj), out, indent, 0)
    return "".join(out) + "\n"


def document(command: str, config: dict, **body) -> dict:
    return {"schema": SCHEMA, "command": command, "config": config, **body}


# --- configuration ---


def parse_grid(text) -> list[float]:
    """``a:b:n`` (inclusive linspace), a comma list, a single number or a JSON list."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return [float(text)]
    if isinstance(text, (list, tuple)):
        vals = [float(v) for v in text]
    else:
        s = str(text).strip()
        if ":" in s:
            parts = s.split(":")
            if len(parts) != 3:
                raise ValueError(f"grid {s!r}: expected a:b:n")
            a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
            if n < 1:
                raise ValueError(f"grid {s!r}: n must be at least 1")
            vals = [a] if n == 1 else [float(v) for v in np.linspace(a, b, n)]
        else:
            vals = [float(v) for v in s.split(",") if v.strip()]
    if not vals:
        raise ValueError(f"grid {text!r} is empty")
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"grid {text!r} has non-finite values")
    return vals


def parse_inertia(text) -> tuple[float, float, float]:
    vals = text if isinstance(text, (list, tuple)) else str(text).split(",")
    vals = [float(v) for v in vals]
    if len(vals) != 3:
        raise InvalidInertia("inertia needs three moments i1,i2,i3")
    return tuple(vals)


@dataclass(frozen=True)
class Config:
    inertia: InertiaTensor
    mode: str
    family: str
    grids: dict
    seed: int
    jobs: int
    raw: dict

    @property
    def I1(self) -> float:
        return self.inertia.i1

    @property
    def I2(self) -> float:
        return self.inertia.i2


_KEYS = ("inertia", "mode", "family", "R", "alpha", "theta", "psi", "xi", "out", "seed", "jobs", "format",
         "csv", "n", "R_max", "periods", "perturb", "samples", "record", "id", "traj", "linearize", "dt")


def merged(args: argparse.Namespace) -> dict:
    """Config file values overridden by explicitly given flags."""
    cfg: dict = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except FileNotFoundError:
            raise MissingReference(f"config file not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise ValueError(f"config file {args.config}: {exc}") from None
        if not isinstance(cfg, dict):
            raise ValueError("config file must hold a JSON object")
        unknown = set(cfg) - set(_KEYS)
        if unknown:
            raise ValueError(f"config file has unknown keys {sorted(unknown)}")
    for k in _KEYS:
        v = getattr(args, k, None)
        if v is not None and v is not False:
            cfg[k] = v
    return cfg


def _infer_mode(cfg: dict) -> str:
    if cfg.get("mode"):
        if cfg["mode"] not in (ASYM, AXI):
            raise ValueError(f"mode must be asym or axi, got {cfg['mode']!r}")
        return cfg["mode"]
    if "inertia" in cfg:
        i = parse_inertia(cfg["inertia"])
        return AXI if abs(i[1] - i[2]) <= 1e-12 else ASYM
    fam = cfg.get("family", "all")
    if fam in FAMILIES[AXI] and fam not in FAMILIES[ASYM]:
        return AXI
    return ASYM


def build_config(cfg: dict) -> Config:
    mode = _infer_mode(cfg)
    moments = parse_inertia(cfg["inertia"]) if "inertia" in cfg else DEFAULT_INERTIA[mode]
    inertia = InertiaTensor(*moments)
    if mode == AXI and not inertia.is_axisymmetric_e1:
        raise InvalidInertia("axi mode requires i2 == i3")
    if mode == ASYM and inertia.symmetry != "asymmetric":
        raise InvalidInertia("asym mode requires pairwise distinct moments")
    family = cfg.get("family", "all")
    if family != "all" and family not in FAMILIES[mode]:
        raise ValueError(f"family {family!r} not available in {mode} mode; choose from {FAMILIES[mode]}")
    grids = {k: parse_grid(cfg.get(k, d)) for k, d in DEFAULT_GRIDS.items()}
    if any(r <= 0 for r in grids["R"]):
        raise ValueError("R grid must be positive")
    jobs = int(cfg.get("jobs", 1))
    if jobs < 1:
        raise ValueError("jobs must be at least 1")
    return Config(inertia, mode, family, grids, int(cfg.get("seed", 0)), jobs, dict(cfg))


# --- family enumeration ---


def _tasks(c: Config) -> list[tuple]:
    """Solver calls ``(family, kwargs)`` in output order."""
    want = FAMILIES[c.mode] if c.family == "all" else (c.family,)
    g = c.grids
    out = []
    for fam in want:
        if c.mode == ASYM:
            if fam == "orthogonal":
                pairs = [(r, x) for r in (1, 2, 3) for x in (1, 2, 3) if r != x]
                out += [(fam, {"R": R, "axis_R": r, "axis_xi": x}) for R in g["R"] for r, x in pairs]
            elif fam == "parallel":
                out += [(fam, {"axis": a, "xi_mag": x}) for a in (1, 2, 3) for x in g["xi"]]
            else:
                out += [(fam, {"R": R, "plane": p}) for R in g["R"] for p in ((1, 2), (1, 3), (2, 3))]
        else:
            if fam == "cylindrical":
                out += [(fam, {"R": R, "alpha": a}) for R in g["R"] for a in g["alpha"]]
            elif fam == "hyperbolic":
                out += [(fam, {"R": R, "theta": t}) for R in g["R"] for t in g["theta"]]
            elif fam == "isolated":
                out += [(fam, {"R": R}) for R in g["R"]]
            elif fam == "conical":
                out += [(fam, {"R": R, "psi": p}) for R in g["R"] for p in g["psi"]]
            else:
                out += [(fam, {"axis": a, "xi_mag": x}) for a in (1, 2) for x in g["xi"]]
    return out


def _solve(mode: str, moments: tuple, fam: str, kw: dict) -> list[Equilibrium]:
    I = InertiaTensor(*moments)
    if mode == ASYM:
        if fam == "orthogonal":
            return [asym.solve_orthogonal(I, kw["R"], kw["axis_R"], kw["axis_xi"])]
        if fam == "parallel":
            return [asym.solve_parallel(I, kw["axis"], kw["xi_mag"])]
        sols = asym.solve_conical(I, kw["R"], kw["plane"])
        if not sols:
            reasons = "; ".join(r for _, r in sols.discarded) or "no admissible root"
            raise NoEquilibrium(f"no conical equilibrium in plane {kw['plane']}: {reasons}")
        return list(sols)
    I1, I2 = I.i1, I.i2
    if fam == "cylindrical":
        return [axi.solve_cylindrical(I1, I2, kw["R"], kw["alpha"])]
    if fam == "hyperbolic":
        return [axi.solve_hyperbolic(I1, I2, kw["R"], kw["theta"])]
    if fam == "isolated":
        return [axi.solve_isolated(I1, I2, kw["R"])]
    if fam == "conical":
        return [axi.solve_conical_axi(I1, I2, kw["R"], kw["psi"])]
    return [axi.solve_parallel_axi(I1, I2, kw["axis"], kw["xi_mag"])]


def _solve_task(args) -> tuple[str, object]:
    mode, moments, fam, kw = args
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SmallOrbitWarning)
        try:
            eqs = _solve(mode, moments, fam, kw)
        except (NoEquilibrium, ValueError) as exc:
            return "absent", {"family": fam, "params": kw, "reason": str(exc)}
    notes = sorted({str(w.message) for w in caught if issubclass(w.category, SmallOrbitWarning)})
    return "found", [(fam, kw, eq.to_dict(), notes) for eq in eqs]


def _pmap(fn, items: list, jobs: int) -> list:
    if jobs <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items, chunksize=max(1, len(items) // (4 * jobs))))


def enumerate_records(c: Config) -> tuple[list[dict], list[dict]]:
    moments = (c.inertia.i1, c.inertia.i2, c.inertia.i3)
    results = _pmap(_solve_task, [(c.mode, moments, f, kw) for f, kw in _tasks(c)], c.jobs)
    records, absent, counts = [], [], {}
    for kind, payload in results:
        if kind == "absent":
            absent.append(payload)
            continue
        for fam, kw, eq, notes in payload:
            k = counts.get(fam, 0)
            counts[fam] = k + 1
            records.append({"id": f"{fam}-{k:04d}", "selector": fam, "query": kw, "warnings": notes, **eq})
    return records, absent


# --- stability ---


def _engine(eq: Equilibrium) -> StabilityVerdict:
    try:
        return regular_stability(eq.inertia, eq.q, eq.gen)[0]
    except SingularPathRequired:
        try:
            return singular_stability(eq.inertia, eq.q, eq.gen)
        except SingularHypothesis as exc:
            return StabilityVerdict((), (), 0, INCONCLUSIVE, f"singular: {exc}", True)


def stability_row(rec: dict, linearize: bool = False) -> dict:
    eq = Equilibrium.from_dict(rec)
    I1, I2 = eq.inertia.i1, eq.inertia.i2
    fam, q = rec["selector"], rec["query"]
    closed = None
    if eq.mode == AXI and fam == "cylindrical":
        res = axi.cyl_classify(I1, I2, q["R"], q["alpha"])
    elif eq.mode == AXI and fam == "hyperbolic":
        res = axi.hyp_classify(I1, I2, q["R"], q["theta"])
    elif eq.mode == AXI and fam == "isolated":
        res = axi.isolated_classify(I1, I2, q["R"])
    elif eq.mode == AXI and fam == "conical":
        res = axi.conical_classify(I1, I2, q["R"], q["psi"], report=False)
    else:
        res = None
        if eq.mode == ASYM and fam == "orthogonal":
            e = asym.orth_eigs_closed(eq.inertia, q["R"], q["axis_xi"], q["axis_R"])
            closed = classify(e.arnold, e.smale, 3)
    if res is not None:
        verdict, engine = res.verdict, res.engine
    else:
        engine = _engine(eq)
        verdict = closed if closed is not None else engine
    row = {
        "id": rec["id"],
        "family": rec["family"],
        "params": q,
        "arnold": list(verdict.arnold_eigs),
        "smale": list(verdict.smale_eigs),
        "verdict": verdict.classification,
        "label": label(verdict.classification),
        "method": verdict.method if closed is None else "closed-form",
        "engine_verdict": engine.classification,
        "engine_method": engine.method,
        "agrees": verdict.classification == engine.classification,
        "degenerate": bool(verdict.degenerate or engine.degenerate),
    }
    if linearize:
        sp = linearized_spectrum(eq)
        row["max_real"] = sp.max_real
        row["linearly_unstable"] = sp.unstable()
    return row


def _stability_task(args) -> dict:
    rec, lin = args
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallOrbitWarning)
        return stability_row(rec, lin)


STABILITY_COLUMNS = ("id", "family", "params", "arnold", "smale", "verdict", "method", "engine_verdict",
                     "agrees", "degenerate", "max_real")


def stability_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(STABILITY_COLUMNS)
    for r in rows:
        w.writerow([
            r["id"], r["family"], dumps(r["params"], indent=0).replace("\n", ""),
            ";".join(fmt_float(x) for x in r["arnold"]), ";".join(fmt_float(x) for x in r["smale"]),
            r["verdict"], r["method"], r["engine_verdict"], r["agrees"], r["degenerate"],
            fmt_float(r["max_real"]) if "max_real" in r else "",
        ])
    return buf.getvalue()


# --- commands ---


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _public(cfg: dict, c: Config) -> dict:
    out = {k: v for k, v in cfg.items() if k not in ("out", "csv", "traj", "jobs")}
    out["inertia"] = [c.inertia.i1, c.inertia.i2, c.inertia.i3]
    out["mode"] = c.mode
    out["family"] = c.family
    return out


def cmd_families(cfg: dict) -> int:
    c = build_config(cfg)
    records, absent = enumerate_records(c)
    _write(dumps(document("families", _public(cfg, c), records=records, absent=absent)), cfg.get("out"))
    return EXIT_OK


def cmd_stability(cfg: dict) -> int:
    c = build_config(cfg)
    records = _load_records(cfg["record"]) if cfg.get("record") else enumerate_records(c)[0]
    rows = _pmap(_stability_task, [(r, bool(cfg.get("linearize"))) for r in records], c.jobs)
    if cfg.get("format", "json") == "csv":
        _write(stability_csv(rows), cfg.get("out"))
    else:
        cands = [r["id"] for r in rows if r["degenerate"]]
        _write(dumps(document("stability", _public(cfg, c), rows=rows, bifurcation_candidates=cands)),
               cfg.get("out"))
    return EXIT_OK


def diagram_rows_csv(diagram) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("branch", "param", "R", "value", "stability"))
    for b, p, r, v, s in diagram.rows():
        w.writerow((b, fmt_float(p), fmt_float(r), fmt_float(v), s))
    return buf.getvalue()


def cmd_bifurcate(cfg: dict) -> int:
    c = build_config(cfg)
    n = int(cfg.get("n", 60))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SmallOrbitWarning)
        if c.mode == ASYM:
            d = asym.asym_diagram(c.inertia, float(cfg.get("R_max", 3.0)), n)
        else:
            d = axi.axi_diagram(c.I1, c.I2, c.grids["R"][0], n)
    _write(dumps(document("bifurcate", _public(cfg, c), diagram=d.to_dict())), cfg.get("out"))
    if cfg.get("csv"):
        _write(diagram_rows_csv(d), cfg["csv"])
    return EXIT_OK


def _load_records(path) -> list[dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise MissingReference(f"record file not found: {path}") from None
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"{path}: expected schema {SCHEMA!r}, got {doc.get('schema')!r}")
    return list(doc.get("records", []))


def select_record(cfg: dict, c: Config) -> dict:
    records = _load_records(cfg["record"]) if cfg.get("record") else enumerate_records(c)[0]
    rid = cfg.get("id")
    if rid is None:
        if not records:
            raise MissingReference("no record matches the requested family and parameters")
        return records[0]
    for r in records:
        if r["id"] == rid:
            return r
    raise MissingReference(f"record id {rid!r} not found")


def cmd_simulate(cfg: dict) -> int:
    c = build_config(cfg)
    rec = select_record(cfg, c)
    eq = Equilibrium.from_dict(rec)
    eq.checked()
    periods = float(cfg.get("periods", 5.0))
    dt = float(cfg["dt"]) if cfg.get("dt") is not None else None
    rep = verify_relative_equilibrium(eq, periods=periods, dt=dt)
    body = {"record": rec["id"], "family": rec["family"], "report": rep.to_dict()}
    if cfg.get("perturb") is not None:
        amp = float(cfg["perturb"])
        if amp < 0:
            raise ValueError("perturb amplitude must be non-negative")
        pr = perturbation_probe(eq, amp, periods=min(periods, 10.0), samples=int(cfg.get("samples", 8)),
                                seed=c.seed)
        body["probe"] = pr.to_dict()
    _write(dumps(document("simulate", _public(cfg, c), **body)), cfg.get("out"))
    if cfg.get("traj"):
        T = eq.period
        h = T / 2000 if dt is None else dt
        n = max(1, int(np.ceil(periods * T / h)))
        traj = integrate(eq.inertia, State.from_equilibrium(eq), periods * T, h, order=4,
                         record_every=max(1, n // int(200 * periods + 1)))
        trajectory_csv(eq.inertia, traj, cfg["traj"], eq.mode)
    return EXIT_OK


COMMANDS = {"families": cmd_families, "stability": cmd_stability, "bifurcate": cmd_bifurcate,
            "simulate": cmd_simulate}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gravisat", description="Relative equilibria of a rigid body in orbit.")
    sub = p.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the flags")
    common.add_argument("--inertia", help="principal moments i1,i2,i3 with trace 1")
    common.add_argument("--mode", choices=(ASYM, AXI))
    common.add_argument("--family", help="family selector or 'all'")
    for g in ("R", "alpha", "theta", "psi", "xi"):
        common.add_argument(f"--{g}", help="grid a:b:n, comma list or single value")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--seed", type=int)
    common.add_argument("--jobs", type=int)
    sub.add_parser("families", parents=[common], help="enumerate relative equilibria")
    s = sub.add_parser("stability", parents=[common], help="stability table")
    s.add_argument("--format", choices=("json", "csv"))
    s.add_argument("--record", help="families JSON to classify instead of enumerating")
    s.add_argument("--linearize", action="store_true", default=None, help="add linearized spectra")
    b = sub.add_parser("bifurcate", parents=[common], help="bifurcation diagram document")
    b.add_argument("--csv", help="plot-ready CSV path")
    b.add_argument("--n", type=int, help="samples per branch")
    b.add_argument("--R-max", dest="R_max", type=float, help="largest radius (asym)")
    m = sub.add_parser("simulate", parents=[common], help="integrate a relative equilibrium")
    m.add_argument("--record", help="families JSON to read the record from")
    m.add_argument("--id", help="record id")
    m.add_argument("--periods", type=float)
    m.add_argument("--dt", type=float)
    m.add_argument("--perturb", type=float, help="probe amplitude")
    m.add_argument("--samples", type=int)
    m.add_argument("--traj", help="trajectory CSV path")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        return COMMANDS[args.command](merged(args))
    except MissingReference as exc:
        print(f"gravisat: {exc}", file=sys.stderr)
        return EXIT_MISSING
    except (ResidualTooLarge, IntegrationError, FloatingPointError, np.linalg.LinAlgError) as exc:
        print(f"gravisat: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InvalidInertia, NoEquilibrium, ValueError, KeyError, TypeError) as exc:
        print(f"gravisat: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
