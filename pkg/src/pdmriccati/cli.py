"""Command-line interface: solve, verify, invert, sweep, catalog.

Exit codes: 0 pass, 1 verification failure, 2 configuration error,
3 construction error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from .catalog import CATALOG, DEFAULT_F, THEOREM7_DEFAULT_V, resolve_mass
from .core import (
    ConstructionError, PhysicalSetup, SolutionBundle, riccati_coefficients, riccati_residual,
    schrodinger_residual,
)
from .expr import DomainError, ExprSyntaxError, UnboundParameterError
from .families import (
    FAMILIES, Case1, Case2, Case3, Case4a, Case4b, FamilySpec, Theorem4, Theorem5,
    Theorem6, Theorem7, build, case1_bundle, case1_inverse, spec_fields,
)
from .numerics import Grid, InvalidSamplesError, SamplingError
from .verify import Tolerances, describe_instance, sweep, verify_instance

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_CONSTRUCTION = 0, 1, 2, 3
SCHEMA_VERSION = 1
DEFAULT_GRID = "-4:4:4001"
DEFAULT_ENERGY = 1.0
GRID_ENV = "PDM_DEFAULT_GRID"
CSV_COLUMNS = ("x", "m", "V", "u", "psi", "mask")


class ConfigError(ValueError):
    pass


# Flags that may also come from a --config JSON file, with their defaults.
DEFAULTS: dict[str, Any] = {
    "family": None, "mass": None, "potential": None, "f": None, "grid": None,
    "hbar": 1.0, "energy": DEFAULT_ENERGY, "beta": None, "a0": None, "f0": 0.0,
    "delta": None, "branch": None, "v0": 1.0, "c": 1.0, "c1": 1.0, "c5": 1.0,
    "c6": 1.0, "m2": 1.0, "psi0": 1.0, "tol_r": None, "tol_s": None, "tol_o": None,
    "out": None, "json": None, "param": [], "range": [], "workers": None,
}


@dataclass
class RunConfig:
    command: str
    family: str | None
    mass: str | None
    potential: str | None
    f: str | None
    grid: Grid
    setup: PhysicalSetup
    psi0: float
    values: Mapping[str, Any]
    params: dict[str, float] = field(default_factory=dict)
    out: str | None = None
    json_path: str | None = None
    tolerances: Mapping[str, float | None] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Parsing

def _add_shared(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", help="JSON file with flag values (flags override it)")
    p.add_argument("--family", choices=sorted(FAMILIES), default=S)
    p.add_argument("--mass", default=S, help="mass expression or @catalog name")
    p.add_argument("--potential", default=S, help="potential expression (theorem7, invert); may use E")
    p.add_argument("--f", default=S, help="generating function f(x)")
    p.add_argument("--grid", default=S, help=f"'min:max:n' (default ${GRID_ENV} or {DEFAULT_GRID})")
    p.add_argument("--hbar", type=float, default=S)
    p.add_argument("--energy", type=float, default=S)
    p.add_argument("--beta", type=float, default=S, help="case1 constant beta_c")
    p.add_argument("--a0", type=float, default=S)
    p.add_argument("--f0", type=float, default=S)
    p.add_argument("--delta", type=float, default=S)
    p.add_argument("--branch", choices=("plus", "minus"), default=S)
    p.add_argument("--v0", type=float, default=S)
    p.add_argument("--c", type=float, default=S, help="Bernoulli constant (theorem5, theorem6)")
    p.add_argument("--c1", type=float, default=S)
    p.add_argument("--c5", type=float, default=S)
    p.add_argument("--c6", type=float, default=S)
    p.add_argument("--m2", type=float, default=S)
    p.add_argument("--psi0", type=float, default=S)
    p.add_argument("--tol-r", dest="tol_r", type=float, default=S)
    p.add_argument("--tol-s", dest="tol_s", type=float, default=S)
    p.add_argument("--tol-o", dest="tol_o", type=float, default=S)
    p.add_argument("--param", action="append", default=S, metavar="NAME=VALUE",
                   help="bind an expression parameter (repeatable)")
    p.add_argument("--out", default=S, help="output path (CSV for solve/invert, JSON otherwise)")
    p.add_argument("--json", default=S, help="JSON report/sidecar path")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pdm-riccati",
        description="Exact solutions of the position-dependent-mass Schrodinger equation via its Riccati form.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("solve", "build one solution and write it as CSV"),
        ("verify", "build, verify against residuals and an ODE oracle, write a JSON report"),
        ("invert", "case 1: mass from a potential, then the solution for that mass"),
        ("sweep", "verify a Cartesian product of parameter values"),
    ):
        p = sub.add_parser(name, help=text, description=text)
        _add_shared(p)
        if name == "sweep":
            p.add_argument("--range", action="append", default=argparse.SUPPRESS, metavar="NAME=V1,V2,...",
                           help="values for one field, parameter, E, psi0 or mass (repeatable)")
            p.add_argument("--workers", type=int, default=argparse.SUPPRESS)
    cat = sub.add_parser("catalog", help="list built-in mass profiles")
    cat.add_argument("--json", action="store_true", help="machine-readable output")
    return parser


def _number(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def _pairs(items: Sequence[str], what: str) -> list[tuple[str, str]]:
    out = []
    for item in items:
        name, sep, value = item.partition("=")
        if not sep or not name.strip():
            raise ConfigError(f"{what} must look like NAME=VALUE, got {item!r}")
        out.append((name.strip(), value.strip()))
    return out


def _load_config(path: str | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    data = {k.replace("-", "_"): v for k, v in data.items()}
    unknown = sorted(set(data) - set(DEFAULTS) - {"command"})
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return data


def _merged(ns: argparse.Namespace) -> dict[str, Any]:
    values = dict(DEFAULTS)
    values.update(_load_config(getattr(ns, "config", None)))
    values.update({k: v for k, v in vars(ns).items() if k in DEFAULTS})
    return values


def _grid(values: Mapping[str, Any], env: Mapping[str, str]) -> Grid:
    text = values.get("grid") or env.get(GRID_ENV) or DEFAULT_GRID
    try:
        return Grid.parse(str(text))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def make_config(ns: argparse.Namespace, env: Mapping[str, str] | None = None) -> RunConfig:
    env = os.environ if env is None else env
    values = _merged(ns)
    if isinstance(values["param"], Mapping):
        params = {k: float(v) for k, v in values["param"].items()}
    else:
        params = {k: _number(v) for k, v in _pairs(values["param"], "--param")}
    try:
        setup = PhysicalSetup(E=float(values["energy"]), hbar=float(values["hbar"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        command=ns.command, family=values["family"], mass=values["mass"],
        potential=values["potential"], f=values["f"], grid=_grid(values, env), setup=setup,
        psi0=float(values["psi0"]), values=values, params=params, out=values["out"],
        json_path=values["json"],
        tolerances={"riccati": values["tol_r"], "schrodinger": values["tol_s"], "oracle": values["tol_o"]},
    )


def _require(values: Mapping[str, Any], key: str, family: str, flag: str) -> float:
    if values.get(key) is None:
        raise ConfigError(f"{family} needs {flag}")
    return float(values[key])


def make_spec(cfg: RunConfig) -> FamilySpec:
    """Family spec from the config; raises ConfigError for missing or invalid fields."""
    fam, v = cfg.family, cfg.values
    if fam is None:
        raise ConfigError("--family is required")
    if fam == "theorem7":
        if cfg.mass is not None:
            raise ConfigError("theorem7 builds its own mass: give --potential, not --mass")
    elif cfg.potential is not None:
        raise ConfigError(f"{fam} takes --mass, not --potential")
    elif cfg.mass is None:
        raise ConfigError(f"{fam} needs --mass")
    f = cfg.f if cfg.f is not None else DEFAULT_F.get(fam)
    try:
        if fam == "case1":
            return Case1(_require(v, "beta", fam, "--beta"), float(v["c1"]))
        if fam == "case2":
            return Case2(_require(v, "a0", fam, "--a0"), float(v["f0"]))
        if fam == "case3":
            return Case3(_require(v, "delta", fam, "--delta"), v["branch"] or "plus")
        if fam == "theorem4":
            return Theorem4(f, v["branch"] or "plus", float(v["v0"]))
        if fam == "case4a":
            return Case4a(float(v["v0"]))
        if fam == "case4b":
            return Case4b(float(v["v0"]))
        if fam == "theorem5":
            return Theorem5(f, v["branch"] or "minus", float(v["c"]))
        if fam == "theorem6":
            return Theorem6(f, float(v["c"]))
        if fam == "theorem7":
            return Theorem7(f, cfg.potential or THEOREM7_DEFAULT_V, float(v["c5"]), float(v["c6"]))
    except ExprSyntaxError as exc:
        raise ConfigError(f"bad expression: {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown family {fam!r}")


def _mass(cfg: RunConfig, spec: FamilySpec):
    if isinstance(spec, Theorem7):
        return None, dict(cfg.params)
    try:
        return resolve_mass(cfg.mass, cfg.params)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from exc
    except ExprSyntaxError as exc:
        raise ConfigError(f"bad mass expression: {exc}") from exc


def _tolerances(cfg: RunConfig, tag: str) -> Tolerances:
    base = Tolerances.for_family(tag)
    over = {k: float(val) for k, val in cfg.tolerances.items() if val is not None}
    return Tolerances(**{**base.to_dict(), **over})


# ---------------------------------------------------------------------------
# Output

def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def bundle_csv(bundle: SolutionBundle) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    u, mask = bundle.u.values, bundle.u.mask & bundle.psi.mask
    for i, x in enumerate(bundle.grid.x):
        w.writerow([_fmt(x), _fmt(bundle.m.values[i]), _fmt(bundle.V.values[i]),
                    _fmt(u[i]), _fmt(bundle.psi.values[i]), int(mask[i])])
    return buf.getvalue()


def _json_text(obj: Any) -> str:
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def _write(path: str | None, text: str, stdout) -> None:
    if path is None or path == "-":
        stdout.write(text)
    else:
        Path(path).write_text(text)


def _sidecar_path(cfg: RunConfig) -> str | None:
    if cfg.json_path is not None:
        return cfg.json_path
    if cfg.out is not None and cfg.out != "-":
        return str(Path(cfg.out).with_suffix(".json"))
    return None


def _finite(v: float) -> float | None:
    return float(v) if np.isfinite(v) else None


def _residual_summary(bundle: SolutionBundle) -> dict[str, Any]:
    rc = riccati_coefficients(bundle.m, bundle.V, bundle.setup, dlnm=bundle.dlnm)
    return {
        "riccati": _finite(riccati_residual(bundle.u, rc, bundle.exact.get("du"))),
        "schrodinger": _finite(schrodinger_residual(bundle)),
        "masked_fraction": bundle.u.masked_fraction,
    }


def sidecar(cfg: RunConfig, bundle: SolutionBundle, m_text: str | None, params: Mapping[str, float]) -> dict[str, Any]:
    g = bundle.grid
    return {
        "schema": SCHEMA_VERSION,
        "command": cfg.command,
        "family": bundle.family.tag,
        "spec": spec_fields(bundle.family),
        "mass": m_text,
        "potential": cfg.potential,
        "params": {k: params[k] for k in sorted(params)},
        "grid": {"x_min": g.x_min, "x_max": g.x_max, "n": g.n},
        "setup": {"E": bundle.setup.E, "hbar": bundle.setup.hbar},
        "constants": {k: float(v) for k, v in bundle.constants.items()},
        "anchors": {"integrals_from": g.x_min,
                    "note": "every running integral starts at x_min; the free constants absorb other choices"},
        "notes": list(bundle.notes),
        "residuals": _residual_summary(bundle),
        "columns": list(CSV_COLUMNS),
    }


# ---------------------------------------------------------------------------
# Commands

def cmd_solve(cfg: RunConfig, stdout) -> int:
    spec = make_spec(cfg)
    m_expr, params = _mass(cfg, spec)
    bundle = build(spec, m_expr, cfg.psi0, cfg.setup, cfg.grid, params)
    _write(cfg.out, bundle_csv(bundle), stdout)
    side = _sidecar_path(cfg)
    if side is not None:
        _write(side, _json_text(sidecar(cfg, bundle, cfg.mass, params)), stdout)
    return EXIT_OK


def cmd_verify(cfg: RunConfig, stdout) -> int:
    spec = make_spec(cfg)
    m_expr, params = _mass(cfg, spec)
    tol = _tolerances(cfg, spec.tag)
    described = describe_instance(spec, cfg.mass, cfg.setup, cfg.grid, params, cfg.psi0)
    report = verify_instance(spec, m_expr, cfg.setup, cfg.grid, params, cfg.psi0, tol, described)
    doc = {"schema": SCHEMA_VERSION, "command": "verify", "report": report.to_dict()}
    _write(cfg.json_path or cfg.out, _json_text(doc), stdout)
    if report.error is not None:
        return EXIT_CONSTRUCTION
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_invert(cfg: RunConfig, stdout) -> int:
    v = cfg.values
    if cfg.potential is None:
        raise ConfigError("invert needs --potential")
    if cfg.mass is not None:
        raise ConfigError("invert derives the mass: --mass is not accepted")
    beta = _require(v, "beta", "invert", "--beta")
    try:
        spec = Case1(beta, float(v["c1"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        inv = case1_inverse(cfg.potential, beta, float(v["m2"]), cfg.setup, cfg.grid, cfg.params)
    except ExprSyntaxError as exc:
        raise ConfigError(f"bad potential expression: {exc}") from exc
    bundle = case1_bundle(spec, inv.m, inv.dlnm, inv.V, cfg.psi0, cfg.setup)
    _write(cfg.out, bundle_csv(bundle), stdout)
    side = _sidecar_path(cfg)
    if side is not None:
        doc = sidecar(cfg, bundle, None, cfg.params)
        doc["constants"]["m2"] = float(v["m2"])
        _write(side, _json_text(doc), stdout)
    return EXIT_OK


def _range_value(text: str) -> Any:
    try:
        return float(text)
    except ValueError:
        return text


# Sweep range names as flags spell them -> spec field / sweep key.
RANGE_ALIASES = {
    "beta": "beta_c", "delta": "Delta", "c1": "C1", "c": "C", "c5": "C5", "c6": "C6",
    "energy": "E", "hbar": "hbar", "a0": "a0", "f0": "f0", "v0": "v0", "f": "f",
    "branch": "branch", "psi0": "psi0", "mass": "mass", "potential": "V",
}


def cmd_sweep(cfg: RunConfig, stdout) -> int:
    v = cfg.values
    raw: dict[str, list[Any]]
    if isinstance(v["range"], Mapping):
        raw = {k: list(vals) for k, vals in v["range"].items()}
    else:
        raw = {name: [_range_value(t.strip()) for t in vals.split(",") if t.strip()]
               for name, vals in _pairs(v["range"], "--range")}
    ranges = {RANGE_ALIASES.get(k, k): vals for k, vals in raw.items()}
    # A swept flag need not also be given once: the template takes its first value.
    fill = {flag: vals[0] for flag, vals in raw.items() if flag in RANGE_ALIASES and vals}
    if fill:
        values = dict(cfg.values)
        for flag, first in fill.items():
            if flag in values and values[flag] is None:
                values[flag] = first
        cfg = RunConfig(**{**cfg.__dict__, "values": values,
                           "mass": cfg.mass if cfg.mass is not None else fill.get("mass"),
                           "potential": cfg.potential if cfg.potential is not None else fill.get("potential")})
    template = make_spec(cfg)
    workers = int(v["workers"]) if v.get("workers") else None
    tol = None
    if any(val is not None for val in cfg.tolerances.values()):
        tol = _tolerances(cfg, template.tag)
    reports = sweep(template, ranges, cfg.grid, cfg.setup, mass=cfg.mass, params=cfg.params,
                    psi0=cfg.psi0, tolerances=tol, workers=workers)
    doc = {
        "schema": SCHEMA_VERSION,
        "command": "sweep",
        "ranges": {k: list(vals) for k, vals in ranges.items()},
        "reports": [r.to_dict() for r in reports],
    }
    _write(cfg.json_path or cfg.out, _json_text(doc), stdout)
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL


def cmd_catalog(as_json: bool, stdout) -> int:
    entries = [
        {"name": p.name, "shorthand": "@" + p.name, "expression": p.text,
         "defaults": dict(p.defaults), "ranges": dict(p.ranges), "description": p.description}
        for p in CATALOG.values()
    ]
    if as_json:
        stdout.write(_json_text({"schema": SCHEMA_VERSION, "catalog": entries}))
        return EXIT_OK
    for e in entries:
        defaults = ", ".join(f"{k}={v:g}" for k, v in e["defaults"].items())
        ranges = ", ".join(f"{k} {r}" for k, r in e["ranges"].items())
        stdout.write(f"{e['shorthand']:<10} {e['expression']:<24} {defaults:<18} [{ranges}]  {e['description']}\n")
    return EXIT_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "invert": cmd_invert, "sweep": cmd_sweep}


def main(argv: Sequence[str] | None = None, stdout=None, stderr=None, env: Mapping[str, str] | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:  # argparse has already printed usage or help
        return EXIT_CONFIG if exc.code else EXIT_OK
    if ns.command == "catalog":
        return cmd_catalog(ns.json, stdout)
    try:
        cfg = make_config(ns, env)
        return COMMANDS[ns.command](cfg, stdout)
    except ConfigError as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (UnboundParameterError, ExprSyntaxError) as exc:
        stderr.write(f"config error: {exc}\n")
        return EXIT_CONFIG
    except (ConstructionError, SamplingError, InvalidSamplesError, DomainError) as exc:
        stderr.write(f"construction error ({getattr(ns, 'family', None) or ns.command}): {exc}\n")
        return EXIT_CONSTRUCTION
    except OSError as exc:
        stderr.write(f"i/o error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
