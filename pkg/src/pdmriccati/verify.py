"""End-to-end adjudication of constructed solutions.

A bundle is judged by three independent numbers: the Riccati residual of its
log-derivative, the Schrodinger residual of its wavefunction, and the
deviation from a Runge-Kutta integration that shares nothing with the
construction except the initial data at x_min.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .catalog import resolve_mass
from .core import (
    ConstructionError, PhysicalSetup, SolutionBundle, as_expr, log_mass_derivatives,
    riccati_coefficients, riccati_residual, sample_exact, sample_mass,
    schrodinger_residual, schrodinger_residual_of,
)
from .expr import DomainError, Expr, UnboundParameterError, differentiate, to_text
from .families import (
    Case3, FamilySpec, Theorem5, Theorem6, Theorem7, build, spec_fields,
    theorem5_root, theorem7_mass,
)
from .numerics import (
    Grid, InvalidSamplesError, Samples, SamplingError, cumulative_integral,
    definite_integral, derivative_fd, ode_oracle,
)

# Everything a malformed instance can raise while being built; a sweep records
# these per row instead of aborting.
INSTANCE_ERRORS = (
    ConstructionError, SamplingError, InvalidSamplesError, DomainError,
    UnboundParameterError, ValueError, ZeroDivisionError, OverflowError,
)


@dataclass(frozen=True)
class Tolerances:
    riccati: float = 1e-6
    schrodinger: float = 1e-5
    oracle: float = 1e-5

    @classmethod
    def for_family(cls, tag: str) -> Tolerances:
        if tag == Case3.tag:
            return cls(1e-10, 1e-9, 1e-5)
        return cls()

    def to_dict(self) -> dict[str, float]:
        return dataclasses.asdict(self)


MAX_MASKED_FRACTION = 0.05


def _json_float(v: float | None) -> float | None:
    if v is None or not math.isfinite(v):
        return None
    return float(v)


@dataclass(frozen=True)
class VerificationReport:
    family: str
    riccati_residual: float
    schrodinger_residual: float
    oracle_max_rel_dev: float
    masked_fraction: float
    tolerances: Tolerances
    passed: bool
    printed_formula_residual: float | None = None
    parameters: Mapping[str, Any] = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    error: str | None = None

    def to_dict(self) -> dict[str, Any]:
        """JSON-ready view; non-finite numbers become null."""
        return {
            "family": self.family,
            "parameters": dict(self.parameters),
            "riccati_residual": _json_float(self.riccati_residual),
            "schrodinger_residual": _json_float(self.schrodinger_residual),
            "oracle_max_rel_dev": _json_float(self.oracle_max_rel_dev),
            "masked_fraction": _json_float(self.masked_fraction),
            "printed_formula_residual": _json_float(self.printed_formula_residual),
            "tolerances": self.tolerances.to_dict(),
            "pass": self.passed,
            "notes": list(self.notes),
            "error": self.error,
        }

    @classmethod
    def failed(cls, family: str, error: str, tolerances: Tolerances,
               parameters: Mapping[str, Any] | None = None) -> VerificationReport:
        nan = float("nan")
        return cls(family, nan, nan, nan, nan, tolerances, False,
                   parameters=dict(parameters or {}), error=error)


def _initial_slope(bundle: SolutionBundle) -> float:
    if bundle.slope0 is not None:
        return bundle.slope0
    return float(derivative_fd(bundle.psi, 1).values[0])


def oracle_deviation(bundle: SolutionBundle) -> tuple[float, str | None]:
    """max |psi_oracle - psi| / max |psi| over valid points, and a divergence note."""
    psi = bundle.psi
    sol = ode_oracle(bundle.m, bundle.V, bundle.setup.E, bundle.setup.hbar,
                     float(psi.values[0]), _initial_slope(bundle))
    if sol.diverged:
        return math.inf, f"oracle diverged after x={float(bundle.grid.x[sol.last_valid])!r}"
    valid = psi.mask & sol.psi.mask
    scale = psi.max_abs()
    if scale == 0 or not valid.any():
        return math.inf, "oracle comparison has no valid points"
    return float(np.max(np.abs(sol.psi.values[valid] - psi.values[valid]))) / scale, None


def verify_bundle(
    bundle: SolutionBundle,
    tolerances: Tolerances | None = None,
    printed_residual: float | None = None,
    parameters: Mapping[str, Any] | None = None,
) -> VerificationReport:
    """Both residuals, the oracle comparison and the pass verdict for one bundle."""
    tag = bundle.family.tag
    tol = tolerances or Tolerances.for_family(tag)
    rc = riccati_coefficients(bundle.m, bundle.V, bundle.setup, dlnm=bundle.dlnm)
    ric = riccati_residual(bundle.u, rc, bundle.exact.get("du"))
    sch = schrodinger_residual(bundle)
    dev, oracle_note = oracle_deviation(bundle)
    masked = bundle.u.masked_fraction
    notes = list(bundle.notes)
    if oracle_note:
        notes.append(oracle_note)
    if masked >= MAX_MASKED_FRACTION:
        notes.append(f"masked fraction {masked:.3f} >= {MAX_MASKED_FRACTION}: run not valid")
    passed = (ric <= tol.riccati and sch <= tol.schrodinger and dev <= tol.oracle
              and masked < MAX_MASKED_FRACTION)
    return VerificationReport(tag, ric, sch, dev, masked, tol, passed, printed_residual,
                              dict(parameters or {}), tuple(notes))


# ---------------------------------------------------------------------------
# Printed wavefunctions, evaluated as displayed

def printed_formula_crosscheck(
    spec: FamilySpec, m: Expr | str | None, grid: Grid, setup: PhysicalSetup | None = None,
    params: Mapping[str, float] | None = None, psi0: float = 1.0,
) -> float:
    """Schrodinger residual of the displayed closed-form wavefunction.

    Theorem 5: psi = psi0 sqrt(m) [C + int e^{-int g}] e^{-+int g}, with the
    displayed signs (outer sign follows the branch, inner sign fixed).
    Theorem 6: psi = psi0 sqrt(m) {C + int e^{int h}} e^{-(1/2) int h},
    h = sqrt(b^2 + f(2b + f)), against the displayed condition with -f'/4.
    Theorem 7: the displayed mass (factor f inside D) with u from the displayed
    b; psi = psi0 e^{int u}.

    A large value is data, not an error.
    """
    setup = setup or PhysicalSetup(E=1.0)
    if isinstance(spec, Theorem5):
        m = as_expr(m)
        ms = sample_mass(m, grid, params)
        b = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
        g = sample_exact(theorem5_root(m, spec.f), grid, params, "g")
        G = cumulative_integral(g, 0)
        inner = cumulative_integral(Samples(grid, np.exp(-G.values)), 0)
        outer = -1.0 if spec.branch == "minus" else 1.0
        psi = psi0 * np.sqrt(ms.values) * (spec.C + inner.values) * np.exp(outer * G.values)
        V = build(spec, m, psi0, setup, grid, params).V
        return schrodinger_residual_of(Samples(grid, psi), ms, V, b, setup)
    if isinstance(spec, Theorem6):
        m = as_expr(m)
        ms = sample_mass(m, grid, params)
        b = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
        f = sample_exact(spec.f, grid, params, "f")
        df = sample_exact(differentiate(spec.f, 1), grid, params, "f'")
        # b^2 + f(2b + f) is a perfect square; clip roundoff below zero.
        h = Samples(grid, np.sqrt(np.maximum((b * b + f * (2.0 * b + f)).values, 0.0)))
        H = cumulative_integral(h, 0)
        inner = cumulative_integral(Samples(grid, np.exp(H.values)), 0)
        psi = psi0 * np.sqrt(ms.values) * (spec.C + inner.values) * np.exp(-0.5 * H.values)
        a_printed = 0.25 * (f * (2.0 * b + f) - df)
        V = setup.E + setup.hbar ** 2 * a_printed / (2.0 * ms)
        return schrodinger_residual_of(Samples(grid, psi), ms, V, b, setup)
    if isinstance(spec, Theorem7):
        tm = theorem7_mass(spec.f, spec.V, spec.C5, setup, grid, params, f_in_denominator=True)
        F = cumulative_integral(tm.f, 0)
        half = Samples(grid, np.exp(-0.5 * F.values))
        b_printed = tm.df / tm.f - 0.5 * tm.f + 4.0 / setup.hbar ** 2 * (tm.V - setup.E) * half / tm.D
        rate = cumulative_integral(b_printed + tm.f, 0)
        W = cumulative_integral(Samples(grid, np.exp(rate.values)), 0)
        # e^{int u} with u = e^{rate}/(C6 + W) - f/2, up to the factor 1/C6.
        psi = psi0 * half.values * (spec.C6 + W.values)
        return schrodinger_residual_of(Samples(grid, psi), tm.m, tm.V, tm.dlnm, setup)
    raise ValueError(f"no printed wavefunction to cross-check for {spec.tag}")


# ---------------------------------------------------------------------------
# Energy-dependent norm

def energy_dependent_norm(
    spec: FamilySpec, m_or_V: Expr | str | None, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None, delta_E: float | None = None,
    psi0: float = 1.0,
) -> float:
    """N = int psi^2 [1 - dV/dE] dx with dV/dE by a central difference in E.

    V is rebuilt at E +- delta_E with every other input fixed; psi is the
    solution at E.  delta_E defaults to 1e-4 max(1, |E|).
    """
    if delta_E is None:
        delta_E = 1e-4 * max(1.0, abs(setup.E))
    if not delta_E > 0:
        raise ValueError("delta_E must be positive")
    bundle = build(spec, m_or_V, psi0, setup, grid, params)
    hi = build(spec, m_or_V, psi0, dataclasses.replace(setup, E=setup.E + delta_E), grid, params)
    lo = build(spec, m_or_V, psi0, dataclasses.replace(setup, E=setup.E - delta_E), grid, params)
    dV_dE = (hi.V - lo.V) / (2.0 * delta_E)
    psi = bundle.psi
    return definite_integral(psi * psi * (1.0 - dV_dE))


# ---------------------------------------------------------------------------
# Single instances and sweeps

PRINTED_FAMILIES = (Theorem5, Theorem6, Theorem7)


def describe_instance(
    spec: FamilySpec, m_text: str | None, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None, psi0: float,
) -> dict[str, Any]:
    out: dict[str, Any] = {"family": spec.tag, **spec_fields(spec)}
    if m_text is not None:
        out["mass"] = m_text
    out.update({"E": setup.E, "hbar": setup.hbar, "psi0": psi0, "grid": str(grid)})
    if params:
        out["params"] = {k: params[k] for k in sorted(params)}
    return out


def verify_instance(
    spec: FamilySpec, m_or_V: Expr | str | None, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None, psi0: float = 1.0,
    tolerances: Tolerances | None = None, parameters: Mapping[str, Any] | None = None,
) -> VerificationReport:
    """Build, verify and (Theorems 5-7) cross-check one instance; never raises for bad inputs."""
    tol = tolerances or Tolerances.for_family(spec.tag)
    if parameters is None:
        m_text = m_or_V if isinstance(m_or_V, str) or m_or_V is None else to_text(m_or_V)
        parameters = describe_instance(spec, m_text, setup, grid, params, psi0)
    try:
        bundle = build(spec, m_or_V, psi0, setup, grid, params)
    except INSTANCE_ERRORS as exc:
        return VerificationReport.failed(spec.tag, f"{type(exc).__name__}: {exc}", tol, parameters)
    printed = None
    notes: tuple[str, ...] = ()
    if isinstance(spec, PRINTED_FAMILIES):
        try:
            printed = printed_formula_crosscheck(spec, m_or_V, grid, setup, params, psi0)
        except INSTANCE_ERRORS as exc:
            notes = (f"printed formula not evaluable: {exc}",)
    report = verify_bundle(bundle, tol, printed, parameters)
    if notes:
        report = dataclasses.replace(report, notes=report.notes + notes)
    return report


SETUP_KEYS = ("E", "hbar")


def _instantiate(
    template: FamilySpec, assignment: Mapping[str, Any], mass: str | None,
    setup: PhysicalSetup, params: Mapping[str, float], psi0: float,
) -> tuple[FamilySpec, str | None, PhysicalSetup, dict[str, float], float]:
    spec_names = {fld.name for fld in dataclasses.fields(template)}
    spec_changes = {k: v for k, v in assignment.items() if k in spec_names}
    setup_changes = {k: float(v) for k, v in assignment.items() if k in SETUP_KEYS}
    mass = assignment.get("mass", mass)
    psi0 = float(assignment.get("psi0", psi0))
    extra = {k: float(v) for k, v in assignment.items()
             if k not in spec_names and k not in SETUP_KEYS and k not in ("mass", "psi0")}
    spec = dataclasses.replace(template, **spec_changes)
    return spec, mass, dataclasses.replace(setup, **setup_changes), {**params, **extra}, psi0


def sweep(
    template: FamilySpec,
    ranges: Mapping[str, Sequence[Any]],
    grid: Grid,
    setup: PhysicalSetup,
    mass: str | None = None,
    params: Mapping[str, float] | None = None,
    psi0: float = 1.0,
    tolerances: Tolerances | None = None,
    workers: int | None = None,
) -> list[VerificationReport]:
    """Verify every point of the Cartesian product of ``ranges``.

    Keys may name spec fields, ``E``, ``hbar``, ``psi0``, ``mass`` (text or
    ``@catalog`` name) or free expression parameters.  Reports come back in
    product order whatever ``workers`` is; a failing instance yields a report
    with ``error`` set.  An empty range yields no reports.
    """
    names = list(ranges)
    combos = list(itertools.product(*(ranges[k] for k in names)))
    if not names or any(len(ranges[k]) == 0 for k in names):
        combos = [] if names else [()]

    def run(values: tuple) -> VerificationReport:
        assignment = dict(zip(names, values))
        try:
            spec, m_text, su, prm, p0 = _instantiate(template, assignment, mass, setup, dict(params or {}), psi0)
            m_expr, m_params = resolve_mass(m_text, prm) if m_text is not None else (None, prm)
        except (KeyError, TypeError, *INSTANCE_ERRORS) as exc:
            return VerificationReport.failed(template.tag, f"{type(exc).__name__}: {exc}",
                                             tolerances or Tolerances.for_family(template.tag),
                                             {k: _plain(v) for k, v in assignment.items()})
        described = describe_instance(spec, m_text, su, grid, m_params, p0)
        return verify_instance(spec, m_expr, su, grid, m_params, p0, tolerances, described)

    if workers and workers > 1 and len(combos) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, combos))
    return [run(c) for c in combos]


def _plain(v: Any) -> Any:
    return v if isinstance(v, (int, float, str, bool)) or v is None else str(v)
