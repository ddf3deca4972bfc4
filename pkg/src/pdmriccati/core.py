"""PDM Schrodinger equation, its Riccati form and the two residual functionals.

With psi = psi0 exp(int u), the equation

    psi'' - (ln m)' psi' + (2m/hbar^2)(E - V) psi = 0

becomes u' = a + b u - u^2 with a = 2m(V - E)/hbar^2 and b = (ln m)'.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

from .expr import Expr, differentiate, fn, parse
from .numerics import (
    Grid, Samples, cumulative_integral, derivative_fd, sample,
)

POLE_THRESHOLD = 1e-8
# Points within this many grid steps of a sign change of psi are masked in
# log-derivatives: the fourth-order stencil error of a simple pole decays like
# (h/d)^4, and 50 steps keeps it below 1e-6 of the local scale.
POLE_HALF_WIDTH = 50
OVERFLOW_EXPONENT = 700.0
# Leading error constants of the first-derivative stencils, relative to the
# central one (1/30): offset stencil 1/20, fully one-sided 1/5.
_EDGE_ERROR_RATIO = (6.0, 1.5)


class ConstructionError(ValueError):
    """A family or operation precondition is violated."""


class DivergedError(ConstructionError):
    pass


@dataclass(frozen=True)
class PhysicalSetup:
    E: float
    hbar: float = 1.0

    def __post_init__(self) -> None:
        if not self.hbar > 0:
            raise ValueError("hbar must be positive")


@dataclass(frozen=True)
class OrderingParams:
    """von Roos ambiguity parameters; beta is fixed by alpha + beta + gamma = -1."""

    alpha: float
    gamma: float

    @property
    def beta_vr(self) -> float:
        return -1.0 - self.alpha - self.gamma


@dataclass(frozen=True)
class RiccatiCoefficients:
    a: Samples
    b: Samples
    c: float = -1.0

    def __post_init__(self) -> None:
        if self.a.grid != self.b.grid:
            raise ValueError("a and b must share one grid")


@dataclass(frozen=True, eq=False)
class SolutionBundle:
    """Mass, potential, log-derivative and wavefunction of one constructed solution.

    ``dlnm`` is (ln m)' on the grid: sampled from the symbolic derivative when
    the mass is an expression, otherwise supplied by the constructor.
    Closed-form families also fill ``exact`` with symbolic derivatives of their
    formulas (keys ``du``, ``dpsi``, ``d2psi``); the residuals use them in
    place of finite differences, which would otherwise set a ~1e-9 roundoff
    floor on n = 4001.  ``slope0`` is the analytic psi'(x_min) when the
    constructor knows it; the oracle is seeded with it.
    """

    family: Any
    m: Samples
    V: Samples
    u: Samples
    psi: Samples
    setup: PhysicalSetup
    dlnm: Samples
    constants: Mapping[str, float] = field(default_factory=dict)
    notes: tuple[str, ...] = ()
    exact: Mapping[str, Samples] = field(default_factory=dict)
    slope0: float | None = None

    def __post_init__(self) -> None:
        fields = (self.m, self.V, self.u, self.psi, self.dlnm, *self.exact.values())
        grids = {s.grid for s in fields}
        if len(grids) != 1:
            raise ValueError("all bundle fields must live on one grid")

    @property
    def grid(self) -> Grid:
        return self.m.grid


def as_expr(e: Expr | str) -> Expr:
    return parse(e) if isinstance(e, str) else e


def sample_mass(m: Expr, grid: Grid, params: Mapping[str, float] | None = None) -> Samples:
    ms = sample(m, grid, params)
    if not ms.all_valid or np.any(ms.values <= 0):
        bad = np.flatnonzero(~ms.mask | (np.nan_to_num(ms.values) <= 0))
        raise ConstructionError(f"mass must be positive on the grid (fails at x={float(grid.x[bad[0]])!r})")
    return ms


def sample_exact(e: Expr, grid: Grid, params: Mapping[str, float] | None, what: str) -> Samples:
    s = sample(e, grid, params)
    if not s.all_valid:
        bad = np.flatnonzero(~s.mask)
        raise ConstructionError(f"{what} undefined at x={float(grid.x[bad[0]])!r}")
    return s


def log_mass_derivatives(m: Expr) -> tuple[Expr, Expr]:
    """Symbolic (ln m)' and (ln m)''."""
    lnm = fn("ln", m)
    d1 = differentiate(lnm, 1)
    return d1, differentiate(d1, 1)


def effective_potential_Uk(
    m: Expr, ordering: OrderingParams, hbar: float, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> Samples:
    """U_k = hbar^2/(4 m^3) [(1-alpha-gamma) (m/2) m'' + (alpha gamma + alpha + gamma - 1) m'^2]."""
    ms = sample_mass(m, grid, params)
    d1 = sample_exact(differentiate(m, 1), grid, params, "m'")
    d2 = sample_exact(differentiate(m, 2), grid, params, "m''")
    al, ga = ordering.alpha, ordering.gamma
    bracket = (1 - al - ga) * 0.5 * ms * d2 + (al * ga + al + ga - 1) * d1 * d1
    return hbar ** 2 / (4.0 * ms * ms * ms) * bracket


def ordering_vanishes(ordering: OrderingParams, tol: float = 1e-12) -> bool:
    al, ga = ordering.alpha, ordering.gamma
    return abs(1 - al - ga) <= tol and abs(al * ga + al + ga - 1) <= tol


def riccati_coefficients(
    m: Expr | Samples,
    V: Samples,
    setup: PhysicalSetup,
    grid: Grid | None = None,
    params: Mapping[str, float] | None = None,
    dlnm: Samples | None = None,
) -> RiccatiCoefficients:
    """a = 2m(V-E)/hbar^2, b = (ln m)', c = -1.

    For an expression mass, b comes from the symbolic derivative.  For a
    sampled mass, pass ``dlnm`` or accept a finite-difference estimate.
    """
    grid = grid or V.grid
    if isinstance(m, Samples):
        ms = m
        if np.any(ms.values[ms.mask] <= 0):
            raise ConstructionError("mass must be positive on the grid")
        b = dlnm if dlnm is not None else derivative_fd(ms.map(np.log), 1)
    else:
        ms = sample_mass(m, grid, params)
        b = dlnm if dlnm is not None else sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    a = 2.0 * ms * (V - setup.E) / setup.hbar ** 2
    return RiccatiCoefficients(a, b)


def wavefunction_from_logderivative(u: Samples, psi0: float) -> Samples:
    """psi = psi0 exp(int_{x_min}^x u)."""
    if psi0 == 0:
        raise ValueError("psi0 must be nonzero")
    U = cumulative_integral(u, 0)
    if np.max(U.values) > OVERFLOW_EXPONENT:
        raise DivergedError("exponent overflow while exponentiating the log-derivative")
    return Samples(u.grid, psi0 * np.exp(U.values))


def sign_change_mask(values: np.ndarray, half_width: int = POLE_HALF_WIDTH) -> np.ndarray:
    """False within ``half_width`` points of every zero or sign change of ``values``."""
    n = values.size
    s = np.sign(values)
    hits = np.flatnonzero(s == 0)
    flips = np.flatnonzero(s[:-1] * s[1:] < 0)
    keep = np.ones(n, dtype=bool)
    for i in np.concatenate([hits, flips, flips + 1]):
        keep[max(0, i - half_width): min(n, i + half_width + 1)] = False
    return keep


def pole_radius(grid: Grid) -> np.ndarray:
    """Per-point distance within which a simple pole spoils the u' stencil.

    POLE_HALF_WIDTH steps for central stencils, widened at the edges so that
    the one-sided stencils meet the same (h/d)^4 error bound.
    """
    w = np.ones(grid.n)
    for k, ratio in enumerate(_EDGE_ERROR_RATIO):
        w[k] = w[grid.n - 1 - k] = ratio ** 0.25
    return POLE_HALF_WIDTH * grid.h * w


def logderivative(psi: Samples, pole_threshold: float = POLE_THRESHOLD) -> Samples:
    """u = psi'/psi, masking near-zeros and a neighbourhood of every sign change."""
    dpsi = derivative_fd(psi, 1)
    scale = psi.max_abs()
    keep = (np.abs(psi.values) >= pole_threshold * scale) & sign_change_mask(psi.values)
    with np.errstate(all="ignore"):
        u = dpsi.values / psi.values
    mask = dpsi.mask & psi.mask & keep & np.isfinite(u)
    out = Samples(psi.grid, np.where(mask, u, np.nan), mask)
    if mask.sum() < 0.5 * psi.grid.n:
        raise ValueError(f"log-derivative valid on only {int(mask.sum())} of {psi.grid.n} points")
    return out


def riccati_residual(u: Samples, rc: RiccatiCoefficients, du: Samples | None = None) -> float:
    """max |u' - a - b u + u^2| / max(1, |a|, |u|^2) over the valid points.

    ``du`` replaces the finite-difference u' when an exact one is known.
    """
    if u.grid != rc.a.grid:
        raise ValueError("u and coefficients must share one grid")
    if du is None:
        du = derivative_fd(u, 1)
    r = du - rc.a - rc.b * u + u * u
    valid = r.mask & u.mask & rc.a.mask
    if not valid.any():
        raise ValueError("riccati_residual: no valid points")
    u_inf = float(np.max(np.abs(u.values[valid])))
    a_inf = float(np.max(np.abs(rc.a.values[valid])))
    scale = max(1.0, a_inf, u_inf ** 2)
    return float(np.max(np.abs(r.values[valid]))) / scale


def schrodinger_terms(
    psi: Samples, m: Samples, V: Samples, dlnm: Samples, setup: PhysicalSetup,
    exact: Mapping[str, Samples] | None = None,
) -> tuple[Samples, Samples, Samples]:
    """(psi'', (ln m)' psi', (2m/hbar^2)(E - V) psi).

    Derivatives come from ``exact`` when present, else finite differences.
    """
    exact = exact or {}
    d1 = exact["dpsi"] if "dpsi" in exact else derivative_fd(psi, 1)
    d2 = exact["d2psi"] if "d2psi" in exact else derivative_fd(psi, 2)
    k = 2.0 * m * (setup.E - V) / setup.hbar ** 2
    return d2, dlnm * d1, k * psi


def schrodinger_residual_of(
    psi: Samples, m: Samples, V: Samples, dlnm: Samples, setup: PhysicalSetup,
    exact: Mapping[str, Samples] | None = None,
) -> float:
    """Scale-free sup norm of psi'' - (ln m)' psi' + (2m/hbar^2)(E - V) psi.

    Normalized by |psi''| + |(ln m)' psi'| + |(2m/hbar^2)(E-V) psi| + |psi|/L^2
    (sup norms over the valid points, L the grid length); the last term keeps
    free solutions with psi'' = 0 from dividing roundoff by roundoff.
    """
    d2, drift, pot = schrodinger_terms(psi, m, V, dlnm, setup, exact)
    r = d2 - drift + pot
    valid = r.mask & psi.mask
    if not valid.any():
        raise ValueError("schrodinger_residual: no valid points")
    length = psi.grid.x_max - psi.grid.x_min

    def sup(s: Samples) -> float:
        return float(np.max(np.abs(s.values[valid])))

    scale = sup(pot) + sup(d2) + sup(drift) + sup(psi) / length ** 2
    if scale == 0:
        return 0.0
    return sup(r) / scale


def schrodinger_residual(bundle: SolutionBundle) -> float:
    """Residual of the bundle's psi against its own m, V and (ln m)'."""
    return schrodinger_residual_of(bundle.psi, bundle.m, bundle.V, bundle.dlnm, bundle.setup, bundle.exact)
