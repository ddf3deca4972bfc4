"""The solution families.

Every family except Case 2 and Case 3 goes through one engine: pick a
particular solution u_p of u' = a + b u - u^2, force a from it
(``consistency_from_particular``), then solve the remaining Bernoulli equation
v' = (b - 2 u_p) v - v^2 by quadrature (``bernoulli_solve``):

    R = int (b - 2 u_p),   W = int e^R,   v = e^R / (C + W),
    psi = psi0 e^{int u_p} (C + W).

All running integrals start at the left grid edge; the free constants absorb
any other choice of lower limit.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import ClassVar, Mapping, NamedTuple, Union

import numpy as np

from .core import (
    OVERFLOW_EXPONENT, POLE_THRESHOLD, ConstructionError, DivergedError,
    PhysicalSetup, SolutionBundle, as_expr, log_mass_derivatives, sample_exact,
    pole_radius, sample_mass, sign_change_mask,
)
from .expr import (
    X, Expr, Unary, add, const, differentiate, fn, mul, neg, pow_, simplify,
    smooth_sqrt, sub, to_text,
)
from .numerics import Grid, Samples, cumulative_integral, derivative_fd, sample

ASYMPTOTIC_FACTOR = 1e12
BRANCHES = ("plus", "minus")


def _check_branch(branch: str) -> None:
    if branch not in BRANCHES:
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")


def _expr_field(obj, name: str) -> None:
    value = getattr(obj, name)
    if isinstance(value, str):
        object.__setattr__(obj, name, as_expr(value))


# ---------------------------------------------------------------------------
# Family specifications

@dataclass(frozen=True)
class Case1:
    """V fixed by a + beta_c b - beta_c^2 = 0; u_p = beta_c."""

    beta_c: float
    C1: float = 1.0
    tag: ClassVar[str] = "case1"


@dataclass(frozen=True)
class Case2:
    """a = a0^2 m^2, psi = psi0 cosh(a0 int m + f0)."""

    a0: float
    f0: float = 0.0
    tag: ClassVar[str] = "case2"


@dataclass(frozen=True)
class Case3:
    """b^2 - 2b' + 4a = Delta; closed-form psi = psi0 e^{+-sqrt(Delta) x/2} sqrt(m)."""

    Delta: float
    branch: str = "plus"
    tag: ClassVar[str] = "case3"

    def __post_init__(self) -> None:
        _check_branch(self.branch)
        if not self.Delta >= 0:
            raise ValueError("case3 requires Delta >= 0 (oscillatory solutions are not supported)")


@dataclass(frozen=True)
class Theorem4:
    f: Expr
    branch: str = "plus"
    v0: float = 1.0
    tag: ClassVar[str] = "theorem4"

    def __post_init__(self) -> None:
        _expr_field(self, "f")
        _check_branch(self.branch)


@dataclass(frozen=True)
class Case4a:
    v0: float = 1.0
    tag: ClassVar[str] = "case4a"


@dataclass(frozen=True)
class Case4b:
    v0: float = 1.0
    tag: ClassVar[str] = "case4b"


@dataclass(frozen=True)
class Theorem5:
    """``branch='minus'`` is the upper sign: u_p = (b - g)/2, g = sqrt(f + b^2)."""

    f: Expr
    branch: str = "minus"
    C: float = 1.0
    tag: ClassVar[str] = "theorem5"

    def __post_init__(self) -> None:
        _expr_field(self, "f")
        _check_branch(self.branch)


@dataclass(frozen=True)
class Theorem6:
    f: Expr
    C: float = 1.0
    tag: ClassVar[str] = "theorem6"

    def __post_init__(self) -> None:
        _expr_field(self, "f")


@dataclass(frozen=True)
class Theorem7:
    """Mass built from f and a given potential V; u_p = -f/2.

    ``V`` may use the parameter ``E``, which is bound to the setup energy.
    """

    f: Expr
    V: Expr
    C5: float = 1.0
    C6: float = 1.0
    tag: ClassVar[str] = "theorem7"

    def __post_init__(self) -> None:
        _expr_field(self, "f")
        _expr_field(self, "V")


FamilySpec = Union[Case1, Case2, Case3, Theorem4, Case4a, Case4b, Theorem5, Theorem6, Theorem7]
FAMILIES: dict[str, type] = {
    cls.tag: cls
    for cls in (Case1, Case2, Case3, Theorem4, Case4a, Case4b, Theorem5, Theorem6, Theorem7)
}


def spec_fields(spec: FamilySpec) -> dict[str, object]:
    """Plain-data view of a spec (expressions as text)."""
    out: dict[str, object] = {}
    for fld in dataclasses.fields(spec):
        value = getattr(spec, fld.name)
        out[fld.name] = value if isinstance(value, (int, float, str)) else to_text(value)
    return out


# ---------------------------------------------------------------------------
# Engine

@dataclass(frozen=True)
class ParticularSolution:
    u_p: Samples
    bernoulli_rate: Samples
    du_p: Samples | None = None

    @classmethod
    def from_samples(cls, u_p: Samples, b: Samples, du_p: Samples | None = None) -> ParticularSolution:
        return cls(u_p, b - 2.0 * u_p, du_p)


def consistency_from_particular(u_p: Samples, b: Samples, du_p: Samples | None = None) -> Samples:
    """The a(x) that makes u_p an exact Riccati solution: a = u_p' - b u_p + u_p^2.

    ``du_p`` should be supplied when u_p has a symbolic derivative; otherwise a
    finite-difference estimate is used.
    """
    du = du_p if du_p is not None else derivative_fd(u_p, 1)
    return du - b * u_p + u_p * u_p


class BernoulliSolution(NamedTuple):
    u: Samples
    psi: Samples
    rate_integral: Samples  # R
    quadrature: Samples  # W
    C: float
    poles: tuple[float, ...]


def asymptotic_constant(particular: ParticularSolution) -> float:
    """A Bernoulli constant large enough to act as C -> infinity on this grid."""
    _, W = _bernoulli_quadratures(particular.u_p, particular.bernoulli_rate)
    return ASYMPTOTIC_FACTOR * max(1.0, W.max_abs())


def _bernoulli_quadratures(u_p: Samples, rate: Samples) -> tuple[Samples, Samples]:
    R = cumulative_integral(rate, 0)
    if np.max(R.values) > OVERFLOW_EXPONENT:
        raise DivergedError("Bernoulli integrating factor overflows on this grid")
    eR = Samples(rate.grid, np.exp(R.values))
    return R, cumulative_integral(eR, 0)


def bernoulli_solve(u_p: Samples, b: Samples, C: float, psi0: float = 1.0) -> BernoulliSolution:
    """General Riccati solution u = u_p + e^R/(C + W) and psi = psi0 e^{int u_p}(C + W).

    Zeros of C + W are zeros of psi and poles of u; u is masked within a
    neighbourhood of each one and the pole abscissae are returned.
    """
    if u_p.grid != b.grid:
        raise ValueError("u_p and b must share one grid")
    if not (u_p.all_valid and b.all_valid):
        raise ConstructionError("particular solution or (ln m)' undefined on the grid")
    rate = b - 2.0 * u_p
    R, W = _bernoulli_quadratures(u_p, rate)
    denom = C + W.values
    Up = cumulative_integral(u_p, 0).values
    if np.max(Up) > OVERFLOW_EXPONENT:
        raise DivergedError("exp(int u_p) overflows on this grid")
    psi = psi0 * np.exp(Up) * denom
    if not np.all(np.isfinite(psi)):
        raise DivergedError("wavefunction overflows on this grid")

    keep = sign_change_mask(denom) & (np.abs(denom) >= POLE_THRESHOLD * np.max(np.abs(denom)))
    with np.errstate(all="ignore"):
        v = np.exp(R.values) / denom
    # |v| ~ 1/d near a pole at distance d; this also catches poles just
    # outside the grid, which leave no sign change behind.
    keep &= np.isfinite(v) & (np.abs(v) * pole_radius(u_p.grid) < 1.0)
    u = Samples(u_p.grid, np.where(keep, u_p.values + v, np.nan), keep)
    x = u_p.grid.x
    s = np.sign(denom)
    poles = [float(x[i]) for i in np.flatnonzero(s == 0)]
    for i in np.flatnonzero(s[:-1] * s[1:] < 0):
        # linear interpolation of the crossing
        t = denom[i] / (denom[i] - denom[i + 1])
        poles.append(float(x[i] + t * (x[i + 1] - x[i])))
    return BernoulliSolution(u, Samples(u_p.grid, psi), R, W, float(C), tuple(sorted(poles)))


def bernoulli_general(u_p: Samples, b: Samples, C: float) -> Samples:
    """Log-derivative of the general solution built on the particular u_p."""
    return bernoulli_solve(u_p, b, C).u


def _potential_from_a(a: Samples, m: Samples, setup: PhysicalSetup) -> Samples:
    return setup.E + setup.hbar ** 2 * a / (2.0 * m)


def _engine_bundle(
    spec, m: Samples, dlnm: Samples, u_p: Samples, du_p: Samples | None,
    C: float, psi0: float, setup: PhysicalSetup, V: Samples | None = None,
    constants: Mapping[str, float] | None = None, notes: tuple[str, ...] = (),
) -> SolutionBundle:
    if V is None:
        a = consistency_from_particular(u_p, dlnm, du_p)
        V = _potential_from_a(a, m, setup)
    sol = bernoulli_solve(u_p, dlnm, C, psi0)
    if sol.poles:
        notes = notes + (f"psi vanishes at x = {', '.join(f'{p:.6g}' for p in sol.poles)}",)
    consts = {"x_base": m.grid.x_min, **(constants or {})}
    # At x_min every running integral vanishes: psi = psi0 C, psi' = psi0 (u_p C + 1).
    slope0 = psi0 * (float(u_p.values[0]) * C + 1.0)
    return SolutionBundle(spec, m, V, sol.u, sol.psi, setup, dlnm, consts, notes, slope0=slope0)


# ---------------------------------------------------------------------------
# Case 1

def case1_potential_from_mass(
    m: Expr, beta_c: float, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> Samples:
    """V = E + (beta hbar^2 / 2m)(beta - (ln m)')."""
    ms = sample_mass(m, grid, params)
    b = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    return setup.E + beta_c * setup.hbar ** 2 / (2.0 * ms) * (beta_c - b)


def _first_crossing(values: np.ndarray, x: np.ndarray) -> str | None:
    s = np.sign(values)
    idx = np.flatnonzero((s[:-1] * s[1:] <= 0))
    if idx.size == 0 and s[0] != 0:
        return None
    i = int(idx[0]) if idx.size else 0
    return f"[{float(x[i])!r}, {float(x[min(i + 1, x.size - 1)])!r}]"


class Case1Mass(NamedTuple):
    m: Samples
    dlnm: Samples
    V: Samples


def case1_mass_from_potential(
    V: Expr | str | Samples, beta_c: float, m2: float, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> Samples:
    """m = e^{beta x} / [m2 + (2/(beta hbar^2)) int e^{beta x}(V - E)]."""
    return case1_inverse(V, beta_c, m2, setup, grid, params).m


def case1_inverse(
    V: Expr | str | Samples, beta_c: float, m2: float, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> Case1Mass:
    """Mass from potential, with (ln m)' = beta - (2/(beta hbar^2)) e^{beta x}(V - E)/den exactly."""
    if beta_c == 0:
        raise ConstructionError("case1 mass-from-potential needs beta_c != 0")
    Vs = V if isinstance(V, Samples) else sample_exact(as_expr(V), grid, _with_energy(params, setup), "V")
    x = grid.x
    integrand = Samples(grid, np.exp(beta_c * x)) * (Vs - setup.E)
    I = cumulative_integral(integrand, 0)
    k = 2.0 / (beta_c * setup.hbar ** 2)
    denom = m2 + k * I.values
    where = _first_crossing(denom, x)
    if where is not None:
        raise ConstructionError(f"mass denominator crosses zero in {where}")
    m = np.exp(beta_c * x) / denom
    if np.any(m <= 0):
        raise ConstructionError("mass denominator is negative: m < 0 on the grid")
    dlnm = beta_c - k * integrand.values / denom
    return Case1Mass(Samples(grid, m), Samples(grid, dlnm), Vs)


def case1_wavefunction(m: Samples, beta_c: float, C1: float, psi0: float = 1.0) -> Samples:
    """psi = psi0 e^{beta x} [C1 + int_{x_min}^x m e^{-2 beta phi} dphi]."""
    x = m.grid.x
    inner = cumulative_integral(m * Samples(m.grid, np.exp(-2.0 * beta_c * x)), 0)
    psi = psi0 * np.exp(beta_c * x) * (C1 + inner.values)
    if not np.all(np.isfinite(psi)):
        raise DivergedError("case1 wavefunction overflows on this grid")
    return Samples(m.grid, psi)


def _case1(spec: Case1, m: Expr, psi0, setup, grid, params) -> SolutionBundle:
    ms = sample_mass(m, grid, params)
    dlnm = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    V = case1_potential_from_mass(m, spec.beta_c, setup, grid, params)
    return case1_bundle(spec, ms, dlnm, V, psi0, setup)


def case1_bundle(
    spec: Case1, ms: Samples, dlnm: Samples, V: Samples, psi0: float, setup: PhysicalSetup,
) -> SolutionBundle:
    """Case 1 solution for a sampled mass whose (ln m)' is known."""
    grid = ms.grid
    beta, x0, m0 = spec.beta_c, grid.x_min, float(ms.values[0])
    # Map (psi0, C1) onto the engine normalization so that psi equals
    # psi0 e^{beta x}[C1 + int m e^{-2 beta phi}] literally.
    C = spec.C1 * math.exp(2.0 * beta * x0) / m0
    psi0_engine = psi0 * m0 * math.exp(-beta * x0)
    u_p = Samples.constant(grid, beta)
    return _engine_bundle(spec, ms, dlnm, u_p, Samples.constant(grid, 0.0), C, psi0_engine,
                          setup, V=V, constants={"beta_c": beta, "C1": spec.C1, "psi0": psi0})


# ---------------------------------------------------------------------------
# Case 2

def case2_wavefunction(
    m: Expr, a0: float, f0: float, psi0: float, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> tuple[Samples, Samples]:
    """V = E + a0^2 hbar^2 m / 2 and psi = psi0 cosh(a0 int m + f0)."""
    if a0 == 0:
        raise ConstructionError("case2 needs a0 != 0")
    ms = sample_mass(m, grid, params)
    V = setup.E + a0 ** 2 * setup.hbar ** 2 * ms / 2.0
    theta = a0 * cumulative_integral(ms, 0).values + f0
    if np.max(np.abs(theta)) > OVERFLOW_EXPONENT:
        raise DivergedError("cosh argument overflows on this grid")
    return V, Samples(grid, psi0 * np.cosh(theta))


def _case2(spec: Case2, m: Expr, psi0, setup, grid, params) -> SolutionBundle:
    ms = sample_mass(m, grid, params)
    dlnm = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    V, psi = case2_wavefunction(m, spec.a0, spec.f0, psi0, setup, grid, params)
    theta = spec.a0 * cumulative_integral(ms, 0).values + spec.f0
    u = Samples(grid, spec.a0 * ms.values * np.tanh(theta))
    consts = {"x_base": grid.x_min, "a0": spec.a0, "f0": spec.f0, "psi0": psi0}
    slope0 = psi0 * spec.a0 * float(ms.values[0]) * math.sinh(spec.f0)
    return SolutionBundle(spec, ms, V, u, psi, setup, dlnm, consts, slope0=slope0)


# ---------------------------------------------------------------------------
# Case 3

def case3_potential_from_mass(
    m: Expr, Delta: float, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> Samples:
    """V = E + (hbar^2 / 8m)[Delta + 2 (ln m)'' - ((ln m)')^2]."""
    ms = sample_mass(m, grid, params)
    d1, d2 = log_mass_derivatives(m)
    b = sample_exact(d1, grid, params, "(ln m)'")
    db = sample_exact(d2, grid, params, "(ln m)''")
    return setup.E + setup.hbar ** 2 / (8.0 * ms) * (Delta + 2.0 * db - b * b)


def _check_delta(Delta: float) -> None:
    if Delta < 0:
        raise ConstructionError("case3 requires Delta >= 0 (oscillatory solutions are not supported)")


def case3_logderivative(
    m: Expr, Delta: float, branch: str, grid: Grid, params: Mapping[str, float] | None = None,
) -> Samples:
    """u = (ln m)'/2 +- sqrt(Delta)/2."""
    _check_delta(Delta)
    _check_branch(branch)
    sign = 1.0 if branch == "plus" else -1.0
    b = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    return 0.5 * b + sign * 0.5 * math.sqrt(Delta)


def case3_wavefunction(
    m: Expr, Delta: float, branch: str, psi0: float, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> Samples:
    """psi = psi0 e^{+-sqrt(Delta) x / 2} sqrt(m)."""
    _check_delta(Delta)
    _check_branch(branch)
    sign = 1.0 if branch == "plus" else -1.0
    ms = sample_mass(m, grid, params)
    psi = psi0 * np.exp(sign * math.sqrt(Delta) * grid.x / 2.0) * np.sqrt(ms.values)
    if not np.all(np.isfinite(psi)):
        raise DivergedError("case3 wavefunction overflows on this grid")
    return Samples(grid, psi)


def _case3_exact_derivatives(
    m: Expr, Delta: float, branch: str, psi0: float, grid: Grid,
    params: Mapping[str, float] | None,
) -> dict[str, Samples]:
    """Symbolic u', psi' and psi'' of the closed forms."""
    sign = 1.0 if branch == "plus" else -1.0
    psi_e = mul(const(psi0), mul(fn("exp", mul(const(sign * math.sqrt(Delta) / 2.0), X)), fn("sqrt", m)))
    d2lnm = log_mass_derivatives(m)[1]
    return {
        "du": 0.5 * sample_exact(d2lnm, grid, params, "(ln m)''"),
        "dpsi": sample_exact(differentiate(psi_e, 1), grid, params, "psi'"),
        "d2psi": sample_exact(differentiate(psi_e, 2), grid, params, "psi''"),
    }


def case3_mass_ode_residual(
    m: Expr, V: Samples, Delta: float, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None,
) -> tuple[float, float]:
    """Residuals of the second-order mass equation and of its M = m^{-1/2} form.

    (2/m) m'' - 3((ln m)')^2 - (8m/hbar^2)(V - E) + Delta = 0
    M'' - (Delta/4) M + (2/hbar^2)(V - E)/M = 0

    Each is a sup norm divided by the sum of the sup norms of its terms.
    """
    ms = sample_mass(m, grid, params)
    d2m = sample_exact(differentiate(m, 2), grid, params, "m''")
    b = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    hb2 = setup.hbar ** 2
    dV = V - setup.E
    terms_m = [2.0 / ms * d2m, -3.0 * b * b, -8.0 * ms * dV / hb2, Samples.constant(grid, Delta)]

    M = pow_(m, const(-0.5))
    Ms = sample_exact(M, grid, params, "M")
    d2M = sample_exact(differentiate(M, 2), grid, params, "M''")
    terms_M = [d2M, -Delta / 4.0 * Ms, 2.0 / hb2 * dV / Ms]

    def rel(terms: list[Samples]) -> float:
        total = terms[0]
        for t in terms[1:]:
            total = total + t
        scale = sum(t.max_abs() for t in terms)
        return total.max_abs() / scale if scale else 0.0

    return rel(terms_m), rel(terms_M)


def _case3(spec: Case3, m: Expr, psi0, setup, grid, params) -> SolutionBundle:
    ms = sample_mass(m, grid, params)
    dlnm = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    V = case3_potential_from_mass(m, spec.Delta, setup, grid, params)
    psi = case3_wavefunction(m, spec.Delta, spec.branch, psi0, grid, params)
    u = case3_logderivative(m, spec.Delta, spec.branch, grid, params)
    notes: tuple[str, ...] = ()
    if spec.Delta == 0:
        notes = ("Delta = 0: both branches reduce to sqrt(m) (degenerate pair)",)
    consts = {"Delta": spec.Delta, "psi0": psi0}
    exact = _case3_exact_derivatives(m, spec.Delta, spec.branch, psi0, grid, params)
    return SolutionBundle(spec, ms, V, u, psi, setup, dlnm, consts, notes, exact,
                          slope0=float(exact["dpsi"].values[0]))


# ---------------------------------------------------------------------------
# Theorem 4 and its special cases

def _theorem4_root(f: Expr) -> Expr:
    return smooth_sqrt(f)


def theorem4_particular(m: Expr, root: Expr, branch: str) -> Expr:
    """u_p = (ln m)'/2 +- r/2 for a root r of f (symbolic)."""
    b = log_mass_derivatives(m)[0]
    half_root = mul(const(0.5), root)
    return simplify((add if branch == "plus" else sub)(mul(const(0.5), b), half_root))


def _check_radicand(root: Expr, radicand: Expr, grid: Grid, params, what: str) -> None:
    if isinstance(root, Unary) and root.fn == "sqrt":
        vals = sample(radicand, grid, params)
        bad = ~vals.mask | (np.nan_to_num(vals.values, nan=-1.0) < 0)
        if bad.any():
            raise ConstructionError(f"{what} must be >= 0 on the grid (fails at x={float(grid.x[np.flatnonzero(bad)[0]])!r})")


def _solve_with_particular(
    spec, m: Expr, u_p_expr: Expr, C: float, psi0: float, setup: PhysicalSetup,
    grid: Grid, params, constants: Mapping[str, float], notes: tuple[str, ...] = (),
) -> SolutionBundle:
    ms = sample_mass(m, grid, params)
    dlnm = sample_exact(log_mass_derivatives(m)[0], grid, params, "(ln m)'")
    u_p = sample_exact(u_p_expr, grid, params, "particular solution")
    du_p = sample_exact(differentiate(u_p_expr, 1), grid, params, "particular solution derivative")
    return _engine_bundle(spec, ms, dlnm, u_p, du_p, C, psi0, setup,
                          constants=dict(constants, psi0=psi0), notes=notes)


def theorem4_solve(
    m: Expr, f: Expr, branch: str, v0: float, psi0: float, setup: PhysicalSetup,
    grid: Grid, params: Mapping[str, float] | None = None, spec=None,
) -> SolutionBundle:
    """(4m/hbar^2)(V - E) = (ln m)'' - ((ln m)')^2/2 + f/2 +- (sqrt f)'.

    psi = psi0 sqrt(m) e^{+-(1/2) int sqrt f} [v0 + int e^{-+ int sqrt f}], up to
    constant factors.  When f is written as an explicit square g^2 the smooth
    root g is used for sqrt(f).
    """
    _check_branch(branch)
    f = as_expr(f)
    root = _theorem4_root(f)
    _check_radicand(root, f, grid, params, "f")
    u_p = theorem4_particular(m, root, branch)
    spec = spec if spec is not None else Theorem4(f, branch, v0)
    return _solve_with_particular(spec, m, u_p, v0, psi0, setup, grid, params, {"v0": v0})


def case4a_wavefunction(m: Samples, v0: float, psi0: float = 1.0) -> Samples:
    """psi = psi0 sqrt(m) (v0 + x - x_min)."""
    return Samples(m.grid, psi0 * np.sqrt(m.values) * (v0 + m.grid.x - m.grid.x_min))


def case4b_wavefunction(m: Samples, v0: float, psi0: float = 1.0) -> Samples:
    """psi = psi0 m [v0 + int dphi / m]."""
    inv = cumulative_integral(1.0 / m, 0)
    return Samples(m.grid, psi0 * m.values * (v0 + inv.values))


def case4b_f(m: Expr) -> Expr:
    """f = ((ln m)')^2, kept as an explicit square."""
    return pow_(log_mass_derivatives(m)[0], const(2.0))


# ---------------------------------------------------------------------------
# Theorem 5

def theorem5_root(m: Expr, f: Expr) -> Expr:
    """g = sqrt(f + ((ln m)')^2)."""
    b = log_mass_derivatives(m)[0]
    return smooth_sqrt(add(f, pow_(b, const(2.0))))


def theorem5_solve(
    m: Expr, f: Expr, branch: str, C: float, psi0: float, setup: PhysicalSetup,
    grid: Grid, params: Mapping[str, float] | None = None,
) -> SolutionBundle:
    """(2m/hbar^2)(V - E) = (1/2) d/dx[(ln m)' -+ g] + f/4,  g = sqrt(f + (ln m)'^2).

    The upper sign is ``branch='minus'``.  u_p = ((ln m)' -+ g)/2, so the
    Bernoulli rate is +-g and psi = psi0 sqrt(m) e^{-+(1/2) int g}[C + int e^{+-int g}]
    up to a constant factor.
    """
    _check_branch(branch)
    f = as_expr(f)
    b = log_mass_derivatives(m)[0]
    radicand = simplify(add(f, pow_(b, const(2.0))))
    g = smooth_sqrt(radicand)
    _check_radicand(g, radicand, grid, params, "f + ((ln m)')^2")
    combine = sub if branch == "minus" else add
    u_p = simplify(mul(const(0.5), combine(b, g)))
    return _solve_with_particular(Theorem5(f, branch, C), m, u_p, C, psi0, setup, grid, params, {"C": C})


# ---------------------------------------------------------------------------
# Theorem 6

def theorem6_solve(
    m: Expr, f: Expr, C: float, psi0: float, setup: PhysicalSetup,
    grid: Grid, params: Mapping[str, float] | None = None,
) -> SolutionBundle:
    """u_p = -f/2, forcing a = -f'/2 + (ln m)' f/2 + f^2/4.

    psi = psi0 e^{-(1/2) int f} [C + int (m/m(x_min)) e^{int f}].
    """
    f = as_expr(f)
    u_p = simplify(neg(mul(const(0.5), f)))
    return _solve_with_particular(Theorem6(f, C), m, u_p, C, psi0, setup, grid, params, {"C": C})


# ---------------------------------------------------------------------------
# Theorem 7

class Theorem7Mass(NamedTuple):
    m: Samples
    dlnm: Samples
    D: Samples
    f: Samples
    df: Samples
    V: Samples


def _with_energy(params: Mapping[str, float] | None, setup: PhysicalSetup) -> dict[str, float]:
    out = {"E": setup.E}
    out.update(params or {})
    out["E"] = setup.E
    return out


def theorem7_mass(
    f: Expr, V: Expr, C5: float, setup: PhysicalSetup, grid: Grid,
    params: Mapping[str, float] | None = None, f_in_denominator: bool = False,
) -> Theorem7Mass:
    """m = f e^{-(1/2) int f} / D with D = C5 - (4/hbar^2) int (V - E) e^{-(1/2) int f}.

    With ``f_in_denominator`` the integrand of D carries an extra factor f; that
    variant is not consistent with u_p = -f/2 and exists for comparison only.
    (ln m)' is returned exactly: f'/f - f/2 - D'/D with D' the known integrand.
    """
    p = _with_energy(params, setup)
    fs = sample_exact(f, grid, p, "f")
    if np.any(fs.values == 0) or np.any(np.sign(fs.values[:-1]) != np.sign(fs.values[1:])):
        raise ConstructionError(f"f must not vanish on the grid (sign change in {_first_crossing(fs.values, grid.x)})")
    df = sample_exact(differentiate(f, 1), grid, p, "f'")
    Vs = sample_exact(V, grid, p, "V")
    half = Samples(grid, np.exp(-0.5 * cumulative_integral(fs, 0).values))
    integrand = (Vs - setup.E) * half
    if f_in_denominator:
        integrand = integrand * fs
    D = C5 - 4.0 / setup.hbar ** 2 * cumulative_integral(integrand, 0)
    where = _first_crossing(D.values, grid.x)
    if where is not None:
        raise ConstructionError(f"theorem7 denominator D crosses zero in {where}")
    m = fs * half / D
    if np.any(m.values <= 0):
        raise ConstructionError("theorem7 mass changes sign (f and D must share a sign)")
    dlnm = df / fs - 0.5 * fs + 4.0 / setup.hbar ** 2 * integrand / D
    return Theorem7Mass(m, dlnm, D, fs, df, Vs)


def theorem7_solve(
    f: Expr, V: Expr, C5: float, C6: float, psi0: float, setup: PhysicalSetup,
    grid: Grid, params: Mapping[str, float] | None = None,
) -> SolutionBundle:
    f, V = as_expr(f), as_expr(V)
    tm = theorem7_mass(f, V, C5, setup, grid, params)
    u_p = -0.5 * tm.f
    du_p = -0.5 * tm.df
    return _engine_bundle(Theorem7(f, V, C5, C6), tm.m, tm.dlnm, u_p, du_p, C6, psi0, setup,
                          V=tm.V, constants={"C5": C5, "C6": C6, "psi0": psi0})


# ---------------------------------------------------------------------------
# Dispatcher

def build(
    spec: FamilySpec, m_or_V: Expr | str | None, psi0: float, setup: PhysicalSetup,
    grid: Grid, params: Mapping[str, float] | None = None,
) -> SolutionBundle:
    """Construct the full solution bundle for one family instance.

    ``m_or_V`` is the mass expression for every family except Theorem 7,
    which carries its potential in its own fields and builds the mass itself.
    """
    if isinstance(spec, Theorem7):
        return theorem7_solve(spec.f, spec.V, spec.C5, spec.C6, psi0, setup, grid, params)
    if m_or_V is None:
        raise ConstructionError(f"{spec.tag} needs a mass expression")
    m = as_expr(m_or_V)
    if isinstance(spec, Case1):
        return _case1(spec, m, psi0, setup, grid, params)
    if isinstance(spec, Case2):
        return _case2(spec, m, psi0, setup, grid, params)
    if isinstance(spec, Case3):
        return _case3(spec, m, psi0, setup, grid, params)
    if isinstance(spec, Theorem4):
        return theorem4_solve(m, spec.f, spec.branch, spec.v0, psi0, setup, grid, params, spec)
    if isinstance(spec, Case4a):
        return theorem4_solve(m, const(0.0), "plus", spec.v0, psi0, setup, grid, params, spec)
    if isinstance(spec, Case4b):
        return theorem4_solve(m, case4b_f(m), "plus", spec.v0, psi0, setup, grid, params, spec)
    if isinstance(spec, Theorem5):
        return theorem5_solve(m, spec.f, spec.branch, spec.C, psi0, setup, grid, params)
    if isinstance(spec, Theorem6):
        return theorem6_solve(m, spec.f, spec.C, psi0, setup, grid, params)
    raise TypeError(f"unknown family spec {spec!r}")
