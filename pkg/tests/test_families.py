from __future__ import annotations

import dataclasses

import numpy as np
import pytest

from pdmriccati import (
    Case1, Case2, Case3, Case4a, Case4b, ConstructionError, Grid, PhysicalSetup, Samples,
    cumulative_integral,
    Theorem4, Theorem5, Theorem6, Theorem7, bernoulli_general, build,
    consistency_from_particular, riccati_coefficients, riccati_residual, sample,
    schrodinger_residual,
)
from pdmriccati.catalog import CATALOG, DEFAULT_F, THEOREM7_DEFAULT_V, THEOREM7_F_CHOICES
from pdmriccati.core import (
    RiccatiCoefficients, log_mass_derivatives, sample_exact, schrodinger_residual_of,
)
from pdmriccati.expr import differentiate, parse
from pdmriccati.families import (
    ParticularSolution, asymptotic_constant, case4b_f, case1_mass_from_potential,
    case1_potential_from_mass, case1_wavefunction, case2_wavefunction,
    case3_logderivative, case3_mass_ode_residual, case3_potential_from_mass,
    case3_wavefunction, case4a_wavefunction, case4b_wavefunction, spec_fields,
    theorem4_particular,
)
from pdmriccati.verify import verify_instance

MASSES = [(name, p.expr, p.params()) for name, p in CATALOG.items()]
MASS_IDS = [n for n, *_ in MASSES]
E1 = PhysicalSetup(E=1.0)


def residuals(bundle):
    rc = riccati_coefficients(bundle.m, bundle.V, bundle.setup, dlnm=bundle.dlnm)
    return riccati_residual(bundle.u, rc, bundle.exact.get("du")), schrodinger_residual(bundle)


def proportional_deviation(a, b):
    """max |a - c b| / max |a| for the least-squares c."""
    a, b = np.asarray(a), np.asarray(b)
    c = (a @ b) / (b @ b)
    return np.max(np.abs(a - c * b)) / np.max(np.abs(a))


# -- specs -------------------------------------------------------------------

def test_spec_validation():
    with pytest.raises(ValueError):
        Case3(-1.0)
    with pytest.raises(ValueError):
        Case3(1.0, "sideways")
    spec = Theorem5("1", "plus", 2.0)
    assert spec.f == parse("1")
    assert spec_fields(spec) == {"f": "1", "branch": "plus", "C": 2.0}


def test_build_requires_mass(grid):
    with pytest.raises(ConstructionError):
        build(Case1(0.5), None, 1.0, E1, grid)


def test_build_rejects_nonpositive_mass(grid):
    with pytest.raises(ConstructionError):
        build(Case1(0.5), "x", 1.0, E1, grid)


# -- engine ------------------------------------------------------------------

def test_consistency_from_constant_particular():
    g = Grid(-2, 2, 201)
    beta = 0.4
    b = Samples(g, np.tanh(g.x))
    a = consistency_from_particular(Samples.constant(g, beta), b)
    np.testing.assert_allclose(a.values, beta ** 2 - beta * b.values, atol=1e-15)
    zero = consistency_from_particular(Samples.constant(g, 0.0), b)
    assert np.all(zero.values == 0.0)


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_consistency_reproduces_theorem4_condition(branch):
    g = Grid(-3, 3, 601)
    m, f = parse("1 + exp(-x^2)"), parse("1 + 0.5*sech(x)^2")
    up = theorem4_particular(m, parse("sqrt(1 + 0.5*sech(x)^2)"), branch)
    b = sample(log_mass_derivatives(m)[0], g)
    a = consistency_from_particular(sample(up, g), b, sample(differentiate(up, 1), g))
    # (4m/hbar^2)(V - E) = 2a = (ln m)'' - (ln m)'^2/2 + f/2 +- (sqrt f)'
    d1, d2 = (sample(e, g) for e in log_mass_derivatives(m))
    sign = 1.0 if branch == "plus" else -1.0
    expected = d2 - 0.5 * d1 * d1 + 0.5 * sample(f, g) + sign * sample(differentiate(parse("sqrt(1 + 0.5*sech(x)^2)"), 1), g)
    np.testing.assert_allclose(2 * a.values, expected.values, atol=1e-12)


@pytest.mark.parametrize("name, m, params", MASSES, ids=MASS_IDS)
def test_particular_solution_certificate(name, m, params, grid):
    up_expr = theorem4_particular(m, parse("sqrt(1 + 0.5*sech(x)^2)"), "plus")
    up = sample(up_expr, grid, params)
    b = sample(log_mass_derivatives(m)[0], grid, params)
    a = consistency_from_particular(up, b, sample(differentiate(up_expr, 1), grid, params))
    assert riccati_residual(up, RiccatiCoefficients(a, b)) <= 1e-8


def test_bernoulli_general_reproduces_case1(grid):
    m_expr = parse("1 + exp(-x^2)")
    m = sample(m_expr, grid)
    b = sample(log_mass_derivatives(m_expr)[0], grid)
    beta, C = 0.5, 1.0
    u = bernoulli_general(Samples.constant(grid, beta), b, C)
    # u = beta + d/dx ln|C1 + int m e^{-2 beta phi}| with C1 = C m(x_min) e^{-2 beta x_min}.
    weight = m * Samples(grid, np.exp(-2 * beta * grid.x))
    C1 = C * m.values[0] * np.exp(-2 * beta * grid.x_min)
    expected = beta + weight.values / (C1 + cumulative_integral(weight).values)
    assert u.all_valid
    np.testing.assert_allclose(u.values, expected, rtol=1e-12)


def test_bernoulli_large_constant_limit(grid):
    b = sample(parse("tanh(x)"), grid)
    up = Samples(grid, 0.3 + 0.1 * np.sin(grid.x))
    C = asymptotic_constant(ParticularSolution.from_samples(up, b))
    u = bernoulli_general(up, b, C)
    right = grid.x > grid.x_min + 0.5
    assert np.max(np.abs(u.values - up.values)[right]) <= 1e-6


def test_bernoulli_pole_is_masked(grid):
    b = Samples.constant(grid, 0.0)
    # u_p = 0, rate 0: v = 1/(C + x - x_min), pole at x = x_min - C = 0.
    u = bernoulli_general(Samples.constant(grid, 0.0), b, -4.0)
    assert not u.mask[grid.index_of(0.0)]
    ok = u.mask
    np.testing.assert_allclose(u.values[ok], 1 / grid.x[ok], rtol=1e-9)


# -- Case 1 ------------------------------------------------------------------

def test_case1_constant_mass_sinh():
    g = Grid(0, 3, 3001)
    psi = case1_wavefunction(Samples.constant(g, 1.0), 1.0, 0.0)
    np.testing.assert_allclose(psi.values, np.sinh(g.x), atol=1e-13)
    bundle = build(Case1(1.0, 0.0), "1", 1.0, PhysicalSetup(E=0.0), g)
    np.testing.assert_allclose(bundle.V.values, 0.5, rtol=1e-15)
    np.testing.assert_allclose(bundle.psi.values, np.sinh(g.x), atol=1e-12)


def test_case1_potential_examples(grid):
    V = case1_potential_from_mass(parse("2"), 0.6, E1, grid)
    np.testing.assert_allclose(V.values, 1.0 + 0.36 / 4, rtol=1e-15)
    assert np.all(case1_potential_from_mass(parse("sech(x)^2"), 0.0, E1, grid).values == 1.0)


def test_case1_sech2_worked_example(grid):
    m0, w, beta = 1.0, 1.2, 0.5
    V = case1_potential_from_mass(parse("m0*sech(w*x)^2"), beta, E1, grid, {"m0": m0, "w": w})
    x = grid.x
    printed = 1.0 + beta * np.cosh(w * x) ** 2 / (2 * m0) * (beta + 2 * w * np.tanh(w * x))
    assert np.max(np.abs(V.values - printed) / np.abs(printed)) <= 1e-10


def test_case1_psi_matches_literal_formula(grid):
    m = parse("1 + exp(-x^2)")
    bundle = build(Case1(0.7, 0.3), m, -2.0, E1, grid)
    literal = case1_wavefunction(sample(m, grid), 0.7, 0.3, -2.0)
    np.testing.assert_allclose(bundle.psi.values, literal.values, rtol=1e-12, atol=1e-14)


@pytest.mark.parametrize("C1", [-1.0, 0.0, 0.5, 1.0, 10.0])
def test_case1_C1_sweep(C1, grid):
    bundle = build(Case1(0.5, C1), "sech(x)^2", 1.0, E1, grid)
    assert schrodinger_residual(bundle) <= 1e-6


def test_case1_mass_from_flat_potential(grid):
    m = case1_mass_from_potential(Samples.constant(grid, 1.0), 0.8, 2.0, E1, grid)
    np.testing.assert_allclose(m.values, np.exp(0.8 * grid.x) / 2.0, rtol=1e-15)


def test_case1_mass_from_constant_shift(grid):
    m0, beta = 1.7, 0.9
    V = f"E + {beta ** 2 / (2 * m0)!r}"
    m2 = np.exp(beta * grid.x_min) / m0
    m = case1_mass_from_potential(V, beta, m2, E1, grid)
    assert np.max(np.abs(m.values - m0)) / m0 <= 1e-8


@pytest.mark.parametrize("beta", [0.3, 1.0, 2.0])
@pytest.mark.parametrize("name, m, params", MASSES, ids=MASS_IDS)
def test_case1_inverse_pair(beta, name, m, params, grid):
    ms = sample(m, grid, params)
    V = case1_potential_from_mass(m, beta, E1, grid, params)
    m2 = np.exp(beta * grid.x_min) / ms.values[0]
    back = case1_mass_from_potential(V, beta, m2, E1, grid)
    assert np.max(np.abs(back.values - ms.values) / ms.values) <= 1e-7


def test_case1_mass_denominator_crossing(grid):
    with pytest.raises(ConstructionError, match=r"crosses zero in \["):
        case1_mass_from_potential("E - 1", 1.0, 0.01, E1, grid)
    with pytest.raises(ConstructionError):
        case1_mass_from_potential("E", 0.0, 1.0, E1, grid)


# -- Case 2 ------------------------------------------------------------------

def test_case2_constant_mass_cosh():
    g = Grid(0, 2, 2001)
    V, psi = case2_wavefunction(parse("1"), 1.0, 0.0, 1.0, PhysicalSetup(E=0.3), g)
    np.testing.assert_allclose(V.values, 0.8, rtol=1e-15)
    np.testing.assert_allclose(psi.values, np.cosh(g.x), rtol=1e-13)


def test_case2_sech2(grid):
    _, psi = case2_wavefunction(parse("sech(x)^2"), 1.0, 0.0, 1.0, E1, grid)
    expected = np.cosh(np.tanh(grid.x) - np.tanh(grid.x_min))
    assert np.max(np.abs(psi.values - expected)) <= 1e-12
    assert schrodinger_residual(build(Case2(1.0, 0.0), "sech(x)^2", 1.0, E1, grid)) <= 1e-6


def test_case2_f0_is_a_base_shift():
    g = Grid(-1, 1, 201)
    shifted = Grid(-0.5, 1, 151)
    _, psi = case2_wavefunction(parse("1"), 1.0, 0.5, 1.0, E1, shifted)
    _, full = case2_wavefunction(parse("1"), 1.0, 0.0, 1.0, E1, g)
    np.testing.assert_allclose(psi.values, np.cosh(shifted.x + 1.0), rtol=1e-13)
    np.testing.assert_allclose(full.values[50:], psi.values, rtol=1e-12)


# -- Case 3 ------------------------------------------------------------------

def test_case3_potential_examples(grid):
    V = case3_potential_from_mass(parse("2"), 1.5, E1, grid)
    np.testing.assert_allclose(V.values, 1.0 + 1.5 / 16, rtol=1e-15)
    V = case3_potential_from_mass(parse("exp(0.5*x)"), 1.0, E1, grid)
    np.testing.assert_allclose(V.values, 1.0 + (1.0 - 0.25) / (8 * np.exp(0.5 * grid.x)), rtol=1e-13)
    V = case3_potential_from_mass(parse("exp(0.5*x)"), 0.25, E1, grid)
    np.testing.assert_allclose(V.values, 1.0, atol=1e-15)


def test_case3_constant_mass():
    g = Grid(-2, 2, 401)
    setup = PhysicalSetup(E=0.0)
    for branch, sign in (("plus", 1), ("minus", -1)):
        psi = case3_wavefunction(parse("1"), 4.0, branch, 1.0, g)
        np.testing.assert_allclose(psi.values, np.exp(sign * g.x), rtol=1e-14)
    np.testing.assert_allclose(case3_potential_from_mass(parse("1"), 4.0, setup, g).values, 0.5)


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_case3_sech2(branch, grid):
    psi = case3_wavefunction(parse("sech(x)^2"), 1.0, branch, 1.0, grid)
    sign = 1 if branch == "plus" else -1
    np.testing.assert_allclose(psi.values, np.exp(sign * grid.x / 2) / np.cosh(grid.x), rtol=1e-13)
    u = case3_logderivative(parse("sech(x)^2"), 1.0, branch, grid)
    np.testing.assert_allclose(u.values, -np.tanh(grid.x) + sign * 0.5, atol=1e-15)
    ric, sch = residuals(build(Case3(1.0, branch), "sech(x)^2", 1.0, E1, grid))
    assert ric <= 1e-10 and sch <= 1e-9


@pytest.mark.parametrize("c1, c2", [(1, 1), (1, -1), (2.5, -0.3)])
def test_case3_linear_combinations(c1, c2, grid):
    plus = build(Case3(1.0, "plus"), "sech(x)^2", 1.0, E1, grid)
    minus = build(Case3(1.0, "minus"), "sech(x)^2", 1.0, E1, grid)
    exact = {k: c1 * plus.exact[k] + c2 * minus.exact[k] for k in ("dpsi", "d2psi")}
    psi = c1 * plus.psi + c2 * minus.psi
    assert schrodinger_residual_of(psi, plus.m, plus.V, plus.dlnm, E1, exact) <= 1e-9


@pytest.mark.parametrize("name, m, params", MASSES, ids=MASS_IDS)
def test_case3_mass_ode(name, m, params, grid):
    V = case3_potential_from_mass(m, 1.0, E1, grid, params)
    r_m, r_M = case3_mass_ode_residual(m, V, 1.0, E1, grid, params)
    assert r_m <= 1e-9 and r_M <= 1e-9
    r_m, r_M = case3_mass_ode_residual(m, V + 0.1, 1.0, E1, grid, params)
    assert r_m > 1e-3 and r_M > 1e-3


def test_case3_mass_ode_constant_mass(grid):
    V = Samples.constant(grid, 1.0 + 2.0 / (8 * 3.0))
    r_m, r_M = case3_mass_ode_residual(parse("3"), V, 2.0, E1, grid)
    assert r_m <= 1e-14 and r_M <= 1e-14


# -- Theorem 4 and its reductions ---------------------------------------------

@pytest.mark.parametrize("name, m, params", MASSES, ids=MASS_IDS)
def test_case4a_from_theorem4(name, m, params, grid):
    t4 = build(Theorem4("0", "plus", 0.7), m, 1.0, E1, grid, params)
    c4a = build(Case4a(0.7), m, 1.0, E1, grid, params)
    closed = case4a_wavefunction(sample(m, grid, params), 0.7)
    assert proportional_deviation(t4.psi.values, closed.values) <= 1e-8
    assert proportional_deviation(c4a.psi.values, closed.values) <= 1e-8
    d1, d2 = (sample_exact(e, grid, params, "") for e in log_mass_derivatives(m))
    lhs = 4 * t4.m * (t4.V - 1.0)
    assert np.max(np.abs((lhs - d2 + 0.5 * d1 * d1).values)) <= 1e-10


@pytest.mark.parametrize("name, m, params", MASSES, ids=MASS_IDS)
def test_case4b_from_theorem4(name, m, params, grid):
    t4 = build(Theorem4(case4b_f(m), "plus", 0.7), m, 1.0, E1, grid, params)
    c4b = build(Case4b(0.7), m, 1.0, E1, grid, params)
    ms = sample(m, grid, params)
    # The closed form anchors its constant differently: v0 -> v0 / m(x_min).
    closed = case4b_wavefunction(ms, 0.7 / ms.values[0])
    assert proportional_deviation(t4.psi.values, closed.values) <= 1e-8
    assert proportional_deviation(c4b.psi.values, closed.values) <= 1e-8
    d2 = sample_exact(log_mass_derivatives(m)[1], grid, params, "")
    assert np.max(np.abs((2 * c4b.m * (c4b.V - 1.0) - d2).values)) <= 1e-10


@pytest.mark.parametrize("branch", ["plus", "minus"])
@pytest.mark.parametrize("name, m, params", MASSES, ids=MASS_IDS)
def test_theorem4_constant_f_recovers_case3(branch, name, m, params, grid):
    Delta = 1.0
    b = sample(log_mass_derivatives(m)[0], grid, params)
    up = Samples(grid, 0.5 * b.values + (0.5 if branch == "plus" else -0.5) * np.sqrt(Delta))
    v0 = asymptotic_constant(ParticularSolution.from_samples(up, b))
    bundle = build(Theorem4("1", branch, v0), m, 1.0, E1, grid, params)
    target = case3_logderivative(m, Delta, branch, grid, params)
    right = grid.x >= 0
    assert np.max(np.abs(bundle.u.values - target.values)[right]) <= 1e-6


def test_theorem4_negative_f_rejected(grid):
    with pytest.raises(ConstructionError):
        build(Theorem4("x", "plus", 1.0), "1", 1.0, E1, grid)


# -- Theorems 5 and 6 ------------------------------------------------------------

def test_theorem5_zero_f_collapses(grid):
    # g = |b| = b, so u_p = 0, V = E and psi = C + int m/m(x_min), which is
    # linear in x only for a constant mass.
    m = parse("exp(0.5*x)")
    bundle = build(Theorem5("0", "minus", 1.0), m, 1.0, E1, grid)
    np.testing.assert_allclose(bundle.V.values, 1.0, atol=1e-15)
    ms = sample(m, grid)
    expected = 1.0 + cumulative_integral(ms / ms.values[0]).values
    np.testing.assert_allclose(bundle.psi.values, expected, rtol=1e-12)
    flat = build(Theorem5("0", "minus", 1.0), "2", 1.0, E1, grid)
    np.testing.assert_allclose(flat.psi.values, 1.0 + grid.x - grid.x_min, rtol=1e-12)
    ric, sch = residuals(bundle)
    assert ric <= 1e-8 and sch <= 1e-8


@pytest.mark.parametrize("branch", ["plus", "minus"])
def test_theorem5_exponential_mass(branch, grid):
    lam = 0.5
    bundle = build(Theorem5(f"{3 * lam ** 2!r}", branch, 1.0), f"exp({lam}*x)", 1.0, E1, grid)
    ric, sch = residuals(bundle)
    assert ric <= 1e-6 and sch <= 1e-6
    # g = 2 lam; u_p = (lam -+ 2 lam)/2 and V - E = u_p^2 - lam u_p over 2m.
    up = 0.5 * (lam - 2 * lam) if branch == "minus" else 0.5 * (lam + 2 * lam)
    expected = 1.0 + (up * up - lam * up) / (2 * np.exp(lam * grid.x))
    np.testing.assert_allclose(bundle.V.values, expected, rtol=1e-12)


def test_theorem5_negative_radicand(grid):
    with pytest.raises(ConstructionError):
        build(Theorem5("-1", "minus", 1.0), "1", 1.0, E1, grid)


def test_theorem6_zero_f(grid):
    bundle = build(Theorem6("0", 1.0), "1 + exp(-x^2)", 1.0, E1, grid)
    np.testing.assert_allclose(bundle.V.values, 1.0, atol=1e-15)
    const_mass = build(Theorem6("0", 1.0), "2", 1.0, E1, grid)
    # psi = C + int m/m(x_min): linear for a constant mass.
    np.testing.assert_allclose(const_mass.psi.values, 1.0 + grid.x - grid.x_min, rtol=1e-12)


def test_theorem6_reduces_to_case1(grid):
    beta = 0.4
    t6 = build(Theorem6(f"{2 * beta!r}", 1.0), "1", 1.0, E1, grid)
    np.testing.assert_allclose(t6.V.values, 1.0 + beta ** 2 / 2, rtol=1e-12)
    c1 = build(Case1(-beta, 1.0), "1", 1.0, E1, grid)
    np.testing.assert_allclose(t6.V.values, c1.V.values, rtol=1e-12)
    ric, sch = residuals(t6)
    assert ric <= 1e-8 and sch <= 1e-8


# -- Theorem 7 ---------------------------------------------------------------

def test_theorem7_flat_potential_exponential_mass(grid):
    bundle = build(Theorem7("1", "E", 1.0, 1.0), None, 1.0, E1, grid)
    np.testing.assert_allclose(bundle.m.values, np.exp(-0.5 * (grid.x - grid.x_min)), rtol=1e-12)
    ric, sch = residuals(bundle)
    assert ric <= 1e-6 and sch <= 1e-6


def test_theorem7_matches_case1_structure(grid):
    beta = 0.3
    bundle = build(Theorem7(f"{2 * beta!r}", "E", 1.0, 1.0), None, 1.0, E1, grid)
    np.testing.assert_allclose(bundle.m.values, 2 * beta * np.exp(-beta * (grid.x - grid.x_min)), rtol=1e-12)
    c1 = build(Case1(-beta, 1.0), "0.6*exp(-0.3*(x + 4))", 1.0, E1, grid)
    np.testing.assert_allclose(c1.V.values, bundle.V.values, atol=1e-12)


def test_theorem7_large_C6_limit(grid):
    f = parse("2 + tanh(x)")
    base = build(Theorem7(f, THEOREM7_DEFAULT_V, 1.0, 1.0), None, 1.0, E1, grid)
    big = build(Theorem7(f, THEOREM7_DEFAULT_V, 1.0, 1e14), None, 1.0, E1, grid)
    right = grid.x > grid.x_min + 0.5
    assert np.max(np.abs(big.u.values + 0.5 * sample(f, grid).values)[right]) <= 1e-6
    up = Samples(grid, -0.5 * sample(f, grid).values)
    rc = riccati_coefficients(base.m, base.V, E1, dlnm=base.dlnm)
    assert riccati_residual(up, rc) <= 1e-6


def test_theorem7_denominator_crossing(grid):
    with pytest.raises(ConstructionError, match=r"D crosses zero in \[-?\d"):
        build(Theorem7("1", "E + 1", 1.0, 1.0), None, 1.0, E1, grid)


def test_theorem7_vanishing_f(grid):
    with pytest.raises(ConstructionError):
        build(Theorem7("x", "E", 1.0, 1.0), None, 1.0, E1, grid)


# -- engine soundness and generality ---------------------------------------------

CONSTRUCTIONS = [
    Case1(0.5, 1.0), Case2(1.0, 0.0), Case3(1.0, "plus"), Case3(1.0, "minus"),
    Theorem4(DEFAULT_F["theorem4"], "plus", 1.0), Theorem4(DEFAULT_F["theorem4"], "minus", 1.0),
    Case4a(1.0), Case4b(1.0), Theorem5(DEFAULT_F["theorem5"], "minus", 1.0),
    Theorem5(DEFAULT_F["theorem5"], "plus", 1.0), Theorem6(DEFAULT_F["theorem6"], 1.0),
]
CONSTANT_FIELD = {"case1": "C1", "case2": "f0", "theorem4": "v0", "case4a": "v0", "case4b": "v0",
                  "theorem5": "C", "theorem6": "C", "theorem7": "C6"}


def _label(spec):
    return f"{spec.tag}-{getattr(spec, 'branch', '')}".rstrip("-")


@pytest.mark.parametrize("spec", CONSTRUCTIONS, ids=_label)
def test_residual_equivalence(spec, grid):
    # Both residuals see the same solutions; the Schrodinger one stays within
    # a small multiple of the Riccati one (or of its own roundoff floor).
    for name, m, params in MASSES:
        ric, sch = residuals(build(spec, m, 1.0, E1, grid, params))
        assert sch <= 10 * max(ric, 1e-8), name


@pytest.mark.parametrize("psi0", [1.0, -2.0])
@pytest.mark.parametrize("C", [-1.0, 0.0, 1.0, 10.0])
@pytest.mark.parametrize("spec", CONSTRUCTIONS + [Theorem7(f, THEOREM7_DEFAULT_V, 1.0, 1.0) for f in THEOREM7_F_CHOICES], ids=_label)
def test_two_parameter_generality(spec, C, psi0, grid):
    field = CONSTANT_FIELD.get(spec.tag)
    if field is not None:
        spec = dataclasses.replace(spec, **{field: C})
    masses = [(None, None, None)] if isinstance(spec, Theorem7) else MASSES
    for name, m, params in masses:
        report = verify_instance(spec, m, E1, grid, params, psi0)
        assert report.passed, (name, report.to_dict())
