from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from pdmriccati.expr import (
    Binary, Const, DomainError, ExprSyntaxError, Param, Unary, UnboundParameterError,
    UnknownFunctionError, Var, X, add, const, differentiate, evaluate, evaluate_array,
    fn, mul, parse, pow_, simplify, to_text,
)
from pdmriccati.expr.nodes import CALLABLE_FUNCTIONS, depth


# -- parse -------------------------------------------------------------------

def test_parse_sech_square():
    assert parse("sech(w*x)^2") == Binary(
        "pow", Unary("sech", Binary("mul", Param("w"), Var())), Const(2.0))


def test_parse_precedence():
    assert parse("2*x + 1") == add(mul(const(2), X), const(1))
    assert parse("2*x^3") == mul(const(2), pow_(X, const(3)))
    assert parse("-x^2") == fn("neg", pow_(X, const(2)))


def test_pow_is_right_associative():
    assert parse("x^2^3") == pow_(X, pow_(const(2), const(3)))


def test_unbalanced_paren_offset():
    with pytest.raises(ExprSyntaxError) as info:
        parse("sech(")
    assert info.value.offset == 5


@pytest.mark.parametrize("text", ["", "x +", "2 x", "(x", "x)", "1..2", "x $ 1"])
def test_syntax_errors(text):
    with pytest.raises(ExprSyntaxError):
        parse(text)


def test_unknown_function():
    with pytest.raises(UnknownFunctionError):
        parse("erf(x)")


def test_number_forms():
    assert parse("1.5e-3") == const(1.5e-3)
    assert parse(".5") == const(0.5)


# -- evaluate ----------------------------------------------------------------

def test_eval_examples():
    assert evaluate(parse("tanh(x)"), 0.0) == 0.0
    assert evaluate(parse("sech(w*x)^2"), 0.0, {"w": 3.0}) == 1.0
    with pytest.raises(DomainError):
        evaluate(parse("ln(x)"), -1.0)


def test_eval_unbound_parameter():
    with pytest.raises(UnboundParameterError):
        evaluate(parse("w*x"), 1.0)


def test_eval_array_masks_domain_errors():
    values, valid = evaluate_array(parse("sqrt(x)"), np.array([-1.0, 0.0, 4.0]))
    assert valid.tolist() == [False, True, True]
    assert values[2] == 2.0


# -- differentiate -------------------------------------------------------------

def test_derivative_of_square():
    assert simplify(differentiate(parse("x^2"), 1)) == mul(const(2), X)


def test_derivative_of_sech_square():
    d = differentiate(parse("sech(w*x)^2"), 1)
    expected = parse("-2*w*sech(w*x)^2*tanh(w*x)")
    rng = np.random.default_rng(7)
    for x in rng.uniform(-3, 3, 20):
        p = {"w": 1.3}
        assert evaluate(d, x, p) == pytest.approx(evaluate(expected, x, p), rel=1e-13, abs=1e-15)


def test_second_derivative_of_log_sech_mass():
    d2 = differentiate(parse("ln(m0*sech(w*x)^2)"), 2)
    p = {"m0": 2.0, "w": 0.7}
    rng = np.random.default_rng(11)
    for x in rng.uniform(-3, 3, 20):
        exact = -2 * 0.7 ** 2 * (1 / math.cosh(0.7 * x)) ** 2
        assert evaluate(d2, x, p) == pytest.approx(exact, rel=1e-12, abs=1e-14)
        h = 1e-3
        lnm = lambda t: math.log(2.0 / math.cosh(0.7 * t) ** 2)  # noqa: E731
        fd = (lnm(x + h) - 2 * lnm(x) + lnm(x - h)) / h ** 2
        assert evaluate(d2, x, p) == pytest.approx(fd, abs=1e-6)


def test_higher_order_derivative():
    assert evaluate(differentiate(parse("sin(x)"), 4), 0.3) == pytest.approx(math.sin(0.3), rel=1e-14)


# -- simplify ----------------------------------------------------------------

def test_simplify_examples():
    assert simplify(add(mul(const(0), X), X)) == X
    assert simplify(mul(const(2), const(3))) == const(6)
    assert simplify(pow_(X, const(1))) == X


# -- properties ----------------------------------------------------------------

SAFE_UNARY = ("sin", "cos", "tanh", "sech", "exp", "neg", "sinh", "cosh")
leaves = st.one_of(
    st.just(X),
    st.sampled_from(["a", "b"]).map(Param),
    st.floats(-5, 5, allow_nan=False).map(lambda v: Const(round(v, 3))),
)


def trees(unary=tuple(sorted(CALLABLE_FUNCTIONS)) + ("neg",), ops=("add", "sub", "mul", "div", "pow")):
    return st.recursive(
        leaves,
        lambda kids: st.one_of(
            st.tuples(st.sampled_from(unary), kids).map(lambda t: Unary(*t)),
            st.tuples(st.sampled_from(ops), kids, kids).map(lambda t: Binary(*t)),
        ),
        max_leaves=12,
    ).filter(lambda e: depth(e) <= 8)


@given(trees())
def test_print_parse_round_trip(e):
    assert parse(to_text(e)) == e
    s = simplify(e)
    assert parse(to_text(s)) == s


# Smooth trees for calculus checks: bounded arguments keep values moderate.
smooth = trees(unary=SAFE_UNARY, ops=("add", "sub", "mul"))
PARAMS = {"a": 0.7, "b": -1.1}


def _value(e, x):
    try:
        v = evaluate(e, x, PARAMS)
    except (DomainError, OverflowError):
        return None
    return v if math.isfinite(v) and abs(v) < 1e6 else None


@given(smooth, st.floats(-1.5, 1.5))
def test_derivative_matches_fd(e, x):
    h = 1e-3
    pts = [_value(e, x + k * h) for k in (-2, -1, 1, 2)]
    d = _value(differentiate(e, 1), x)
    if d is None or any(p is None for p in pts):
        return
    fd = (pts[0] - 8 * pts[1] + 8 * pts[2] - pts[3]) / (12 * h)
    # The stencil truncation term h^4 f^(5)/30 bounds the admissible gap.
    d5 = _value(differentiate(e, 5), x)
    if d5 is None or abs(d5) * h ** 4 / 30 > 1e-7 * (1 + abs(d)):
        return
    assert abs(d - fd) <= 1e-6 * (1 + abs(d))


@given(trees(), st.lists(st.floats(-3, 3), min_size=1, max_size=100))
def test_simplify_preserves_value(e, xs):
    s = simplify(e)
    for x in xs:
        try:
            v = evaluate(e, x, PARAMS)
        except (DomainError, OverflowError, ZeroDivisionError):
            continue
        if not math.isfinite(v):
            continue
        try:
            w = evaluate(s, x, PARAMS)
        except (DomainError, OverflowError, ZeroDivisionError):
            continue
        assert abs(w - v) <= 2 * math.ulp(v) or w == pytest.approx(v, rel=1e-12, abs=1e-300)


@given(smooth)
def test_derivative_closure(e):
    d = differentiate(e, 2)
    assert parse(to_text(d)) == d
