"""Symbolic differentiation with respect to ``x`` and light simplification."""

from __future__ import annotations

import math

import numpy as np

from .evaluate import _binary, _UNARY, _unary_domain
from .nodes import (
    Binary, Const, Expr, Param, Unary, Var, add, const, depends_on_x, div, fn,
    mul, neg, pow_, sub,
)

ZERO = Const(0.0)
ONE = Const(1.0)
TWO = Const(2.0)


def _d(e: Expr) -> Expr:
    if isinstance(e, (Const, Param)):
        return ZERO
    if isinstance(e, Var):
        return ONE
    if isinstance(e, Unary):
        g = e.arg
        dg = _d(g)
        if e.fn == "neg":
            return neg(dg)
        outer: Expr
        if e.fn == "exp":
            outer = e
        elif e.fn == "ln":
            return div(dg, g)
        elif e.fn == "sqrt":
            return div(dg, mul(TWO, e))
        elif e.fn == "abs":
            # d|g| = g g' / |g|; undefined (domain error) where g = 0.
            return div(mul(g, dg), e)
        elif e.fn == "sin":
            outer = fn("cos", g)
        elif e.fn == "cos":
            outer = neg(fn("sin", g))
        elif e.fn == "tan":
            outer = add(ONE, pow_(e, TWO))
        elif e.fn == "sinh":
            outer = fn("cosh", g)
        elif e.fn == "cosh":
            outer = fn("sinh", g)
        elif e.fn == "tanh":
            outer = pow_(fn("sech", g), TWO)
        elif e.fn == "sech":
            outer = neg(mul(e, fn("tanh", g)))
        else:  # pragma: no cover - FUNCTIONS is closed
            raise ValueError(e.fn)
        return mul(outer, dg)
    assert isinstance(e, Binary)
    f, g = e.left, e.right
    if e.op == "add":
        return add(_d(f), _d(g))
    if e.op == "sub":
        return sub(_d(f), _d(g))
    if e.op == "mul":
        return add(mul(_d(f), g), mul(f, _d(g)))
    if e.op == "div":
        return div(sub(mul(_d(f), g), mul(f, _d(g))), pow_(g, TWO))
    # pow
    if not depends_on_x(g):
        return mul(mul(g, pow_(f, sub(g, ONE))), _d(f))
    if not depends_on_x(f):
        return mul(mul(e, fn("ln", f)), _d(g))
    # f^g = exp(g ln f)
    return mul(e, add(mul(_d(g), fn("ln", f)), div(mul(g, _d(f)), f)))


def differentiate(e: Expr, order: int = 1) -> Expr:
    """Exact symbolic derivative of ``e`` with respect to ``x``, simplified."""
    if order < 1:
        raise ValueError("derivative order must be >= 1")
    for _ in range(order):
        e = simplify(_d(simplify(e)))
    return e


def _is(e: Expr, value: float) -> bool:
    return isinstance(e, Const) and e.value == value


def _fold_unary(name: str, a: float) -> Const | None:
    arr = np.asarray([a])
    if _unary_domain(name, arr)[0]:
        return None
    with np.errstate(all="ignore"):
        v = float(_UNARY[name](arr)[0])
    return Const(v) if math.isfinite(v) else None


def _fold_binary(op: str, a: float, b: float) -> Const | None:
    with np.errstate(all="ignore"):
        vals, bad = _binary(op, np.asarray([a]), np.asarray([b]))
    v = float(vals[0])
    if bad[0] or not math.isfinite(v):
        return None
    return Const(v)


def simplify(e: Expr) -> Expr:
    """Constant folding and the trivial identities.

    Folds constant subtrees (only when the result is finite and in-domain),
    removes additive zeros and multiplicative ones, collapses products with a
    zero factor and double negations, and reduces ``a^1`` / ``a^0``.  No
    reassociation is done, so results stay bitwise equal to the input's value
    wherever the input is defined.
    """
    if isinstance(e, (Const, Var, Param)):
        return e
    if isinstance(e, Unary):
        a = simplify(e.arg)
        if e.fn == "neg":
            if isinstance(a, Unary) and a.fn == "neg":
                return a.arg
            if isinstance(a, Const):
                return Const(-a.value)
            return neg(a)
        if isinstance(a, Const):
            folded = _fold_unary(e.fn, a.value)
            if folded is not None:
                return folded
        return Unary(e.fn, a)

    f = simplify(e.left)
    g = simplify(e.right)
    if isinstance(f, Const) and isinstance(g, Const):
        folded = _fold_binary(e.op, f.value, g.value)
        if folded is not None:
            return folded
    op = e.op
    if op == "add":
        if _is(f, 0):
            return g
        if _is(g, 0):
            return f
    elif op == "sub":
        if _is(g, 0):
            return f
        if _is(f, 0):
            return simplify(neg(g))
        if isinstance(g, Unary) and g.fn == "neg":
            return add(f, g.arg)
    elif op == "mul":
        if _is(f, 0) or _is(g, 0):
            return ZERO
        if _is(f, 1):
            return g
        if _is(g, 1):
            return f
        if _is(f, -1):
            return simplify(neg(g))
        if _is(g, -1):
            return simplify(neg(f))
    elif op == "div":
        if _is(f, 0):
            return ZERO
        if _is(g, 1):
            return f
    if op in ("mul", "div"):
        # (-a)*b = -(a*b) exactly under round-to-nearest; keeps signs outermost.
        f_neg = isinstance(f, Unary) and f.fn == "neg"
        g_neg = isinstance(g, Unary) and g.fn == "neg"
        if f_neg or g_neg:
            inner = Binary(op, f.arg if f_neg else f, g.arg if g_neg else g)
            return inner if f_neg and g_neg else neg(inner)
    elif op == "pow":
        if _is(g, 1):
            return f
        if _is(g, 0):
            return ONE
        if _is(f, 1):
            return ONE
    return Binary(op, f, g)


def smooth_sqrt(e: Expr) -> Expr:
    """A square root of ``e`` that stays differentiable when ``e`` is an explicit square.

    ``g^2`` maps to ``g`` (the signed root) instead of ``|g|``; any other input
    maps to ``sqrt(e)``.
    """
    e = simplify(e)
    if isinstance(e, Binary) and e.op == "pow" and _is(e.right, 2):
        return e.left
    if isinstance(e, Const) and e.value >= 0:
        return const(math.sqrt(e.value))
    return fn("sqrt", e)
