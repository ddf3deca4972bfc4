"""Numeric evaluation of expression trees.

Evaluation is vectorized over numpy arrays.  Domain violations (log of a
non-positive number, square root of a negative, division by zero, a negative
base under a non-integer power, overflow) never leak out as NaN: the scalar
entry point raises :class:`DomainError` naming the innermost offending node,
while :func:`evaluate_array` reports a per-point validity mask.
"""

from __future__ import annotations

from typing import Callable, Mapping

import numpy as np

from .nodes import Binary, Const, Expr, Param, Unary, Var, to_text


class UnboundParameterError(KeyError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound parameter {name!r}")

    def __str__(self) -> str:
        return self.args[0]


class DomainError(ArithmeticError):
    def __init__(self, node: Expr, x: float | None = None):
        self.node = node
        self.x = x
        where = "" if x is None else f" at x={x!r}"
        super().__init__(f"domain error in {to_text(node)}{where}")


def _sech(a: np.ndarray) -> np.ndarray:
    # 1/cosh overflows to inf for |a| > ~710; the true value underflows to 0.
    with np.errstate(over="ignore"):
        return 1.0 / np.cosh(a)


_UNARY: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "neg": np.negative,
    "exp": np.exp,
    "ln": np.log,
    "sqrt": np.sqrt,
    "abs": np.abs,
    "sin": np.sin,
    "cos": np.cos,
    "tan": np.tan,
    "sinh": np.sinh,
    "cosh": np.cosh,
    "tanh": np.tanh,
    "sech": _sech,
}


def _unary_domain(name: str, a: np.ndarray) -> np.ndarray:
    if name == "ln":
        return a <= 0
    if name == "sqrt":
        return a < 0
    return np.zeros(a.shape, dtype=bool)


def _binary(op: str, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if op == "add":
        return a + b, np.zeros(np.broadcast(a, b).shape, dtype=bool)
    if op == "sub":
        return a - b, np.zeros(np.broadcast(a, b).shape, dtype=bool)
    if op == "mul":
        return a * b, np.zeros(np.broadcast(a, b).shape, dtype=bool)
    if op == "div":
        bad = np.broadcast_to(b == 0, np.broadcast(a, b).shape)
        safe = np.where(b == 0, 1.0, b)
        return a / safe, bad.copy()
    # pow
    shape = np.broadcast(a, b).shape
    a_b = np.broadcast_to(a, shape)
    b_b = np.broadcast_to(b, shape)
    non_integer = b_b != np.round(b_b)
    bad = ((a_b < 0) & non_integer) | ((a_b == 0) & (b_b < 0))
    base = np.where(bad, 1.0, a_b)
    return np.power(base, b_b), bad


OnDomainError = Callable[[Expr, np.ndarray], None]


def _eval(e: Expr, x: np.ndarray, params: Mapping[str, float], on_error: OnDomainError) -> tuple[np.ndarray, np.ndarray]:
    """Returns (values, bad) with bad points already replaced by harmless values."""
    if isinstance(e, Const):
        return np.full(x.shape, e.value), np.zeros(x.shape, dtype=bool)
    if isinstance(e, Var):
        return x.copy(), np.zeros(x.shape, dtype=bool)
    if isinstance(e, Param):
        if e.name not in params:
            raise UnboundParameterError(e.name)
        return np.full(x.shape, float(params[e.name])), np.zeros(x.shape, dtype=bool)
    if isinstance(e, Unary):
        a, bad_a = _eval(e.arg, x, params, on_error)
        new_bad = _unary_domain(e.fn, a) & ~bad_a
        arg = np.where(new_bad, 1.0, a)
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            vals = _UNARY[e.fn](arg)
        new_bad |= ~np.isfinite(vals) & ~bad_a
        if new_bad.any():
            on_error(e, new_bad)
        bad = bad_a | new_bad
        return np.where(bad, 0.0, vals), bad
    assert isinstance(e, Binary)
    a, bad_a = _eval(e.left, x, params, on_error)
    b, bad_b = _eval(e.right, x, params, on_error)
    prior = bad_a | bad_b
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        vals, new_bad = _binary(e.op, a, b)
    new_bad = (new_bad | ~np.isfinite(vals)) & ~prior
    if new_bad.any():
        on_error(e, new_bad)
    bad = prior | new_bad
    return np.where(bad, 0.0, vals), bad


def evaluate_array(e: Expr, x, params: Mapping[str, float] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate ``e`` at every point of ``x``.

    Returns ``(values, valid)``; invalid points hold NaN in ``values``.
    """
    x = np.asarray(x, dtype=float)
    vals, bad = _eval(e, x, params or {}, lambda node, mask: None)
    vals = np.where(bad, np.nan, vals)
    return vals, ~bad


def evaluate(e: Expr, x: float, params: Mapping[str, float] | None = None) -> float:
    """IEEE-double value of ``e`` at ``x``; raises :class:`DomainError`."""

    def raise_domain(node: Expr, mask: np.ndarray) -> None:
        raise DomainError(node, float(x))

    vals, _ = _eval(e, np.asarray([float(x)]), params or {}, raise_domain)
    return float(vals[0])
