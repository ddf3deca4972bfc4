"""Expression tree nodes and the canonical printer."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

FUNCTIONS = (
    "neg", "exp", "ln", "sqrt", "abs", "sin", "cos", "tan",
    "sinh", "cosh", "tanh", "sech",
)
# `neg` is an internal node; it is written as a leading minus, never by name.
CALLABLE_FUNCTIONS = frozenset(FUNCTIONS) - {"neg"}
BINARY_OPS = ("add", "sub", "mul", "div", "pow")
VARIABLE = "x"


@dataclass(frozen=True)
class Const:
    value: float

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Var:
    def __str__(self) -> str:
        return VARIABLE


@dataclass(frozen=True)
class Param:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Unary:
    fn: str
    arg: Expr

    def __post_init__(self) -> None:
        if self.fn not in FUNCTIONS:
            raise ValueError(f"unknown function {self.fn!r}")

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True)
class Binary:
    op: str
    left: Expr
    right: Expr

    def __post_init__(self) -> None:
        if self.op not in BINARY_OPS:
            raise ValueError(f"unknown operator {self.op!r}")

    def __str__(self) -> str:
        return to_text(self)


Expr = Union[Const, Var, Param, Unary, Binary]

X = Var()


def const(value: float) -> Const:
    return Const(float(value))


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    yield e
    if isinstance(e, Unary):
        yield from walk(e.arg)
    elif isinstance(e, Binary):
        yield from walk(e.left)
        yield from walk(e.right)


def parameters(e: Expr) -> frozenset[str]:
    return frozenset(n.name for n in walk(e) if isinstance(n, Param))


def depends_on_x(e: Expr) -> bool:
    return any(isinstance(n, Var) for n in walk(e))


def depth(e: Expr) -> int:
    if isinstance(e, Unary):
        return 1 + depth(e.arg)
    if isinstance(e, Binary):
        return 1 + max(depth(e.left), depth(e.right))
    return 1


# Small constructors used by calculus and the family builders.
def add(a: Expr, b: Expr) -> Binary:
    return Binary("add", a, b)


def sub(a: Expr, b: Expr) -> Binary:
    return Binary("sub", a, b)


def mul(a: Expr, b: Expr) -> Binary:
    return Binary("mul", a, b)


def div(a: Expr, b: Expr) -> Binary:
    return Binary("div", a, b)


def pow_(a: Expr, b: Expr) -> Binary:
    return Binary("pow", a, b)


def fn(name: str, a: Expr) -> Unary:
    return Unary(name, a)


def neg(a: Expr) -> Unary:
    return Unary("neg", a)


# ---------------------------------------------------------------------------
# Printer
#
# Precedence levels mirror the parser: additive 1, multiplicative 2,
# unary minus 3, power 4, atoms 5.  The output re-parses to the same tree for
# any simplify-normalized expression.

_SYMBOL = {"add": "+", "sub": "-", "mul": "*", "div": "/", "pow": "^"}
_PREC = {"add": 1, "sub": 1, "mul": 2, "div": 2}


def format_number(value: float) -> str:
    if math.isfinite(value) and value.is_integer() and abs(value) < 1e16:
        return str(int(value)) if value != 0 else ("-0" if math.copysign(1, value) < 0 else "0")
    return repr(value)


def _prec(e: Expr) -> int:
    if isinstance(e, Binary):
        return 4 if e.op == "pow" else _PREC[e.op]
    if isinstance(e, Unary) and e.fn == "neg":
        return 3
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1, e.value) < 0):
        # Prints with a leading minus, so it binds like a negation.
        return 3
    return 5


def _wrap(e: Expr, needed: int) -> str:
    text = to_text(e)
    return f"({text})" if _prec(e) < needed else text


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        return format_number(e.value)
    if isinstance(e, Var):
        return VARIABLE
    if isinstance(e, Param):
        return e.name
    if isinstance(e, Unary):
        if e.fn == "neg":
            inner = e.arg
            # "-2" would re-parse as a literal; "-x^2" is fine (power binds tighter).
            if isinstance(inner, Const) or _prec(inner) < 4:
                return f"-({to_text(inner)})"
            return "-" + to_text(inner)
        return f"{e.fn}({to_text(e.arg)})"
    if e.op == "pow":
        base = _wrap(e.left, 5)
        # Exponent is a `factor` in the grammar: a leading minus is allowed.
        expo = _wrap(e.right, 3)
        return f"{base}^{expo}"
    p = _PREC[e.op]
    left = _wrap(e.left, p)
    # Equal precedence on the right is parenthesized so the tree shape
    # (not just its value) survives a print/parse round trip.
    right = _wrap(e.right, p + 1)
    if e.op in ("add", "sub"):
        return f"{left} {_SYMBOL[e.op]} {right}"
    return f"{left}{_SYMBOL[e.op]}{right}"
