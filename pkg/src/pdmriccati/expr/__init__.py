"""Closed-form expressions in one variable ``x`` with late-bound parameters."""

from .calculus import differentiate, simplify, smooth_sqrt
from .evaluate import DomainError, UnboundParameterError, evaluate, evaluate_array
from .nodes import (
    Binary, Const, Expr, Param, Unary, Var, X, add, const, depends_on_x, div,
    fn, mul, neg, parameters, pow_, sub, to_text, walk,
)
from .parser import ExprSyntaxError, UnknownFunctionError, parse

__all__ = [
    "Binary", "Const", "DomainError", "Expr", "ExprSyntaxError", "Param",
    "UnboundParameterError", "Unary", "UnknownFunctionError", "Var", "X",
    "add", "const", "depends_on_x", "differentiate", "div", "evaluate",
    "evaluate_array", "fn", "mul", "neg", "parameters", "parse", "pow_",
    "simplify", "smooth_sqrt", "sub", "to_text", "walk",
]
