"""Built-in mass profiles and default generating functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .expr import Expr, parse


@dataclass(frozen=True)
class MassProfile:
    name: str
    text: str
    defaults: Mapping[str, float]
    ranges: Mapping[str, str]
    description: str
    expr: Expr = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "expr", parse(self.text))

    def params(self, overrides: Mapping[str, float] | None = None) -> dict[str, float]:
        out = dict(self.defaults)
        out.update({k: v for k, v in (overrides or {}).items() if k in self.defaults})
        return out


# Every entry is strictly positive on any finite grid for the stated ranges.
CATALOG: dict[str, MassProfile] = {
    p.name: p
    for p in (
        MassProfile("const", "m0", {"m0": 1.0}, {"m0": "> 0"}, "constant mass"),
        MassProfile("sech2", "m0*sech(w*x)^2", {"m0": 1.0, "w": 1.0},
                    {"m0": "> 0", "w": "> 0"}, "hyperbolic-secant-squared well"),
        MassProfile("exp", "m0*exp(lam*x)", {"m0": 1.0, "lam": 0.5},
                    {"m0": "> 0", "lam": "real"}, "exponential profile"),
        MassProfile("gauss", "m0*(1 + A*exp(-x^2))", {"m0": 1.0, "A": 1.0},
                    {"m0": "> 0", "A": "> -1"}, "Gaussian bump on a constant background"),
        MassProfile("rational", "m0/(1 + x^2)", {"m0": 1.0}, {"m0": "> 0"},
                    "Lorentzian (rational) profile"),
    )
}


def resolve_mass(text: str, overrides: Mapping[str, float] | None = None) -> tuple[Expr, dict[str, float]]:
    """Expression and parameter bindings for ``@name`` shorthands or raw text."""
    overrides = dict(overrides or {})
    if text.startswith("@"):
        name = text[1:]
        if name not in CATALOG:
            raise KeyError(f"unknown catalog mass {text!r}; choose from {', '.join('@' + n for n in CATALOG)}")
        profile = CATALOG[name]
        params = profile.params()
        params.update(overrides)
        return profile.expr, params
    return parse(text), overrides


# Generating functions used when a family needs f(x) and none is given.
DEFAULT_F = {
    "theorem4": "1 + 0.5*sech(x)^2",
    "theorem5": "1",
    "theorem6": "tanh(x)",
    "theorem7": "1",
}
THEOREM7_F_CHOICES = ("1", "2 + tanh(x)", "1 + 0.5*sech(x)^2")
THEOREM7_DEFAULT_V = "E + 0.1*sech(x)^2"
