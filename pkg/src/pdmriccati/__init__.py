"""Exact solutions of the 1D position-dependent-mass Schrodinger equation.

The equation psi'' - (ln m)' psi' + (2m/hbar^2)(E - V) psi = 0 is mapped by
psi = psi0 exp(int u) to the Riccati equation u' = a + b u - u^2.  Each
solution family fixes a particular solution u_p, forces the potential (or the
mass) through the resulting consistency condition, and recovers the general
solution by quadrature.
"""

from .core import (
    ConstructionError, DivergedError, OrderingParams, PhysicalSetup, RiccatiCoefficients,
    SolutionBundle, effective_potential_Uk, logderivative, ordering_vanishes,
    riccati_coefficients, riccati_residual, schrodinger_residual,
    wavefunction_from_logderivative,
)
from .families import (
    FAMILIES, Case1, Case2, Case3, Case4a, Case4b, Theorem4, Theorem5, Theorem6,
    Theorem7, bernoulli_general, build, consistency_from_particular,
)
from .numerics import (
    Grid, Samples, cumulative_integral, definite_integral, derivative_fd, ode_oracle, sample,
)
from .verify import (
    Tolerances, VerificationReport, energy_dependent_norm, printed_formula_crosscheck,
    sweep, verify_bundle,
)

__version__ = "0.1.0"

__all__ = [
    "Case1", "Case2", "Case3", "Case4a", "Case4b", "ConstructionError", "DivergedError",
    "FAMILIES", "Grid", "OrderingParams", "PhysicalSetup", "RiccatiCoefficients", "Samples",
    "SolutionBundle", "Theorem4", "Theorem5", "Theorem6", "Theorem7", "Tolerances",
    "VerificationReport", "bernoulli_general", "build", "consistency_from_particular",
    "cumulative_integral", "definite_integral", "derivative_fd", "effective_potential_Uk",
    "energy_dependent_norm", "logderivative", "ode_oracle", "ordering_vanishes",
    "printed_formula_crosscheck", "riccati_coefficients", "riccati_residual", "sample",
    "schrodinger_residual", "sweep", "verify_bundle", "wavefunction_from_logderivative",
]
