"""Uniform grids, sampled fields, quadrature, finite differences and an RK4 oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Mapping, NamedTuple

import numpy as np
from scipy.interpolate import CubicSpline

from .expr import Expr, evaluate_array

MAX_INVALID_FRACTION = 0.10


class SamplingError(ValueError):
    pass


class InvalidSamplesError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x_min) and math.isfinite(self.x_max)) or self.x_min >= self.x_max:
            raise ValueError(f"grid needs x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if self.n < 9:
            raise ValueError("grid n must be >= 9")
        if self.n % 2 == 0:
            raise ValueError("grid n must be odd")

    @classmethod
    def parse(cls, text: str) -> Grid:
        """Parse the ``"min:max:n"`` token (surrounding whitespace allowed)."""
        parts = text.strip().split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must look like 'min:max:n', got {text!r}")
        try:
            return cls(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            if "grid" in str(exc):
                raise
            raise ValueError(f"grid must look like 'min:max:n', got {text!r}") from exc

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        x = np.linspace(self.x_min, self.x_max, self.n)
        x.flags.writeable = False
        return x

    def index_of(self, x: float) -> int:
        return int(np.argmin(np.abs(self.x - x)))

    def __str__(self) -> str:
        return f"{self.x_min!r}:{self.x_max!r}:{self.n}"


def _frozen(a, dtype) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Samples:
    """A real field on a grid with a validity mask.

    Arithmetic with another :class:`Samples` requires the identical grid; the
    result's mask is the conjunction of both masks.
    """

    grid: Grid
    values: np.ndarray
    mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        values = _frozen(self.values, float)
        mask = np.ones(values.shape, bool) if self.mask is None else self.mask
        mask = _frozen(mask, bool)
        if values.shape != (self.grid.n,) or mask.shape != (self.grid.n,):
            raise ValueError("values and mask must have one entry per grid point")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> Samples:
        return cls(grid, np.full(grid.n, float(value)))

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def all_valid(self) -> bool:
        return bool(self.mask.all())

    @property
    def invalid_count(self) -> int:
        return int((~self.mask).sum())

    @property
    def masked_fraction(self) -> float:
        return self.invalid_count / self.grid.n

    def max_abs(self) -> float:
        """Sup norm over the valid points."""
        v = self.values[self.mask]
        return float(np.max(np.abs(v))) if v.size else 0.0

    def with_mask(self, mask: np.ndarray) -> Samples:
        return Samples(self.grid, self.values, self.mask & mask)

    def map(self, func) -> Samples:
        with np.errstate(all="ignore"):
            vals = func(self.values)
        return Samples(self.grid, vals, self.mask & np.isfinite(vals))

    def _binary(self, other, op) -> Samples:
        if isinstance(other, Samples):
            if other.grid != self.grid:
                raise ValueError("Samples arithmetic requires identical grids")
            with np.errstate(all="ignore"):
                vals = op(self.values, other.values)
            mask = self.mask & other.mask
        else:
            with np.errstate(all="ignore"):
                vals = op(self.values, float(other))
            mask = self.mask
        return Samples(self.grid, vals, mask & np.isfinite(vals))

    def __add__(self, other):
        return self._binary(other, np.add)

    def __radd__(self, other):
        return self._binary(other, lambda a, b: b + a)

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    def __rmul__(self, other):
        return self._binary(other, lambda a, b: b * a)

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __rtruediv__(self, other):
        return self._binary(other, lambda a, b: b / a)

    def __pow__(self, other):
        return self._binary(other, np.power)

    def __neg__(self):
        return Samples(self.grid, -self.values, self.mask)


def sample(e: Expr, grid: Grid, params: Mapping[str, float] | None = None) -> Samples:
    """Evaluate ``e`` on the grid, masking isolated domain errors.

    Raises :class:`SamplingError` when more than 10% of the points are invalid
    and ``UnboundParameterError`` for a parameter missing from ``params``.
    """
    values, valid = evaluate_array(e, grid.x, params)
    s = Samples(grid, np.where(valid, values, np.nan), valid)
    if s.invalid_count > MAX_INVALID_FRACTION * grid.n:
        raise SamplingError(
            f"{s.invalid_count} of {grid.n} points invalid; profile unusable on grid {grid}"
        )
    return s


# ---------------------------------------------------------------------------
# Quadrature

def _require_valid(s: Samples, what: str) -> None:
    if not s.all_valid:
        bad = np.flatnonzero(~s.mask)
        raise InvalidSamplesError(f"{what}: {bad.size} invalid points (first at x={float(s.x[bad[0]])!r})")


def _single_interval(f: np.ndarray, i: np.ndarray, h: float) -> np.ndarray:
    """Integral over [x_i, x_{i+1}] from the interpolating cubic (quadratic if n < 4)."""
    n = f.size
    if n >= 4:
        # Shift the 4-point window left where it would run off the end.
        start = np.minimum(i - 1, n - 4).clip(0)
        k = i - start  # position of x_i inside the window: 0, 1 or 2
        w = np.array([
            [9.0, 19.0, -5.0, 1.0],
            [-1.0, 13.0, 13.0, -1.0],
            [1.0, -5.0, 19.0, 9.0],
        ]) / 24.0
        win = np.stack([f[start + q] for q in range(4)], axis=-1)
        return h * np.einsum("ij,ij->i", w[k], win)
    start = np.minimum(i, n - 3)
    k = i - start
    w = np.array([[5.0, 8.0, -1.0], [-1.0, 8.0, 5.0]]) / 12.0
    win = np.stack([f[start + q] for q in range(3)], axis=-1)
    return h * np.einsum("ij,ij->i", w[k], win)


def _cumulative_forward(f: np.ndarray, h: float) -> np.ndarray:
    """F[j] = integral from point 0 to point j for a 1D array ``f`` (len >= 3)."""
    n = f.size
    F = np.zeros(n)
    # Simpson on consecutive pairs gives even offsets.
    pairs = (n - 1) // 2
    if pairs:
        panel = h / 3.0 * (f[0:2 * pairs:2] + 4.0 * f[1:2 * pairs:2] + f[2:2 * pairs + 1:2])
        F[2:2 * pairs + 1:2] = np.cumsum(panel)
    # Odd offsets: even neighbour plus one interval of the local cubic.  A
    # quadratic here would leave an O(h^4) odd/even sawtooth that second
    # differences amplify by 1/h^2.
    odd = np.arange(1, n, 2)
    F[odd] = F[odd - 1] + _single_interval(f, odd - 1, h)
    return F


def cumulative_integral(s: Samples, base_index: int = 0) -> Samples:
    """Running integral F(x_i) = int_{x_base}^{x_i} s dx.

    Simpson's rule on interval pairs counted from the base point; odd offsets
    add one interval of the local four-point cubic.  Fourth order globally,
    with an error that varies smoothly from point to point.  ``F`` is exactly
    zero at the base point.
    """
    _require_valid(s, "cumulative_integral")
    n = s.grid.n
    if not 0 <= base_index < n:
        raise IndexError(f"base_index {base_index} outside grid of {n} points")
    f = s.values
    h = s.grid.h
    F = np.zeros(n)
    right = f[base_index:]
    if right.size >= 3:
        F[base_index:] = _cumulative_forward(right, h)
    elif right.size == 2:
        F[n - 1] = _single_interval(f, np.array([n - 2]), h)[0]
    left = f[: base_index + 1][::-1]
    if left.size >= 3:
        F[: base_index + 1] = -_cumulative_forward(left, h)[::-1]
    elif left.size == 2:
        F[0] = -_single_interval(f, np.array([0]), h)[0]
    F[base_index] = 0.0
    return Samples(s.grid, F)


def definite_integral(s: Samples) -> float:
    """Integral of ``s`` over the whole grid."""
    return float(cumulative_integral(s).values[-1])


# ---------------------------------------------------------------------------
# Finite differences (fourth order everywhere)

_D1_CENTRAL = np.array([1.0, -8.0, 0.0, 8.0, -1.0]) / 12.0
_D1_EDGE = (
    np.array([-25.0, 48.0, -36.0, 16.0, -3.0]) / 12.0,
    np.array([-3.0, -10.0, 18.0, -6.0, 1.0]) / 12.0,
)
_D2_CENTRAL = np.array([-1.0, 16.0, -30.0, 16.0, -1.0]) / 12.0
_D2_EDGE = (
    np.array([45.0, -154.0, 214.0, -156.0, 61.0, -10.0]) / 12.0,
    np.array([10.0, -15.0, -4.0, 14.0, -6.0, 1.0]) / 12.0,
)


def _stencil_apply(v: np.ndarray, valid: np.ndarray, central, edges, odd_symmetry: bool):
    n = v.size
    out = np.zeros(n)
    ok = np.zeros(n, dtype=bool)
    w = valid.astype(float)
    # Stencil weights sum to zero, so they act on differences from the centre
    # point: same value, less cancellation, and exactly zero on constants.
    # Interior: points 2 .. n-3.
    centre = v[2:n - 2]
    acc = np.zeros(n - 4)
    cnt = np.zeros(n - 4)
    for k, c in enumerate(central):
        acc += c * (v[k:n - 4 + k] - centre)
        cnt += w[k:n - 4 + k]
    out[2:n - 2] = acc
    ok[2:n - 2] = cnt == len(central)
    sign = -1.0 if odd_symmetry else 1.0
    for idx, coeffs in enumerate(edges):
        m = len(coeffs)
        out[idx] = coeffs @ (v[:m] - v[idx])
        ok[idx] = valid[:m].all()
        tail = v[::-1][:m]
        out[n - 1 - idx] = sign * (coeffs @ (tail - tail[idx]))
        ok[n - 1 - idx] = valid[::-1][:m].all()
    return out, ok


def derivative_fd(s: Samples, order: int = 1) -> Samples:
    """First or second derivative with fourth-order stencils.

    Central five-point stencils inside, one-sided fourth-order stencils at the
    two outermost points of each edge.  A point is valid only when every
    stencil point it uses is valid.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if s.grid.n < 9:
        raise ValueError("grid too small for the stencil (n < 9)")
    v = np.where(s.mask, s.values, 0.0)
    h = s.grid.h
    if order == 1:
        out, ok = _stencil_apply(v, s.mask, _D1_CENTRAL, _D1_EDGE, odd_symmetry=True)
        out /= h
    else:
        out, ok = _stencil_apply(v, s.mask, _D2_CENTRAL, _D2_EDGE, odd_symmetry=False)
        out /= h * h
    return Samples(s.grid, np.where(ok, out, np.nan), ok)


# ---------------------------------------------------------------------------
# Runge-Kutta oracle

OVERFLOW_LIMIT = 1e300


class OracleSolution(NamedTuple):
    psi: Samples
    dpsi: Samples
    diverged: bool
    last_valid: int


def ode_oracle(
    m: Samples,
    V: Samples,
    E: float,
    hbar: float,
    psi0: float,
    dpsi0: float,
    substeps: int = 10,
) -> OracleSolution:
    """Integrate psi'' - (ln m)' psi' + (2m/hbar^2)(E - V) psi = 0 from the left edge.

    Classical RK4 on (psi, psi') with ``substeps`` steps per grid interval.
    The coefficients are cubic splines through the sampled m, V and a
    finite-difference (ln m)'.  Nothing from any analytic construction is used
    apart from the initial data.
    """
    _require_valid(m, "ode_oracle mass")
    _require_valid(V, "ode_oracle potential")
    if np.any(m.values <= 0):
        raise ValueError("ode_oracle needs m > 0 everywhere")
    grid = m.grid
    x = grid.x
    dlnm = derivative_fd(m.map(np.log), 1).values
    k_coef = 2.0 * m.values * (E - V.values) / hbar ** 2

    # Coefficients at every RK4 stage abscissa: spacing (h / substeps) / 2.
    n_fine = 2 * substeps * (grid.n - 1) + 1
    xf = np.linspace(grid.x_min, grid.x_max, n_fine)
    b_f = CubicSpline(x, dlnm)(xf).tolist()
    k_f = CubicSpline(x, k_coef)(xf).tolist()

    step = grid.h / substeps
    half = 0.5 * step
    psi = np.full(grid.n, np.nan)
    dpsi = np.full(grid.n, np.nan)
    y, z = float(psi0), float(dpsi0)
    psi[0], dpsi[0] = y, z
    last_valid = grid.n - 1
    diverged = False
    j = 0
    for i in range(1, grid.n):
        for _ in range(substeps):
            b0, k0 = b_f[j], k_f[j]
            b1, k1 = b_f[j + 1], k_f[j + 1]
            b2, k2 = b_f[j + 2], k_f[j + 2]
            # y' = z,  z' = b z - k y
            ky1 = z
            kz1 = b0 * z - k0 * y
            yz, zz = y + half * ky1, z + half * kz1
            ky2 = zz
            kz2 = b1 * zz - k1 * yz
            yz, zz = y + half * ky2, z + half * kz2
            ky3 = zz
            kz3 = b1 * zz - k1 * yz
            yz, zz = y + step * ky3, z + step * kz3
            ky4 = zz
            kz4 = b2 * zz - k2 * yz
            y += step / 6.0 * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4)
            z += step / 6.0 * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4)
            j += 2
        if not (abs(y) <= OVERFLOW_LIMIT and abs(z) <= OVERFLOW_LIMIT):
            diverged = True
            last_valid = i - 1
            break
        psi[i], dpsi[i] = y, z
    valid = np.isfinite(psi)
    return OracleSolution(
        Samples(grid, psi, valid), Samples(grid, dpsi, valid), diverged, last_valid
    )
