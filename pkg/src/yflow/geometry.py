"""
Radial calculus on hyperbolic space.

Rotationally symmetric functions on H^m are sampled on a uniform grid in the
geodesic radius r.  In these coordinates the metric is dr^2 + sinh(r)^2 g_S,
so for a radial function f

    Laplace-Beltrami:  f'' + (m-1) coth(r) f'
    |grad f|^2:        (f')^2
    volume element:    sinh(r)^(m-1) dr dS

Every operator here is a second-order finite-difference or trapezoid rule.
At the origin radial fields are treated as even functions of r, which gives
f'(0) = 0 and Laplacian(f)(0) = m f''(0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Union

import numpy as np

from .errors import ConfigurationError, DomainError

MIN_INTERVALS = 8


@dataclass(frozen=True)
class Dimension:
    """Ambient dimension m >= 3 of H^m together with eta = (m-2)/4."""

    m: int

    def __post_init__(self):
        if isinstance(self.m, bool) or int(self.m) != self.m:
            raise ConfigurationError(f"dimension must be an integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        if self.m < 3:
            raise ConfigurationError(f"dimension must satisfy m >= 3, got {self.m}")

    @property
    def eta_exact(self) -> Fraction:
        return Fraction(self.m - 2, 4)

    @property
    def eta(self) -> float:
        return (self.m - 2) / 4

    @property
    def scalar_curvature_hyperbolic(self) -> float:
        """R of g_H, i.e. -m(m-1)."""
        return -float(self.m * (self.m - 1))

    @classmethod
    def of(cls, dim: "DimLike") -> "Dimension":
        return dim if isinstance(dim, Dimension) else cls(dim)


DimLike = Union[Dimension, int]


@dataclass(frozen=True)
class RadialGrid:
    """Uniform grid r_i = i*h, i = 0..n on [0, r_max]."""

    r_max: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < MIN_INTERVALS:
            raise ConfigurationError(
                f"grid needs at least {MIN_INTERVALS} intervals, got n={self.n}"
            )
        if not (np.isfinite(self.r_max) and self.r_max > 0):
            raise ConfigurationError(f"r_max must be positive, got {self.r_max}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "r_max", float(self.r_max))
        nodes = self.h * np.arange(self.n + 1)
        nodes[-1] = self.r_max
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @classmethod
    def with_spacing(cls, r_max: float, h: float) -> "RadialGrid":
        """Grid on [0, r_max] whose spacing is h (r_max must be a multiple of h)."""
        n = int(round(r_max / h))
        if n <= 0 or not math.isclose(n * h, r_max, rel_tol=1e-9, abs_tol=1e-12):
            raise ConfigurationError(f"r_max={r_max} is not a multiple of h={h}")
        return cls(r_max, n)

    @property
    def h(self) -> float:
        return self.r_max / self.n

    @property
    def size(self) -> int:
        return self.n + 1

    def index_of(self, r: float) -> int:
        """Index of the node located at radius r (must be a node up to 1e-9 h)."""
        i = int(round(r / self.h))
        if i < 0 or i > self.n or abs(self.nodes[i] - r) > 1e-9 * self.h:
            raise ConfigurationError(f"radius {r} is not a node of the grid (h={self.h})")
        return i

    def restrict(self, r_max: float) -> "RadialGrid":
        """Sub-grid [0, r_max] with the same spacing."""
        return RadialGrid(r_max, self.index_of(r_max))

    def sample(self, func: Callable[[np.ndarray], np.ndarray]) -> "RadialField":
        values = np.broadcast_to(np.asarray(func(self.nodes), dtype=float), (self.size,))
        return RadialField(self, values)

    def constant(self, value: float) -> "RadialField":
        return RadialField(self, np.full(self.size, float(value)))


@dataclass(frozen=True)
class RadialField:
    """Values of a radial function at every node of ``grid``."""

    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (self.grid.size,):
            raise ConfigurationError(
                f"field has {values.shape} values, grid has {self.grid.size} nodes"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("field contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def r(self) -> np.ndarray:
        return self.grid.nodes

    def with_values(self, values: np.ndarray) -> "RadialField":
        return RadialField(self.grid, values)

    def restrict(self, r_max: float) -> "RadialField":
        sub = self.grid.restrict(r_max)
        return RadialField(sub, self.values[: sub.size])

    def __len__(self) -> int:
        return self.values.size


def _second_derivative(f: np.ndarray, h: float) -> np.ndarray:
    d2 = np.empty_like(f)
    d2[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / h**2
    d2[0] = 2.0 * (f[1] - f[0]) / h**2
    d2[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / h**2
    return d2


def _first_derivative(f: np.ndarray, h: float) -> np.ndarray:
    d1 = np.empty_like(f)
    d1[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    d1[0] = 0.0
    d1[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return d1


def laplacian_values(values: np.ndarray, grid: RadialGrid, dim: DimLike) -> np.ndarray:
    """Array version of :func:`laplacian_radial` (no field wrapping)."""
    m = Dimension.of(dim).m
    f = np.asarray(values, dtype=float)
    d2 = _second_derivative(f, grid.h)
    d1 = _first_derivative(f, grid.h)
    lap = d2.copy()
    lap[1:] += (m - 1) * d1[1:] / np.tanh(grid.nodes[1:])
    lap[0] = m * d2[0]
    return lap


def gradient_values(values: np.ndarray, grid: RadialGrid) -> np.ndarray:
    """Array version of :func:`gradient_radial`."""
    return _first_derivative(np.asarray(values, dtype=float), grid.h)


def laplacian_radial(f: RadialField, dim: DimLike) -> RadialField:
    """Hyperbolic Laplace-Beltrami operator of a radial field.

    Central differences in the interior, m f''(0) from the even extension at
    the origin and one-sided second-order stencils at r_max.
    """
    return f.with_values(laplacian_values(f.values, f.grid, dim))


def gradient_radial(f: RadialField) -> RadialField:
    """Radial derivative f' (so |grad f|^2 = f'^2); zero at the origin."""
    return f.with_values(gradient_values(f.values, f.grid))


def sphere_area(k: int) -> float:
    """Surface area of the unit k-sphere in R^(k+1)."""
    return 2.0 * math.pi ** ((k + 1) / 2) / math.gamma((k + 1) / 2)


def volume_density(grid: RadialGrid, dim: DimLike) -> np.ndarray:
    """omega_{m-1} sinh(r)^(m-1) at every node."""
    m = Dimension.of(dim).m
    return sphere_area(m - 1) * np.sinh(grid.nodes) ** (m - 1)


def trapezoid_between(r: np.ndarray, g: np.ndarray, r_lo: float, r_hi: float) -> float:
    """Trapezoid rule for samples g(r) over [r_lo, r_hi], interpolating the ends."""
    inner = (r > r_lo) & (r < r_hi)
    xs = np.concatenate(([r_lo], r[inner], [r_hi]))
    ys = np.concatenate(([np.interp(r_lo, r, g)], g[inner], [np.interp(r_hi, r, g)]))
    return float(np.sum(0.5 * (ys[1:] + ys[:-1]) * np.diff(xs)))


def integrate_radial(
    f: RadialField, dim: DimLike, r_lo: float = 0.0, r_hi: float | None = None
) -> float:
    """Integral of f over the shell r_lo < r < r_hi with the hyperbolic measure."""
    grid = f.grid
    if r_hi is None:
        r_hi = grid.r_max
    tol = 1e-12 * grid.r_max
    if not (0.0 <= r_lo < r_hi <= grid.r_max + tol):
        raise DomainError(
            f"integration interval [{r_lo}, {r_hi}] not inside [0, {grid.r_max}]"
        )
    r_hi = min(r_hi, grid.r_max)
    return trapezoid_between(grid.nodes, f.values * volume_density(grid, dim), r_lo, r_hi)
