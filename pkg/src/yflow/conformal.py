"""
Conformal factors of metrics g = u g_H.

The flow is written in three equivalent unknowns: the factor u itself, the
power U = u**eta with eta = (m-2)/4, and the pressure v = 1/u.  Positivity of
the input is checked everywhere; a nonpositive node raises ``DomainError``.
"""

from __future__ import annotations

import numpy as np

from .errors import DomainError
from .geometry import DimLike, Dimension, RadialField, RadialGrid, laplacian_values

# Type aliases: positivity is a runtime invariant, not a separate class.
ConformalFactor = RadialField
Pressure = RadialField


def require_positive(values: np.ndarray, what: str = "conformal factor") -> None:
    bad = np.flatnonzero(~(np.asarray(values) > 0))
    if bad.size:
        i = int(bad[0])
        raise DomainError(f"{what} must be positive; node {i} has value {values[i]!r}")


def to_U(u: ConformalFactor, dim: DimLike) -> RadialField:
    require_positive(u.values)
    return u.with_values(u.values ** Dimension.of(dim).eta)


def from_U(U: RadialField, dim: DimLike) -> ConformalFactor:
    require_positive(U.values, "U")
    return U.with_values(U.values ** (1.0 / Dimension.of(dim).eta))


def pressure(u: ConformalFactor) -> Pressure:
    """v = 1/u.  Also maps a pressure back to its factor."""
    require_positive(u.values)
    return u.with_values(1.0 / u.values)


def scalar_curvature_values(u: np.ndarray, grid: RadialGrid, dim: DimLike) -> np.ndarray:
    dim = Dimension.of(dim)
    m = dim.m
    U = u**dim.eta
    lap_U = laplacian_values(U, grid, dim)
    bracket = dim.scalar_curvature_hyperbolic * U - 4.0 * (m - 1) / (m - 2) * lap_U
    return U ** (-(m + 2) / (m - 2)) * bracket


def scalar_curvature(u: ConformalFactor, dim: DimLike) -> RadialField:
    """Scalar curvature of u g_H, computed through U = u**eta.

    R = U^(-(m+2)/(m-2)) * (-m(m-1) U - 4 (m-1)/(m-2) Laplacian(U)).
    """
    require_positive(u.values)
    return u.with_values(scalar_curvature_values(u.values, u.grid, dim))


def euclidean_factor_values(r: np.ndarray) -> np.ndarray:
    return np.cosh(np.asarray(r, dtype=float) / 2.0) ** -4 / 4.0


def euclidean_factor(grid: RadialGrid) -> ConformalFactor:
    """Factor of the flat metric in the Poincare ball: g_E = sech(r/2)^4 / 4 * g_H."""
    return RadialField(grid, euclidean_factor_values(grid.nodes))
