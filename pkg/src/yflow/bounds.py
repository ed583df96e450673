"""
Closed-form barriers, constants and integral functionals for the flow.

These are oracles: each ``*_check`` returns a worst-case violation, which is
<= 0 (or <= a stated discretisation tolerance) whenever the corresponding
estimate holds.  Trajectory checks take the output of
:func:`yflow.solver.solve_dirichlet`.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .conformal import require_positive
from .errors import (
    ConfigurationError,
    ExtinctionError,
    FatalInstabilityError,
    NumericalError,
    PreconditionError,
)
from .geometry import (
    DimLike,
    Dimension,
    RadialField,
    RadialGrid,
    integrate_radial,
    laplacian_values,
    trapezoid_between,
    volume_density,
)
from .solver import MAX_HALVINGS, DirichletProblem, Trajectory, smoothstep, solve_dirichlet

# ---------------------------------------------------------------------------
# profile inequality for f(r) = (1 - r^2)^2
# ---------------------------------------------------------------------------


def profile(r: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """f = (1-r^2)^2 with f' = -4r(1-r^2) and f'' = -4 + 12 r^2."""
    r = np.asarray(r, dtype=float)
    one = 1.0 - r * r
    return one * one, -4.0 * r * one, -4.0 + 12.0 * r * r


def lemma3_lambda(a: float, c: float) -> float:
    """Smallest lambda with f'' + (c/r) f' >= -lambda f^(1+a) on ]0, 1[.

    Writing the left side as y(1/(1-r^2)) f^(1+a) with
    y(x) = 8 x^(2+2a) - 4(3+c) x^(1+2a), lambda is -min_{x>=1} y.  The only
    critical point of y is x* = (3+c)(1+2a) / (4(1+a)).
    """
    if not (a > 0 and c > 0):
        raise ConfigurationError(f"a and c must be positive, got a={a}, c={c}")
    x_star = (3.0 + c) * (1.0 + 2.0 * a) / (4.0 * (1.0 + a))
    if x_star <= 1.0:
        return 4.0 * (1.0 + c)
    return x_star ** (1.0 + 2.0 * a) * (4.0 * (3.0 + c) - 8.0 * x_star)


def lemma3_check(a: float, c: float, lam: float, n_nodes: int = 10_000) -> float:
    """max over r in ]0,1[ of -lam f^(1+a) - f'' - (c/r) f' (<= 0 when lam is admissible)."""
    r = np.linspace(0.0, 1.0, n_nodes + 2)[1:-1]
    f, df, d2f = profile(r)
    return float(np.max(-lam * f ** (1.0 + a) - d2f - (c / r) * df))


# ---------------------------------------------------------------------------
# radial subsolution of the fast diffusion inequality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubsolutionParams:
    """Barrier V(r, t) = (h0^a - C t)^(1/a) (1 - r^2)^2 on the unit ball.

    C = a b lam / (a + 1) and the barrier expires at t0 = h0^a / C.
    """

    a: float
    b: float
    c: float
    h0: float
    lam: float

    def __post_init__(self):
        for name in ("a", "b", "c", "h0", "lam"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive", path=name)
        floor = lemma3_lambda(self.a, self.c)
        if self.lam < floor * (1.0 - 1e-12):
            raise ConfigurationError(
                f"lam={self.lam} is below the admissible minimum {floor}", path="lam"
            )

    @property
    def C(self) -> float:
        return self.a * self.b * self.lam / (self.a + 1.0)

    @property
    def t0(self) -> float:
        return self.h0**self.a / self.C

    @classmethod
    def for_dimension(cls, dim: DimLike, h0: float) -> "SubsolutionParams":
        """Parameters that turn V into a barrier for U = u^eta."""
        dim = Dimension.of(dim)
        eta, m = dim.eta, dim.m
        a = 1.0 / eta
        c = (m - 1) / math.tanh(1.0)
        return cls(a=a, b=(m - 1) * (eta + 1.0) / eta, c=c, h0=h0, lam=lemma3_lambda(a, c))

    def height(self, t: float) -> float:
        if not 0 <= t < self.t0:
            raise ExtinctionError(f"barrier expired: t={t} not in [0, t0={self.t0})")
        return (self.h0**self.a - self.C * t) ** (1.0 / self.a)


def subsolution_values(params: SubsolutionParams, r: np.ndarray, t: float) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    f = profile(r)[0]
    return np.where(r < 1.0, params.height(t) * f, 0.0)


def subsolution_V(params: SubsolutionParams, grid: RadialGrid, t: float) -> RadialField:
    """Barrier sampled on ``grid``; zero outside the unit ball."""
    return RadialField(grid, subsolution_values(params, grid.nodes, t))


def subsolution_inequality_check(
    params: SubsolutionParams,
    grid: RadialGrid,
    times: Sequence[float],
    dim: DimLike,
) -> float:
    """max over nodes and times of d/dt V^(1+a) - b Laplacian(V) on the unit ball.

    The time derivative is exact; the Laplacian is the grid operator, so the
    result is <= O(h^2).
    """
    if grid.r_max > 1.0 + 1e-12:
        grid = grid.restrict(1.0)
    f = profile(grid.nodes)[0]
    lap_f = laplacian_values(f, grid, dim)
    a, b, C = params.a, params.b, params.C
    worst = -np.inf
    for t in times:
        h = params.height(t)
        dt_v = -C * (1.0 + a) / a * h * f ** (1.0 + a)
        worst = max(worst, float(np.max(dt_v - b * h * lap_f)))
    return worst


def lemma5_constant(dim: DimLike) -> float:
    """C_m = (m-1) lam / eta with lam from the profile inequality at a = 1/eta, c = (m-1)/tanh 1."""
    dim = Dimension.of(dim)
    lam = lemma3_lambda(1.0 / dim.eta, (dim.m - 1) / math.tanh(1.0))
    return (dim.m - 1) * lam / dim.eta


# ---------------------------------------------------------------------------
# trajectory checks
# ---------------------------------------------------------------------------


def _shifted(traj: Trajectory) -> np.ndarray:
    m = traj.problem.dim.m
    return traj.values() - m * (m - 1) * traj.times[:, None]


def lemma1_check(traj: Trajectory) -> tuple[float, float]:
    """Worst violations of min u0k <= u - m(m-1)t <= max u0k.

    Returns ``(lower, upper)``; both are <= 0 when the sandwich holds.
    """
    w = _shifted(traj)
    u0 = traj.problem.u0k.values
    return float(np.max(u0.min() - w)), float(np.max(w - u0.max()))


def lemma5_check(traj: Trajectory, r0: float, C_m: float | None = None) -> float:
    """max over [0, r0-1] of (min_{B_r0} u(.,0) - C_m t) - u."""
    if C_m is None:
        C_m = lemma5_constant(traj.problem.dim)
    grid = traj.grid
    i0, i1 = grid.index_of(r0), grid.index_of(r0 - 1.0)
    u = traj.values()
    bound = u[0, : i0 + 1].min() - C_m * traj.times
    return float(np.max(bound[:, None] - u[:, : i1 + 1]))


def lemma7_check(traj: Trajectory, r0: float, c_m: float) -> float:
    """max over [0, r0-1] of u - max_{B_r0} u(.,0) - (m-1)(m+c_m) t."""
    m = traj.problem.dim.m
    grid = traj.grid
    i0, i1 = grid.index_of(r0), grid.index_of(r0 - 1.0)
    u = traj.values()
    bound = u[0, : i0 + 1].max() + (m - 1) * (m + c_m) * traj.times
    return float(np.max(u[:, : i1 + 1] - bound[:, None]))


def completeness_check(traj: Trajectory, r_obs: float | None = None) -> float:
    """max of m(m-1)t - u on [0, r_obs]: positive where g(t) >= m(m-1)t g_H fails."""
    w = _shifted(traj)
    if r_obs is not None:
        w = w[:, : traj.grid.index_of(r_obs) + 1]
    return float(np.max(-w))


def rigidity_oracle(dim: DimLike, t: float | np.ndarray) -> float | np.ndarray:
    """u(t) = m(m-1)t + 1, the flow starting from g_H."""
    m = Dimension.of(dim).m
    return m * (m - 1) * t + 1.0


def rigidity_check(traj: Trajectory) -> tuple[float, float]:
    """Worst violations of u >= m(m-1)t+1 and u <= m(m-1)t+1 (in that order)."""
    exact = rigidity_oracle(traj.problem.dim, traj.times)[:, None]
    u = traj.values()
    return float(np.max(exact - u)), float(np.max(u - exact))


# ---------------------------------------------------------------------------
# the integral functional J and the coupled barrier run
# ---------------------------------------------------------------------------


def J_functional(U: RadialField, V: RadialField, dim: DimLike) -> float:
    """Hyperbolic integral over the unit ball of max(V^(1+1/eta) - U^(1+1/eta), 0)."""
    if U.grid != V.grid:
        raise ConfigurationError("U and V must share a grid")
    require_positive(U.values, "U")
    p = 1.0 + 1.0 / Dimension.of(dim).eta
    w = np.maximum(np.maximum(V.values, 0.0) ** p - U.values**p, 0.0)
    return integrate_radial(U.with_values(w), dim, 0.0, min(1.0, U.grid.r_max))


@dataclass
class BarrierRun:
    """Flow U = u^eta coupled with the centred barrier V over [0, t0)."""

    params: SubsolutionParams
    times: np.ndarray
    J: np.ndarray
    margin: np.ndarray  # min over the unit ball of U - V per stamp
    trajectory: Trajectory

    @property
    def max_J_increase(self) -> float:
        return float(np.max(np.diff(self.J))) if self.J.size > 1 else 0.0


def coupled_barrier_run(
    problem: DirichletProblem, r0: float, n_samples: int = 50, h0: float | None = None
) -> BarrierRun:
    """Solve the flow on [0, t0) and follow J(t) and U - V on the unit ball.

    By default the barrier uses h0 = min over B_r0 of U(., 0), so J(0) = 0.
    A larger ``h0`` starts with J(0) > 0; J is nonincreasing either way.
    """
    if not r0 > 1:
        raise ConfigurationError(f"r0 must exceed 1, got {r0}")
    dim = problem.dim
    grid = problem.grid
    i0 = grid.index_of(r0)
    if h0 is None:
        h0 = float((problem.u0k.values[: i0 + 1] ** dim.eta).min())
    params = SubsolutionParams.for_dimension(dim, h0)
    t0 = params.t0
    dt = t0 / n_samples
    horizon = t0 - dt
    traj = solve_dirichlet(dataclasses.replace(problem, T=horizon), dt)
    i1 = grid.index_of(1.0)
    ball = grid.restrict(1.0)
    J, margin = [], []
    for t, state in zip(traj.times, traj.states):
        U = RadialField(ball, state.u.values[: i1 + 1] ** dim.eta)
        V = subsolution_V(params, ball, t)
        J.append(J_functional(U, V, dim))
        margin.append(float(np.min(U.values - V.values)))
    return BarrierRun(params, traj.times, np.array(J), np.array(margin), traj)


# ---------------------------------------------------------------------------
# integral of the Laplacian over a positivity set
# ---------------------------------------------------------------------------


def lemma6_check(f: RadialField, dim: DimLike) -> float:
    """Hyperbolic integral of Laplacian(f) over {f > 0}.

    Sign changes are located by linear interpolation between nodes.
    """
    vals = f.values
    if vals[-1] > 0:
        raise PreconditionError("f must be nonpositive at the outer boundary")
    grid = f.grid
    r = grid.nodes
    g = laplacian_values(vals, grid, dim) * volume_density(grid, dim)
    total = 0.0
    for i in range(grid.n):
        fa, fb = vals[i], vals[i + 1]
        if fa <= 0 and fb <= 0:
            continue
        if fa > 0 and fb > 0:
            lo, hi = r[i], r[i + 1]
        else:
            cross = r[i] + grid.h * fa / (fa - fb)
            lo, hi = (r[i], cross) if fa > 0 else (cross, r[i + 1])
        total += trapezoid_between(r[i : i + 2], g[i : i + 2], lo, hi)
    return total


# ---------------------------------------------------------------------------
# cutoff profiles
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutoffProfile:
    """A radial cutoff with closed-form derivatives sampled on ``grid``.

    ``kind`` is "smoothstep-power" (parameters r0, p) or "inverse-cosh"
    (parameter epsilon).  ``psi`` holds the base smoothstep for the power
    kind and is None otherwise.
    """

    kind: str
    parameters: dict
    grid: RadialGrid
    phi: np.ndarray
    dphi: np.ndarray
    d2phi: np.ndarray
    psi: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None


def smoothstep_power_cutoff(grid: RadialGrid, r0: float, p: float = 4.0) -> CutoffProfile:
    """phi = psi^p where psi falls from 1 at r0-1 to 0 at r0 by a quintic smoothstep."""
    if p < 2:
        raise ConfigurationError(f"power must be >= 2 for a bounded constant, got p={p}")
    s = grid.nodes - (r0 - 1.0)
    inside = (s > 0) & (s < 1)
    sc = np.clip(s, 0.0, 1.0)
    psi = 1.0 - smoothstep(sc)
    dpsi = np.where(inside, -30.0 * sc**2 * (1.0 - sc) ** 2, 0.0)
    d2psi = np.where(inside, -60.0 * sc * (1.0 - sc) * (1.0 - 2.0 * sc), 0.0)
    phi = psi**p
    dphi = p * psi ** (p - 1) * dpsi
    d2phi = p * (p - 1) * psi ** (p - 2) * dpsi**2 + p * psi ** (p - 1) * d2psi
    return CutoffProfile(
        "smoothstep-power", {"r0": r0, "p": p}, grid, phi, dphi, d2phi, (psi, dpsi, d2psi)
    )


def inverse_cosh_cutoff(grid: RadialGrid, epsilon: float) -> CutoffProfile:
    """phi = 1 / cosh(epsilon r)."""
    er = epsilon * grid.nodes
    phi = 1.0 / np.cosh(er)
    th = np.tanh(er)
    dphi = -epsilon * th * phi
    d2phi = epsilon**2 * phi * (th**2 - phi**2)
    return CutoffProfile("inverse-cosh", {"epsilon": epsilon}, grid, phi, dphi, d2phi)


def _closed_form_laplacian(prof: CutoffProfile, m: int) -> np.ndarray:
    r = prof.grid.nodes
    lap = np.empty_like(r)
    lap[1:] = prof.d2phi[1:] + (m - 1) * prof.dphi[1:] / np.tanh(r[1:])
    lap[0] = m * prof.d2phi[0]
    return lap


def lemma7_cutoff_constant(prof: CutoffProfile, dim: DimLike) -> float:
    """sup over {phi > 0} of (m+2)/(4 phi) |phi'|^2 - Laplacian(phi)."""
    if prof.kind != "smoothstep-power":
        raise ConfigurationError("the cutoff constant needs a smoothstep-power profile")
    p = prof.parameters["p"]
    if p < 2:
        raise ConfigurationError(f"power must be >= 2, got p={p}")
    m = Dimension.of(dim).m
    psi, dpsi, _ = prof.psi
    support = prof.phi > 0
    # |phi'|^2 / phi = p^2 psi^(p-2) psi'^2, bounded as phi -> 0.
    ratio = p * p * psi ** (p - 2) * dpsi**2
    expr = 0.25 * (m + 2) * ratio - _closed_form_laplacian(prof, m)
    return float(np.max(expr[support])) if support.any() else 0.0


def default_cutoff_constant(dim: DimLike, r0: float = 4.0, p: float = 4.0, h: float = 1e-3) -> float:
    """c_m for the default power-4 smoothstep cutoff on B_r0."""
    return lemma7_cutoff_constant(smoothstep_power_cutoff(RadialGrid.with_spacing(r0, h), r0, p), dim)


def theorem2_cutoff_check(epsilon: float, grid: RadialGrid, dim: DimLike) -> tuple[float, float]:
    """Worst values of |phi'|^2 - eps^2 phi^2 and -Laplacian(phi) - (eps^2 + (m-1) eps) phi.

    phi = 1/cosh(eps r) with derivatives in closed form; both are <= 0.
    """
    if not 0 < epsilon < 0.5:
        raise ConfigurationError(f"epsilon must lie in ]0, 1/2[, got {epsilon}")
    m = Dimension.of(dim).m
    prof = inverse_cosh_cutoff(grid, epsilon)
    a = prof.dphi**2 - epsilon**2 * prof.phi**2
    b = -_closed_form_laplacian(prof, m) - (epsilon**2 + (m - 1) * epsilon) * prof.phi
    return float(np.max(a)), float(np.max(b))


def minimax_lower(a: float, b: float, c: float) -> float:
    """ab/(a+c), the minimum over t > 0 of max(a t, b - c t)."""
    if not (a > 0 and b > 0 and c > 0):
        raise ConfigurationError("a, b, c must be positive")
    return a * b / (a + c)


def uniform_lower_bound(dim: DimLike, inf_u0: float) -> float:
    """m(m-1) inf u0 / (m(m-1) + C_m): positive lower bound from combining the two lower bounds."""
    m = Dimension.of(dim).m
    return minimax_lower(m * (m - 1), inf_u0, lemma5_constant(dim))


# ---------------------------------------------------------------------------
# fast diffusion
# ---------------------------------------------------------------------------


@dataclass
class FastDiffusionResult:
    params: SubsolutionParams
    grid: RadialGrid
    times: np.ndarray
    W: np.ndarray  # shape (stamps, nodes)
    extinction_time: float | None
    halvings: int = 0

    def barrier_margin(self, dim: DimLike | None = None) -> float:
        """min over stamps t < t0 and nodes of W - V (>= 0 when W dominates)."""
        worst = np.inf
        for t, w in zip(self.times, self.W):
            if t >= self.params.t0:
                break
            worst = min(worst, float(np.min(w - subsolution_values(self.params, self.grid.nodes, t))))
        return worst


def _fast_diffusion_step(Z, D, grid, m, b, dt):
    """Solve Z_new - dt b L(D Z_new) = Z_old for nodes 0..n-1 with Z_n = 0."""
    h = grid.h
    n = grid.n
    q = np.zeros(n)
    q[1:] = (m - 1) / np.tanh(grid.nodes[1:n]) / (2.0 * h)
    beta = dt * b
    diag = 1.0 + 2.0 * beta * D[:n] / h**2
    diag[0] = 1.0 + 2.0 * m * beta * D[0] / h**2
    ab = np.zeros((3, n))
    ab[1] = diag
    # coefficient of Z_{i+1} in row i, of Z_{i-1} in row i
    up = -beta * (1.0 / h**2 + q) * D[1 : n + 1]
    up[0] = -2.0 * m * beta * D[1] / h**2
    lo = -beta * (1.0 / h**2 - q[1:]) * D[: n - 1]
    ab[0, 1:] = up[:-1]
    ab[2, :-1] = lo
    return solve_banded((1, 1), ab, Z[:n])


def fast_diffusion_solve(
    params: SubsolutionParams,
    grid: RadialGrid,
    dt: float,
    dim: DimLike,
    t_max: float | None = None,
    threshold: float = 1e-8,
    max_halvings: int = MAX_HALVINGS,
) -> FastDiffusionResult:
    """Integrate d(W^(1+a))/dt = b Laplacian(W) on the unit ball, W = 0 on r = 1.

    The unknown is Z = W^(1+a); each step is linear in Z with the factor
    W/Z = Z^(-a/(1+a)) frozen at the old step.  Runs until max W drops below
    ``threshold`` (the detected extinction time) or ``t_max``
    (default 1000 t0) is reached.
    """
    if not math.isclose(grid.r_max, 1.0):
        raise ConfigurationError("fast diffusion runs on the unit ball grid [0, 1]")
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    m = Dimension.of(dim).m
    a, b = params.a, params.b
    expo = 1.0 + a
    if t_max is None:
        t_max = 1000.0 * params.t0
    W = subsolution_values(params, grid.nodes, 0.0)
    W[-1] = 0.0
    Z = W**expo
    t = 0.0
    times, states = [0.0], [W.copy()]
    extinction = None
    halvings = 0
    sub = dt
    while t < t_max:
        D = np.zeros_like(Z)
        pos = Z > 0
        D[pos] = Z[pos] ** (1.0 / expo - 1.0)
        try:
            Z_new = _fast_diffusion_step(Z, D, grid, m, b, sub)
        except (LinAlgError, ValueError) as exc:
            raise NumericalError(f"fast diffusion solve failed at t={t:.6g}: {exc}") from exc
        if np.any(~np.isfinite(Z_new)) or np.any(Z_new < 0):
            halvings += 1
            if halvings > max_halvings:
                bad = int(np.flatnonzero(~(Z_new >= 0))[0])
                raise FatalInstabilityError("fast diffusion lost positivity", t, bad)
            sub /= 2.0
            continue
        Z = np.append(Z_new, 0.0)
        t += sub
        W = Z ** (1.0 / expo)
        times.append(t)
        states.append(W.copy())
        if W.max() < threshold:
            extinction = t
            break
    return FastDiffusionResult(params, grid, np.array(times), np.array(states), extinction, halvings)
