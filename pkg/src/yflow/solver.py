"""
Time integration of the conformal Yamabe flow on geodesic balls.

Under g(t) = u(t) g_H the flow dg/dt = -R g is the scalar equation

    du/dt = (m-1) * (m + Laplacian(u)/u + (m-6)/4 * |grad u|^2 / u^2).

``step`` advances it semi-implicitly: the Laplacian is implicit with the
diffusion coefficient (m-1)/u frozen at the old state, the constant and
gradient terms are explicit, so each step is one tridiagonal solve.  The
Dirichlet problem on the ball B_k uses the blended initial data and the
boundary value c_k + m(m-1)t; ``exhaustion_run`` solves it for a sequence of
radii and reports how the solutions settle on a fixed observation window.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, solve_banded

from .conformal import ConformalFactor, require_positive
from .errors import (
    ConfigurationError,
    DomainError,
    FatalInstabilityError,
    NumericalError,
    StabilityError,
)
from .geometry import (
    DimLike,
    Dimension,
    RadialField,
    gradient_values,
    laplacian_values,
)

log = logging.getLogger(__name__)

MAX_HALVINGS = 20
# Collar [k - 1/4, k] where the blended initial data equal c_k.
COLLAR = 0.25


@dataclass(frozen=True)
class FlowState:
    t: float
    u: ConformalFactor

    def __post_init__(self):
        if not self.t >= 0:
            raise DomainError(f"state time must be >= 0, got {self.t}")
        require_positive(self.u.values)


# ---------------------------------------------------------------------------
# right-hand sides of the equivalent evolution equations
# ---------------------------------------------------------------------------

def _field_of(state) -> RadialField:
    return state.u if isinstance(state, FlowState) else state


def rhs_u_values(u: np.ndarray, grid, dim: DimLike) -> np.ndarray:
    m = Dimension.of(dim).m
    lap = laplacian_values(u, grid, m)
    grad = gradient_values(u, grid)
    return (m - 1) * (m + lap / u + 0.25 * (m - 6) * grad**2 / u**2)


def rhs_u(state: FlowState | RadialField, dim: DimLike) -> RadialField:
    """du/dt for the conformal factor."""
    u = _field_of(state)
    require_positive(u.values)
    return u.with_values(rhs_u_values(u.values, u.grid, dim))


def rhs_U(U: RadialField, dim: DimLike) -> RadialField:
    """dU/dt = (m-1) (m eta U + Laplacian(U)) U^(-1/eta) for U = u**eta."""
    dim = Dimension.of(dim)
    require_positive(U.values, "U")
    lap = laplacian_values(U.values, U.grid, dim)
    out = (dim.m - 1) * (dim.m * dim.eta * U.values + lap) * U.values ** (-1.0 / dim.eta)
    return U.with_values(out)


def rhs_pressure(v: RadialField, dim: DimLike) -> RadialField:
    """dv/dt for the pressure v = 1/u."""
    m = Dimension.of(dim).m
    require_positive(v.values, "pressure")
    lap = laplacian_values(v.values, v.grid, m)
    grad = gradient_values(v.values, v.grid)
    vv = v.values
    return v.with_values((m - 1) * (-m * vv**2 + vv * lap - 0.25 * (m + 2) * grad**2))


def rhs_divergence_form(u: RadialField, dim: DimLike) -> RadialField:
    """d(u^(eta+1))/dt from the divergence form of the flow.

    (m-1) * (m (eta+1) u^eta + div(grad(u^(eta+1)) / u)), with the radial
    divergence div(F e_r) = F' + (m-1) coth(r) F.
    """
    dim = Dimension.of(dim)
    m, eta = dim.m, dim.eta
    require_positive(u.values)
    grid = u.grid
    h, r = grid.h, grid.nodes
    w = u.values ** (eta + 1.0)
    # conservative stencil with the flux at the half nodes r_(i+1/2)
    u_half = 0.5 * (u.values[1:] + u.values[:-1])
    f_half = np.diff(w) / h / u_half
    div = np.empty_like(w)
    div[1:-1] = np.diff(f_half) / h + (m - 1) / np.tanh(r[1:-1]) * 0.5 * (f_half[1:] + f_half[:-1])
    # flux is odd at the origin, so div -> m * flux'(0) ~ m * f_(1/2) / (h/2).
    div[0] = 2.0 * m * f_half[0] / h
    # one-sided at the outer node
    flux = gradient_values(w, grid) / u.values
    div[-1] = gradient_values(flux, grid)[-1] + (m - 1) * flux[-1] / np.tanh(r[-1])
    return u.with_values((m - 1) * (m * (eta + 1.0) * u.values**eta + div))


# ---------------------------------------------------------------------------
# Dirichlet problem on B_k
# ---------------------------------------------------------------------------

def smoothstep(s: np.ndarray) -> np.ndarray:
    """Quintic smoothstep 6s^5 - 15s^4 + 10s^3 on [0, 1], clamped outside."""
    s = np.clip(s, 0.0, 1.0)
    return s**3 * (10.0 + s * (-15.0 + 6.0 * s))


def ball_cutoff(r: np.ndarray, k: float) -> np.ndarray:
    """Cutoff equal to 1 on [0, k-1], 0 on [k - 1/4, k], quintic in between."""
    width = 1.0 - COLLAR
    return 1.0 - smoothstep((np.asarray(r) - (k - 1.0)) / width)


def build_initial_data(u0_raw: ConformalFactor, k: float) -> tuple[float, ConformalFactor]:
    """Blend the raw factor into the constant c_k = min over [0, k] near the sphere r = k.

    Returns ``(c_k, u0k)`` with u0k sampled on the sub-grid [0, k].
    """
    if not k > 2:
        raise ConfigurationError(f"ball radius must exceed 2, got k={k}")
    if k > u0_raw.grid.r_max * (1 + 1e-12):
        raise ConfigurationError(
            f"ball radius k={k} exceeds the grid (r_max={u0_raw.grid.r_max})"
        )
    require_positive(u0_raw.values)
    raw = u0_raw.restrict(k)
    c_k = float(raw.values.min())
    chi = ball_cutoff(raw.r, k)
    u0k = (1.0 - chi) * c_k + chi * raw.values
    # Outside the blend region use exact copies so that equalities hold bitwise.
    u0k = np.where(chi == 1.0, raw.values, u0k)
    u0k = np.where(chi == 0.0, c_k, u0k)
    return c_k, raw.with_values(u0k)


def boundary_value(c_k: float, dim: DimLike, t: float) -> float:
    """phi_k(t) = c_k + m(m-1) t."""
    m = Dimension.of(dim).m
    return c_k + m * (m - 1) * t


@dataclass(frozen=True)
class DirichletProblem:
    """Flow on B_k with u = c_k + m(m-1)t on the sphere r = k and u = u0k at t = 0."""

    k: float
    u0k: ConformalFactor
    c_k: float
    dim: Dimension
    T: float

    def __post_init__(self):
        object.__setattr__(self, "dim", Dimension.of(self.dim))
        if not self.k > 2:
            raise ConfigurationError(f"ball radius must exceed 2, got k={self.k}")
        if not math.isclose(self.u0k.grid.r_max, self.k, rel_tol=1e-12):
            raise ConfigurationError("initial data must live on the grid [0, k]")
        if not self.c_k > 0:
            raise ConfigurationError(f"c_k must be positive, got {self.c_k}")
        if not self.T >= 0:
            raise ConfigurationError(f"horizon must be >= 0, got {self.T}")
        require_positive(self.u0k.values)
        if not math.isclose(self.u0k.values[-1], self.c_k, rel_tol=1e-12, abs_tol=0.0):
            raise ConfigurationError("initial data must equal c_k on the boundary sphere")

    @classmethod
    def from_raw(
        cls, u0_raw: ConformalFactor, k: float, dim: DimLike, T: float
    ) -> "DirichletProblem":
        c_k, u0k = build_initial_data(u0_raw, k)
        return cls(k=float(k), u0k=u0k, c_k=c_k, dim=Dimension.of(dim), T=float(T))

    @property
    def grid(self):
        return self.u0k.grid

    def boundary(self, t: float) -> float:
        return boundary_value(self.c_k, self.dim, t)

    def initial_state(self) -> FlowState:
        return FlowState(0.0, self.u0k)


@dataclass
class Trajectory:
    problem: DirichletProblem
    times: np.ndarray
    states: list[FlowState]
    dt: float
    halvings: int = 0
    steps: int = 0

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.size != len(self.states) or self.times.size == 0:
            raise ConfigurationError("trajectory needs one state per time stamp")
        if self.times[0] != 0.0 or np.any(np.diff(self.times) <= 0):
            raise ConfigurationError("time stamps must start at 0 and increase strictly")

    @property
    def grid(self):
        return self.problem.grid

    def values(self) -> np.ndarray:
        """Array of shape (stamps, nodes) holding u."""
        return np.stack([s.u.values for s in self.states])

    def final(self) -> FlowState:
        return self.states[-1]


def _tridiagonal_system(u: np.ndarray, grid, m: int, dt: float):
    """Banded matrix (scipy layout) for the unknowns at nodes 0..n-1."""
    h = grid.h
    n = grid.n
    alpha = dt * (m - 1) / u[:n]
    ab = np.zeros((3, n))
    ab[1, :] = 1.0 + 2.0 * alpha / h**2
    q = np.zeros(n)
    q[1:] = (m - 1) / np.tanh(grid.nodes[1:n]) / (2.0 * h)
    lower = -alpha * (1.0 / h**2 - q)
    upper = -alpha * (1.0 / h**2 + q)
    # Origin row: u0 - alpha0 * m * 2 (u1 - u0) / h^2.
    ab[1, 0] = 1.0 + 2.0 * m * alpha[0] / h**2
    upper[0] = -2.0 * m * alpha[0] / h**2
    ab[0, 1:] = upper[:-1]
    ab[2, :-1] = lower[1:]
    return ab, upper[-1]


def step(state: FlowState, dt: float, problem: DirichletProblem) -> FlowState:
    """One semi-implicit step of size dt; raises StabilityError on lost positivity."""
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    m = problem.dim.m
    grid = problem.grid
    u = state.u.values
    grad = gradient_values(u, grid)
    explicit = (m - 1) * (m + 0.25 * (m - 6) * grad**2 / u**2)
    rhs = u[:-1] + dt * explicit[:-1]
    t_new = state.t + dt
    phi = problem.boundary(t_new)
    ab, coupling = _tridiagonal_system(u, grid, m, dt)
    rhs[-1] -= coupling * phi
    try:
        interior = solve_banded((1, 1), ab, rhs, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise NumericalError(f"tridiagonal solve failed at t={state.t:.6g}: {exc}") from exc
    new = np.append(interior, phi)
    bad = np.flatnonzero(~(new > 0))
    if bad.size:
        raise StabilityError("step lost positivity", state.t, int(bad[0]))
    return FlowState(t_new, state.u.with_values(new))


def step_marks(T: float, dt: float) -> list[float]:
    """End times of the nominal steps of size dt covering [0, T]; the last one is T."""
    n_steps = max(int(math.ceil(T / dt - 1e-9)), 0)
    return [min(i * dt, T) for i in range(1, n_steps + 1)]


def _schedule(T: float, dt: float, output_times: Sequence[float] | None):
    marks = step_marks(T, dt)
    if output_times is None:
        outputs = set(marks)
    else:
        extra = [float(t) for t in output_times if 0 < t <= T]
        if any(t < 0 or t > T * (1 + 1e-12) for t in output_times):
            raise ConfigurationError("output stamps must lie in [0, T]")
        outputs = set(extra)
        snap = 1e-9 * dt
        marks = [t for t in marks if all(abs(t - s) > snap for s in outputs)]
        marks = sorted(set(marks) | outputs)
    return marks, outputs


def advance(
    state: FlowState,
    t_target: float,
    problem: DirichletProblem,
    dt: float,
    max_halvings: int = MAX_HALVINGS,
) -> tuple[FlowState, int]:
    """Advance to ``t_target`` halving the sub-step on positivity loss.

    Each attempted step may be halved at most ``max_halvings`` times in a
    row; the reduced step is kept for the rest of the interval. Returns the
    new state and the total number of halvings used.
    """
    sub = min(dt, t_target - state.t)
    halvings = 0
    tries = 0
    while state.t < t_target:
        h_step = min(sub, t_target - state.t)
        # Avoid a last sliver from floating point drift.
        if t_target - state.t - h_step < 1e-12 * max(1.0, t_target):
            h_step = t_target - state.t
        try:
            nxt = step(state, h_step, problem)
        except StabilityError as exc:
            halvings += 1
            tries += 1
            if tries > max_halvings:
                raise FatalInstabilityError(
                    "step halving exhausted", exc.t, exc.node
                ) from exc
            sub = h_step / 2.0
            log.debug("positivity lost at t=%g node %d, dt -> %g", exc.t, exc.node, sub)
            continue
        tries = 0
        if t_target - nxt.t < 1e-12 * max(1.0, t_target):
            nxt = FlowState(t_target, nxt.u)
        state = nxt
    return state, halvings


def solve_dirichlet(
    problem: DirichletProblem,
    dt: float,
    output_times: Sequence[float] | None = None,
    max_halvings: int = MAX_HALVINGS,
) -> Trajectory:
    """Integrate the Dirichlet problem from 0 to ``problem.T``.

    Parameters
    ----------
    problem : DirichletProblem
    dt : float
        Nominal time step.
    output_times : sequence of float, optional
        Stamps at which states are stored; every step is stored by default.
        The stamps are hit exactly.
    max_halvings : int
        Halvings allowed within one nominal step before giving up.
    """
    if not dt > 0:
        raise ConfigurationError(f"time step must be positive, got {dt}")
    marks, outputs = _schedule(problem.T, dt, output_times)
    state = problem.initial_state()
    times, states = [0.0], [state]
    total_halvings = 0
    for mark in marks:
        state, used = advance(state, mark, problem, dt, max_halvings)
        total_halvings += used
        if mark in outputs:
            times.append(mark)
            states.append(state)
    return Trajectory(problem, np.array(times), states, dt, total_halvings, len(marks))


@dataclass
class ExhaustionResult:
    """Solutions on the balls B_k, compared on the window [0, r_obs] x [0, T]."""

    k_list: list[float]
    r_obs: float
    trajectories: dict[float, Trajectory]
    sup_differences: list[float] = field(default_factory=list)

    @property
    def limit(self) -> Trajectory:
        return self.trajectories[self.k_list[-1]]

    def window(self, k: float | None = None) -> np.ndarray:
        """u of the given (default: largest) ball on the window nodes, shape (stamps, nodes)."""
        traj = self.trajectories[self.k_list[-1] if k is None else k]
        n_obs = traj.grid.index_of(self.r_obs) + 1
        return traj.values()[:, :n_obs]

    @property
    def times(self) -> np.ndarray:
        return self.limit.times

    @property
    def window_radii(self) -> np.ndarray:
        grid = self.limit.grid
        return grid.nodes[: grid.index_of(self.r_obs) + 1]


def exhaustion_run(
    u0_raw: ConformalFactor,
    k_list: Sequence[float],
    r_obs: float,
    T: float,
    dt: float,
    dim: DimLike,
    output_times: Sequence[float] | None = None,
) -> ExhaustionResult:
    """Solve the Dirichlet problems for every k and compare consecutive radii.

    All balls share the spacing of ``u0_raw.grid``, so window nodes coincide.
    """
    k_list = [float(k) for k in k_list]
    if not k_list:
        raise ConfigurationError("k_list must not be empty")
    if any(b <= a for a, b in zip(k_list, k_list[1:])):
        raise ConfigurationError("k_list must be strictly increasing")
    if r_obs > k_list[0] - 3:
        raise ConfigurationError(
            f"observation radius {r_obs} exceeds smallest k - 3 = {k_list[0] - 3}"
        )
    trajectories = {}
    for k in k_list:
        problem = DirichletProblem.from_raw(u0_raw, k, dim, T)
        trajectories[k] = solve_dirichlet(problem, dt, output_times)
        log.info("exhaustion k=%g done (%d halvings)", k, trajectories[k].halvings)
    result = ExhaustionResult(k_list, float(r_obs), trajectories)
    for a, b in zip(k_list, k_list[1:]):
        result.sup_differences.append(
            float(np.max(np.abs(result.window(b) - result.window(a))))
        )
    return result
