"""
Scenario configuration, execution and reporting.

A scenario is a JSON document::

    {
      "name": "rigidity",
      "m": 3,
      "grid": {"r_max": 8, "n": 400},
      "time": {"T": 1.0, "dt": 0.001, "output_stamps": [0, 0.5, 1.0]},
      "initial": {"kind": "constant", "value": 1.0},
      "exhaustion": {"k_list": [6, 8, 10], "r_obs": 3},      (optional)
      "checks": [{"id": "rigidity", "tolerance": 0.005}]
    }

Without ``exhaustion`` the Dirichlet problem lives on the ball of radius
``grid.r_max``.  With it, ``grid`` fixes the spacing and must reach the largest
ball.  Checks of trajectory type are evaluated on every solver step.
"""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable

import numpy as np

from . import bounds
from .conformal import euclidean_factor, scalar_curvature_values
from .errors import ConfigurationError, YFlowError
from .expression import parse_expression
from .geometry import Dimension, RadialField, RadialGrid
from .solver import (
    DirichletProblem,
    ExhaustionResult,
    Trajectory,
    exhaustion_run,
    solve_dirichlet,
    step_marks,
)

CSV_HEADER = ("t", "r", "u", "U", "R")
DEFAULT_OUTPUT_STAMPS = 11


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckSpec:
    id: str
    tolerance: float
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    m: int
    r_max: float
    n: int
    T: float
    dt: float
    initial: dict
    output_stamps: tuple[float, ...] | None = None
    k_list: tuple[float, ...] | None = None
    r_obs: float | None = None
    checks: tuple[CheckSpec, ...] = ()

    @property
    def grid(self) -> RadialGrid:
        return RadialGrid(self.r_max, self.n)

    @property
    def is_exhaustion(self) -> bool:
        return self.k_list is not None

    @property
    def stamps(self) -> list[float]:
        if self.output_stamps is not None:
            return list(self.output_stamps)
        return [float(t) for t in np.linspace(0.0, self.T, DEFAULT_OUTPUT_STAMPS)]

    def largest_ball(self) -> float:
        return self.k_list[-1] if self.is_exhaustion else self.r_max

    def initial_field(self) -> RadialField:
        return initial_factor(self.initial, self.grid)

    @classmethod
    def from_dict(cls, data: Any) -> "ScenarioConfig":
        return validate_config(data)


def _require(data: dict, key: str, path: str):
    if not isinstance(data, dict):
        raise ConfigurationError("expected an object", path=path or "<root>")
    if key not in data:
        raise ConfigurationError("missing required field", path=f"{path}.{key}".lstrip("."))
    return data[key]


def _number(value, path: str, positive: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise ConfigurationError(f"expected a finite number, got {value!r}", path=path)
    if positive and not value > 0:
        raise ConfigurationError(f"must be positive, got {value!r}", path=path)
    return float(value)


def _integer(value, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigurationError(f"expected an integer, got {value!r}", path=path)
    return value


def initial_factor(spec: dict, grid: RadialGrid) -> RadialField:
    """Sample the initial conformal factor described by ``spec`` on ``grid``."""
    kind = _require(spec, "kind", "initial")
    if kind == "constant":
        value = _number(_require(spec, "value", "initial"), "initial.value")
        return grid.constant(value)
    if kind == "euclidean":
        return euclidean_factor(grid)
    if kind == "expression":
        text = _require(spec, "expr", "initial")
        if not isinstance(text, str):
            raise ConfigurationError("expected a string", path="initial.expr")
        try:
            values = parse_expression(text)(grid.nodes)
        except ConfigurationError as exc:
            raise ConfigurationError(str(exc), path="initial.expr") from exc
        if not np.all(np.isfinite(values)) or not np.all(values > 0):
            raise ConfigurationError(
                "expression must be finite and positive on the grid", path="initial.expr"
            )
        return RadialField(grid, values)
    raise ConfigurationError(
        f"unknown kind {kind!r} (constant, euclidean, expression)", path="initial.kind"
    )


def validate_config(data: Any) -> ScenarioConfig:
    """Check every field of a scenario document and build the config.

    Raises ConfigurationError naming the offending field path.
    """
    if not isinstance(data, dict):
        raise ConfigurationError("scenario must be an object", path="<root>")
    known = {"name", "m", "grid", "time", "initial", "exhaustion", "checks"}
    for key in data:
        if key not in known:
            raise ConfigurationError("unknown field", path=key)

    name = _require(data, "name", "")
    if not isinstance(name, str) or not name or not all(c.isalnum() or c in "-_." for c in name):
        raise ConfigurationError("name must be a nonempty identifier", path="name")
    m = _integer(_require(data, "m", ""), "m")
    if m < 3:
        raise ConfigurationError(f"dimension must be >= 3, got {m}", path="m")

    grid = _require(data, "grid", "")
    r_max = _number(_require(grid, "r_max", "grid"), "grid.r_max")
    n = _integer(_require(grid, "n", "grid"), "grid.n")
    try:
        radial = RadialGrid(r_max, n)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), path="grid") from exc

    tm = _require(data, "time", "")
    T = _number(_require(tm, "T", "time"), "time.T")
    dt = _number(_require(tm, "dt", "time"), "time.dt")
    stamps = tm.get("output_stamps")
    if stamps is not None:
        if not isinstance(stamps, list) or not stamps:
            raise ConfigurationError("expected a nonempty list", path="time.output_stamps")
        stamps = tuple(
            _number(s, f"time.output_stamps[{i}]", positive=False) for i, s in enumerate(stamps)
        )
        if any(s < 0 or s > T for s in stamps) or any(b <= a for a, b in zip(stamps, stamps[1:])):
            raise ConfigurationError(
                "stamps must increase strictly within [0, T]", path="time.output_stamps"
            )

    initial = _require(data, "initial", "")
    if not isinstance(initial, dict):
        raise ConfigurationError("expected an object", path="initial")
    initial_factor(initial, radial)

    k_list = r_obs = None
    ex = data.get("exhaustion")
    if ex is not None:
        raw_k = _require(ex, "k_list", "exhaustion")
        if not isinstance(raw_k, list) or not raw_k:
            raise ConfigurationError("expected a nonempty list", path="exhaustion.k_list")
        k_list = tuple(_number(k, f"exhaustion.k_list[{i}]") for i, k in enumerate(raw_k))
        r_obs = _number(_require(ex, "r_obs", "exhaustion"), "exhaustion.r_obs")
        if any(b <= a for a, b in zip(k_list, k_list[1:])):
            raise ConfigurationError("must be strictly increasing", path="exhaustion.k_list")
        if k_list[0] < r_obs + 3:
            raise ConfigurationError(
                f"smallest ball must satisfy k >= r_obs + 3 = {r_obs + 3}", path="exhaustion.k_list"
            )
        for i, k in enumerate(k_list):
            _ball_on_grid(radial, k, f"exhaustion.k_list[{i}]")
        _ball_on_grid(radial, r_obs, "exhaustion.r_obs", min_radius=0.0)
    else:
        _ball_on_grid(radial, r_max, "grid.r_max")

    checks = []
    raw_checks = data.get("checks", [])
    if not isinstance(raw_checks, list):
        raise ConfigurationError("expected a list", path="checks")
    ball = k_list[-1] if k_list else r_max
    for i, item in enumerate(raw_checks):
        path = f"checks[{i}]"
        cid = _require(item, "id", path)
        if cid not in CHECKS:
            raise ConfigurationError(
                f"unknown check {cid!r}; known: {', '.join(sorted(CHECKS))}", path=f"{path}.id"
            )
        tol = _number(_require(item, "tolerance", path), f"{path}.tolerance", positive=False)
        if tol < 0:
            raise ConfigurationError("must be >= 0", path=f"{path}.tolerance")
        params = {k: v for k, v in item.items() if k not in ("id", "tolerance")}
        entry = CHECKS[cid]
        for key in params:
            if key not in entry.params:
                raise ConfigurationError("unknown check parameter", path=f"{path}.{key}")
        if "r0" in params:
            r0 = _number(params["r0"], f"{path}.r0")
            if r0 <= 1 or r0 > ball:
                raise ConfigurationError(f"r0 must lie in ]1, {ball}]", path=f"{path}.r0")
            _ball_on_grid(radial, r0, f"{path}.r0", min_radius=1.0)
        if entry.exhaustion_only and k_list is None:
            raise ConfigurationError("check needs an exhaustion scenario", path=f"{path}.id")
        checks.append(CheckSpec(cid, tol, params))

    return ScenarioConfig(
        name=name, m=m, r_max=r_max, n=n, T=T, dt=dt, initial=dict(initial),
        output_stamps=stamps, k_list=k_list, r_obs=r_obs, checks=tuple(checks),
    )


def _ball_on_grid(grid: RadialGrid, k: float, path: str, min_radius: float = 2.0) -> None:
    if not k > min_radius:
        raise ConfigurationError(f"radius must exceed {min_radius}", path=path)
    if k > grid.r_max * (1 + 1e-12):
        raise ConfigurationError(f"radius {k} exceeds grid.r_max", path=path)
    try:
        grid.index_of(k)
    except ConfigurationError as exc:
        raise ConfigurationError(str(exc), path=path) from exc


def load_config(path: str | Path) -> ScenarioConfig:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON: {exc}", path=str(path)) from exc
    return validate_config(data)


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------


@dataclass
class CheckRecord:
    id: str
    anchor: str
    violation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return bool(math.isfinite(self.violation) and self.violation <= self.tolerance)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "violation": self.violation,
            "tolerance": self.tolerance,
            "pass": self.passed,
        }


@dataclass
class VerificationReport:
    scenario: str
    checks: list[CheckRecord] = field(default_factory=list)
    solver: dict = field(default_factory=dict)
    wall_time: float | None = None
    error: str | None = None

    @property
    def status(self) -> str:
        ok = self.error is None and all(c.passed for c in self.checks)
        return "pass" if ok else "fail"

    def to_dict(self) -> dict:
        out = {
            "scenario": self.scenario,
            "status": self.status,
            "checks": [c.to_dict() for c in self.checks],
            "solver": self.solver,
        }
        if self.error is not None:
            out["error"] = self.error
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        checks = [
            CheckRecord(c["id"], c["anchor"], float(c["violation"]), float(c["tolerance"]))
            for c in data["checks"]
        ]
        return cls(data["scenario"], checks, dict(data.get("solver", {})), None, data.get("error"))


def emit_report(report: VerificationReport, path: str | Path) -> Path:
    """Write the report as JSON.

    Wall time is kept on the object only, so reruns give identical files.
    """
    path = Path(path)
    text = json.dumps(report.to_dict(), indent=2, allow_nan=True)
    path.write_text(text + "\n", encoding="utf-8")
    return path


def read_report(path: str | Path) -> VerificationReport:
    return VerificationReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def _fmt(x: float) -> str:
    return f"{x:.17e}"


def emit_csv(traj: Trajectory, path: str | Path, times=None) -> Path:
    """Write one row (t, r, u, U, R) per stored stamp and node, t-major.

    ``times`` selects a subset of the stored stamps (matched to 1e-9 dt).
    """
    if not traj.states:
        raise ConfigurationError("trajectory is empty")
    dim = traj.problem.dim
    grid = traj.grid
    if times is None:
        chosen = range(len(traj.states))
    else:
        tol = 1e-9 * traj.dt
        chosen = [i for i, t in enumerate(traj.times) if any(abs(t - s) <= tol for s in times)]
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for i in chosen:
            t = traj.times[i]
            u = traj.states[i].u.values
            U = u**dim.eta
            R = scalar_curvature_values(u, grid, dim)
            for r, uu, UU, RR in zip(grid.nodes, u, U, R):
                writer.writerow((_fmt(t), _fmt(r), _fmt(uu), _fmt(UU), _fmt(RR)))
    return path


# ---------------------------------------------------------------------------
# check registry
# ---------------------------------------------------------------------------


@dataclass
class RunContext:
    config: ScenarioConfig
    trajectory: Trajectory
    exhaustion: ExhaustionResult | None = None


@dataclass(frozen=True)
class CheckEntry:
    anchor: str
    evaluate: Callable[[RunContext, dict], float]
    params: tuple[str, ...] = ()
    exhaustion_only: bool = False


def _default_r0(ctx: RunContext, params: dict) -> float:
    if "r0" in params:
        return float(params["r0"])
    return min(4.0, ctx.trajectory.problem.k)


def _check_rigidity(ctx, params):
    low, high = bounds.rigidity_check(ctx.trajectory)
    return max(low, high)


def _check_lemma1(ctx, params):
    return max(bounds.lemma1_check(ctx.trajectory))


def _check_lemma5(ctx, params):
    return bounds.lemma5_check(ctx.trajectory, _default_r0(ctx, params))


def _check_lemma7(ctx, params):
    r0 = _default_r0(ctx, params)
    c_m = bounds.default_cutoff_constant(ctx.config.m, r0)
    return bounds.lemma7_check(ctx.trajectory, r0, c_m)


def _check_theorem1(ctx, params):
    r_obs = ctx.config.r_obs if ctx.exhaustion is not None else None
    return bounds.completeness_check(ctx.trajectory, r_obs)


def _check_positivity(ctx, params):
    return -float(ctx.trajectory.values().min())


def _check_cauchy(ctx, params):
    d = ctx.exhaustion.sup_differences
    if len(d) < 2:
        return 0.0
    return float(max(b - a for a, b in zip(d, d[1:])))


CHECKS: dict[str, CheckEntry] = {
    "rigidity": CheckEntry("g(t) = (m(m-1)t + 1) g_H", _check_rigidity),
    "lemma1": CheckEntry("inf u_0 <= u(., t) - m(m-1)t <= sup u_0", _check_lemma1),
    "lemma5": CheckEntry("u(., t) >= inf_{B_r0} u(., 0) - C_m t", _check_lemma5, ("r0",)),
    "lemma7": CheckEntry(
        "u(., t) <= sup_{B_r0} u(., 0) + (m-1)(m+c_m)t", _check_lemma7, ("r0",)
    ),
    "theorem1": CheckEntry("g(t) >= m(m-1)t g_H", _check_theorem1),
    "positivity": CheckEntry("u > 0", _check_positivity),
    "exhaustion_cauchy": CheckEntry(
        "consecutive sup-differences d_k decrease", _check_cauchy, exhaustion_only=True
    ),
}


# ---------------------------------------------------------------------------
# execution
# ---------------------------------------------------------------------------


def _solve_times(config: ScenarioConfig) -> list[float]:
    marks = step_marks(config.T, config.dt)
    snap = 1e-9 * config.dt
    extra = [s for s in config.stamps if s > 0 and all(abs(s - t) > snap for t in marks)]
    return sorted(set(marks) | set(extra))


def run_scenario(config: ScenarioConfig | dict):
    """Run a scenario and evaluate its checks.

    Returns ``(result, report)`` where result is the Trajectory (or the
    ExhaustionResult) and None when the solver failed fatally.
    """
    if not isinstance(config, ScenarioConfig):
        config = validate_config(config)
    start = time.perf_counter()
    dim = Dimension(config.m)
    u0 = config.initial_field()
    grid = u0.grid
    solver_meta = {"m": config.m, "h": grid.h, "dt": config.dt, "T": config.T}
    report = VerificationReport(config.name, solver=solver_meta)
    times = _solve_times(config)
    try:
        if config.is_exhaustion:
            result = exhaustion_run(
                u0, config.k_list, config.r_obs, config.T, config.dt, dim, output_times=times
            )
            traj = result.limit
            solver_meta["k_list"] = list(config.k_list)
            solver_meta["r_obs"] = config.r_obs
            solver_meta["sup_differences"] = list(result.sup_differences)
            solver_meta["halvings"] = sum(t.halvings for t in result.trajectories.values())
        else:
            problem = DirichletProblem.from_raw(u0, config.r_max, dim, config.T)
            traj = solve_dirichlet(problem, config.dt, output_times=times)
            result = traj
            solver_meta["k"] = config.r_max
            solver_meta["halvings"] = traj.halvings
        solver_meta["steps"] = traj.steps
    except YFlowError as exc:
        report.error = f"{type(exc).__name__}: {exc}"
        report.wall_time = time.perf_counter() - start
        return None, report

    ctx = RunContext(config, traj, result if config.is_exhaustion else None)
    for spec in config.checks:
        entry = CHECKS[spec.id]
        try:
            violation = float(entry.evaluate(ctx, spec.params))
        except YFlowError as exc:
            violation = math.inf
            report.error = f"check {spec.id}: {exc}"
        report.checks.append(CheckRecord(spec.id, entry.anchor, violation, spec.tolerance))
    report.wall_time = time.perf_counter() - start
    return result, report


def write_outputs(config: ScenarioConfig, result, report: VerificationReport, out_dir) -> list[Path]:
    """Write ``<name>.csv`` (largest ball, output stamps) and ``<name>.report.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    if result is not None:
        traj = result.limit if isinstance(result, ExhaustionResult) else result
        paths.append(emit_csv(traj, out / f"{config.name}.csv", config.stamps))
    paths.append(emit_report(report, out / f"{config.name}.report.json"))
    return paths
