"""Built-in verification suites at desk-scale default resolution.

Each suite returns a list of :class:`~yflow.harness.CheckRecord`; a record
passes when its violation is at most its tolerance.
"""

from __future__ import annotations

import math

import numpy as np

from . import bounds
from .conformal import euclidean_factor
from .geometry import RadialGrid
from .harness import CheckRecord, VerificationReport
from .solver import DirichletProblem, exhaustion_run, solve_dirichlet

PDE_TOL = 5e-3
H = 0.02
DT = 1e-3


def _euclidean_run(m: int = 3, k: float = 6.0, T: float = 1.0):
    grid = RadialGrid.with_spacing(k, H)
    problem = DirichletProblem.from_raw(euclidean_factor(grid), k, m, T)
    return solve_dirichlet(problem, DT)


def rigidity_suite() -> list[CheckRecord]:
    grid = RadialGrid.with_spacing(8.0, H)
    problem = DirichletProblem.from_raw(grid.constant(1.0), 8.0, 3, 1.0)
    traj = solve_dirichlet(problem, DT)
    exact = bounds.rigidity_oracle(3, traj.times)[:, None]
    records = [
        CheckRecord("rigidity.sup_error", "g(t) = (m(m-1)t + 1) g_H",
                    float(np.max(np.abs(traj.values() - exact))), PDE_TOL),
    ]
    big = RadialGrid(50.0, 5000)
    for eps in (0.05, 0.1, 0.4):
        for m in (3, 5):
            grad_v, lap_v = bounds.theorem2_cutoff_check(eps, big, m)
            records.append(CheckRecord(f"rigidity.cutoff_gradient[eps={eps},m={m}]",
                                       "|grad phi|^2 <= eps^2 phi^2", grad_v, 1e-8))
            records.append(CheckRecord(f"rigidity.cutoff_laplacian[eps={eps},m={m}]",
                                       "-Laplacian(phi) <= eps^2 phi + (m-1) eps phi", lap_v, 1e-8))
    return records


def lemma1_suite() -> list[CheckRecord]:
    low, high = bounds.lemma1_check(_euclidean_run())
    anchor = "inf u_0 <= u(., t) - m(m-1)t <= sup u_0"
    return [
        CheckRecord("lemma1.lower", anchor, low, PDE_TOL),
        CheckRecord("lemma1.upper", anchor, high, PDE_TOL),
    ]


def lemma3_suite() -> list[CheckRecord]:
    lam = bounds.lemma3_lambda(1.0, 2.0)
    anchor = "f'' + (c/r) f' >= -lambda f^(1+a)"
    outside = max(32.958 - lam, lam - 32.961, 0.0)
    return [
        CheckRecord("lemma3.lambda_range", "a = 1, c = 2 and lambda = 33", outside, 0.0),
        CheckRecord("lemma3.holds_at_33", anchor, bounds.lemma3_check(1.0, 2.0, 33.0), 1e-10),
        # Negated so that a strictly positive violation at lambda = 30 passes.
        CheckRecord("lemma3.fails_at_30", anchor, -bounds.lemma3_check(1.0, 2.0, 30.0), 0.0),
    ]


def lemma4_suite() -> list[CheckRecord]:
    records = []
    grid = RadialGrid(1.0, 1000)
    for m in (3, 4, 5):
        params = bounds.SubsolutionParams.for_dimension(m, 1.0)
        times = np.linspace(0.0, params.t0, 51)[:-1]
        records.append(CheckRecord(
            f"lemma4.subsolution[m={m}]", "d/dt V^(1+a) <= b Laplacian(V)",
            bounds.subsolution_inequality_check(params, grid, times, m), 1e-6))
    return records


def fastdiff_suite() -> list[CheckRecord]:
    records = []
    grid = RadialGrid(1.0, 100)
    for m in (3, 4, 5):
        params = bounds.SubsolutionParams.for_dimension(m, 1.0)
        res = bounds.fast_diffusion_solve(params, grid, params.t0 / 20, m)
        records.append(CheckRecord(
            f"fastdiff.dominates_barrier[m={m}]", "fast diffusion solution >= V",
            -res.barrier_margin(), PDE_TOL))
        ext = res.extinction_time if res.extinction_time is not None else math.inf
        records.append(CheckRecord(
            f"fastdiff.extinction[m={m}]", "t_0 = h_0^a / C bounds the extinction time",
            (params.t0 - ext) / params.t0, 0.02))
    return records


def lemma5_suite() -> list[CheckRecord]:
    traj = _euclidean_run()
    barrier = bounds.coupled_barrier_run(traj.problem, 4.0)
    return [
        CheckRecord("lemma5.lower_bound", "u(., t) >= inf u(., 0) - C_m t",
                    bounds.lemma5_check(traj, 4.0), PDE_TOL),
        CheckRecord("lemma5.J_nonincreasing", "J(t) = int w_+ dmu",
                    barrier.max_J_increase, 1e-4),
        CheckRecord("lemma5.J_at_zero", "J(0) = 0", float(barrier.J[0]), 1e-12),
    ]


def random_lemma6_functions(n_funcs: int = 50, r_max: float = 3.0, h: float = 0.005, seed: int = 6):
    """Even smooth bumps minus an offset, nonpositive at r_max."""
    rng = np.random.default_rng(seed)
    grid = RadialGrid.with_spacing(r_max, h)
    r = grid.nodes
    out = []
    for _ in range(n_funcs):
        f = np.zeros_like(r)
        for _ in range(rng.integers(1, 4)):
            amp = rng.uniform(0.5, 2.0)
            centre = rng.uniform(0.0, 0.7 * r_max)
            width = rng.uniform(0.15, 0.6)
            f += amp * (np.exp(-((r - centre) / width) ** 2) + np.exp(-((r + centre) / width) ** 2))
        offset = rng.uniform(0.1, 0.9) * f.max()
        f = f - max(offset, f[-1] + 1e-3)
        out.append(grid.sample(lambda _r, f=f: f))
    return out


def lemma6_suite() -> list[CheckRecord]:
    worst = max(bounds.lemma6_check(f, 3) for f in random_lemma6_functions())
    return [CheckRecord("lemma6.random_functions", "int_{f>0} Laplacian(f) dmu <= 0", worst, 1e-3)]


def lemma7_suite() -> list[CheckRecord]:
    traj = _euclidean_run()
    c_m = bounds.default_cutoff_constant(3, 4.0, 4.0, 0.01)
    c_half = bounds.default_cutoff_constant(3, 4.0, 4.0, 0.005)
    return [
        CheckRecord("lemma7.upper_bound", "u(., t) <= sup u(., 0) + (m-1)(m+c_m)t",
                    bounds.lemma7_check(traj, 4.0, c_m), PDE_TOL),
        CheckRecord("lemma7.c_m_refinement", "(m+2)/(4 phi)|grad phi|^2 - Laplacian(phi) <= c_m",
                    abs(c_half - c_m) / c_m, 0.01),
    ]


def theorem1_suite() -> list[CheckRecord]:
    grid = RadialGrid.with_spacing(10.0, H)
    res = exhaustion_run(euclidean_factor(grid), [6.0, 8.0, 10.0], 3.0, 1.0, DT, 3)
    d = res.sup_differences
    return [
        CheckRecord("theorem1.completeness", "g(t) >= m(m-1)t g_H",
                    bounds.completeness_check(res.limit, 3.0), PDE_TOL),
        # Strict decrease: positive margin d_next < d required.
        CheckRecord("theorem1.cauchy_decreasing", "u_k converges on B_r x [0, T]",
                    max(b - a for a, b in zip(d, d[1:])), 0.0),
    ]


SUITES = {
    "lemma1": lemma1_suite,
    "lemma3": lemma3_suite,
    "lemma4": lemma4_suite,
    "lemma5": lemma5_suite,
    "lemma6": lemma6_suite,
    "lemma7": lemma7_suite,
    "rigidity": rigidity_suite,
    "theorem1": theorem1_suite,
    "fastdiff": fastdiff_suite,
}


def run_suite(name: str) -> VerificationReport:
    names = list(SUITES) if name == "all" else [name]
    report = VerificationReport(f"verify-{name}")
    for n in names:
        report.checks.extend(SUITES[n]())
    return report
