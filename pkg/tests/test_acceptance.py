"""Acceptance criteria 1-10, one test per criterion.

Each test prints a single ``ACCEPTANCE <n> PASS|FAIL ...`` line to the
terminal (bypassing capture) before asserting.
"""

import math
import time

import numpy as np
import pytest

from yflow.bounds import (
    SubsolutionParams,
    coupled_barrier_run,
    default_cutoff_constant,
    fast_diffusion_solve,
    lemma1_check,
    lemma3_check,
    lemma3_lambda,
    lemma5_check,
    lemma6_check,
    lemma7_check,
    rigidity_check,
    subsolution_inequality_check,
    theorem2_cutoff_check,
)
from yflow.conformal import euclidean_factor
from yflow.geometry import RadialGrid
from yflow.solver import DirichletProblem, exhaustion_run, solve_dirichlet
from yflow.suites import random_lemma6_functions

from test_solver import form_residuals
from conftest import convergence_ratios


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {n:2d} {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail

    return emit


def test_criterion_01_rigidity(report):
    start = time.perf_counter()
    grid = RadialGrid.with_spacing(8.0, 0.02)
    problem = DirichletProblem.from_raw(grid.constant(1.0), 8.0, 3, 1.0)
    traj = solve_dirichlet(problem, 1e-3)
    elapsed = time.perf_counter() - start
    err = max(abs(v) for v in rigidity_check(traj))
    np.testing.assert_allclose(problem.boundary(0.5), 4.0)
    report(1, err <= 5e-3 and elapsed < 10.0, f"sup|u - (6t+1)| = {err:.3e}, {elapsed:.2f} s")


def test_criterion_02_profile_constant(report):
    start = time.perf_counter()
    lam = lemma3_lambda(1.0, 2.0)
    at_33 = lemma3_check(1.0, 2.0, 33.0, n_nodes=10_000)
    at_30 = lemma3_check(1.0, 2.0, 30.0, n_nodes=10_000)
    elapsed = time.perf_counter() - start
    ok = 32.958 <= lam <= 32.961 and at_33 <= 1e-10 and at_30 > 0 and elapsed < 1.0
    report(2, ok, f"lambda = {lam!r}, check(33) = {at_33:.3e}, check(30) = {at_30:.3e}, {elapsed:.3f} s")


def test_criterion_03_sandwich(report, euclidean_trajectory):
    lo, hi = lemma1_check(euclidean_trajectory)
    report(3, lo <= 5e-3 and hi <= 5e-3, f"lower = {lo:.3e}, upper = {hi:.3e}")


def test_criterion_04_barrier(report):
    parts, ok = [], True
    for m in (3, 4, 5):
        p = SubsolutionParams.for_dimension(m, 1.0)
        ineq = subsolution_inequality_check(
            p, RadialGrid.with_spacing(1.0, 1e-3), np.linspace(0.0, p.t0, 50, endpoint=False), m
        )
        fd = fast_diffusion_solve(p, RadialGrid.with_spacing(1.0, 0.01), p.t0 / 20, m)
        margin = fd.barrier_margin()
        ext = fd.extinction_time
        ok &= ineq <= 1e-6 and margin >= 0 and ext is not None and ext >= 0.98 * p.t0
        parts.append(f"m={m}: ineq {ineq:.2e}, margin {margin:.1e}, t_ext/t0 {ext / p.t0:.3g}")
    report(4, ok, "; ".join(parts))


def test_criterion_05_lower_bound(report, euclidean_trajectory):
    viol = lemma5_check(euclidean_trajectory, 4.0)
    run = coupled_barrier_run(euclidean_trajectory.problem, 4.0)
    run_up = coupled_barrier_run(euclidean_trajectory.problem, 4.0, h0=1.2 * 0.25**0.25)
    inc = max(run.max_J_increase, run_up.max_J_increase)
    report(5, viol <= 5e-3 and inc <= 1e-4,
           f"violation = {viol:.3e}, max J increase = {inc:.3e} (J0 = {run_up.J[0]:.3e})")


def test_criterion_06_positivity_set_integral(report):
    values = [lemma6_check(f, 3) for f in random_lemma6_functions(50, h=0.005)]
    worst = max(values)
    report(6, len(values) == 50 and worst <= 1e-3, f"max over 50 functions = {worst:.3e}")


def test_criterion_07_upper_bound(report, euclidean_trajectory):
    c_m = default_cutoff_constant(3, h=0.01)
    c_half = default_cutoff_constant(3, h=0.005)
    viol = lemma7_check(euclidean_trajectory, 4.0, c_m)
    drift = abs(c_m - c_half) / abs(c_half)
    report(7, viol <= 5e-3 and drift <= 0.01,
           f"violation = {viol:.3e}, c_m = {c_m:.5g}, relative change on halving = {drift:.2e}")


def test_criterion_08_completeness(report):
    grid = RadialGrid.with_spacing(10.0, 0.02)
    res = exhaustion_run(euclidean_factor(grid), [6.0, 8.0, 10.0], 3.0, 1.0, 1e-3, 3)
    worst = float(np.max(6.0 * res.times[:, None] - res.window()))
    d = res.sup_differences
    decreasing = all(b < a for a, b in zip(d, d[1:]))
    report(8, worst <= 5e-3 and decreasing,
           f"max(6t - u) on B_3 = {worst:.3e}, d_k = {[f'{x:.3e}' for x in d]}")


def test_criterion_09_cutoff_estimates(report):
    grid = RadialGrid.with_spacing(50.0, 0.01)
    worst = -math.inf
    for eps in (0.05, 0.1, 0.4):
        for m in (3, 5):
            worst = max(worst, *theorem2_cutoff_check(eps, grid, m))
    report(9, worst <= 1e-8, f"largest sup = {worst:.3e}")


def test_criterion_10_form_equivalence(report):
    rng = np.random.default_rng(10)
    worst_ratio = math.inf
    for i in range(20):
        coeffs = rng.uniform(-0.6, 0.6, size=rng.integers(2, 5))
        m = int(rng.choice([3, 4, 5, 6, 10]))
        levels = [form_residuals(coeffs, m, n) for n in (80, 160, 320)]
        for key in levels[0]:
            errs = [lvl[key] for lvl in levels]
            if errs[0] < 1e-9:
                continue
            worst_ratio = min(worst_ratio, float(np.min(convergence_ratios(errs))))
    report(10, worst_ratio >= 3.5, f"smallest ratio per halving = {worst_ratio:.3f}")
