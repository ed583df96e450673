import numpy as np
import pytest

from yflow.conformal import euclidean_factor
from yflow.geometry import RadialGrid
from yflow.solver import DirichletProblem, solve_dirichlet


def convergence_ratios(errors):
    errors = np.asarray(errors, dtype=float)
    return errors[:-1] / errors[1:]


@pytest.fixture(scope="session")
def euclidean_trajectory():
    """m = 3, k = 6, T = 1 run from the flat metric at h = 0.02, dt = 1e-3."""
    grid = RadialGrid.with_spacing(6.0, 0.02)
    problem = DirichletProblem.from_raw(euclidean_factor(grid), 6.0, 3, 1.0)
    return solve_dirichlet(problem, 1e-3)
