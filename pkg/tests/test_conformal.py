import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from yflow.conformal import euclidean_factor, from_U, pressure, scalar_curvature, to_U
from yflow.errors import DomainError
from yflow.geometry import RadialField, RadialGrid

from conftest import convergence_ratios

GRID = RadialGrid(3.0, 60)


def test_to_U_examples():
    np.testing.assert_array_equal(to_U(GRID.constant(1.0), 3).values, 1.0)
    np.testing.assert_allclose(to_U(GRID.constant(16.0), 3).values, 2.0, rtol=1e-15)


def test_from_U_examples():
    np.testing.assert_array_equal(from_U(GRID.constant(1.0), 3).values, 1.0)
    np.testing.assert_allclose(from_U(GRID.constant(2.0), 3).values, 16.0, rtol=1e-15)


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.floats(1e-6, 1e6), min_size=GRID.size, max_size=GRID.size),
    st.sampled_from([3, 4, 5, 6, 10]),
)
def test_power_map_round_trip(values, m):
    u = RadialField(GRID, np.array(values))
    back = from_U(to_U(u, m), m)
    np.testing.assert_allclose(back.values, u.values, rtol=1e-12)


@pytest.mark.parametrize("fn", [to_U, from_U])
def test_nonpositive_rejected(fn):
    vals = np.ones(GRID.size)
    vals[7] = 0.0
    with pytest.raises(DomainError, match="node 7"):
        fn(RadialField(GRID, vals), 3)


def test_pressure():
    np.testing.assert_array_equal(pressure(GRID.constant(1.0)).values, 1.0)
    v = pressure(GRID.constant(3 * 2 * 1.0 + 1))
    np.testing.assert_allclose(v.values, 1 / 7, rtol=1e-15)
    u = euclidean_factor(GRID)
    np.testing.assert_allclose(pressure(pressure(u)).values, u.values, rtol=1e-15)
    with pytest.raises(DomainError):
        pressure(GRID.constant(-1.0))


class TestScalarCurvature:
    def test_hyperbolic(self):
        np.testing.assert_allclose(scalar_curvature(GRID.constant(1.0), 3).values, -6.0, rtol=1e-14)

    @pytest.mark.parametrize("m", [3, 4, 5, 6, 10])
    @pytest.mark.parametrize("c", [0.01, 0.5, 1.0, 7.0, 1e3])
    def test_constant_law(self, m, c):
        R = scalar_curvature(GRID.constant(c), m).values
        np.testing.assert_allclose(R, -m * (m - 1) / c, rtol=1e-12)

    def test_flat_metric(self):
        # The Poincare-ball Euclidean metric is flat; max |R| -> 0 at second order.
        errs = []
        for n in (50, 100, 200, 400):
            g = RadialGrid(4.0, n)
            R = scalar_curvature(euclidean_factor(g), 3).values
            errs.append(np.max(np.abs(R[:-1])))
        assert errs[-1] < 0.02  # U^(-5) amplifies errors near r = 4
        assert np.all(convergence_ratios(errs) >= 3.5)


class TestEuclideanFactor:
    def test_origin(self):
        assert euclidean_factor(GRID).values[0] == 0.25

    def test_ball_model_identity(self):
        # g_H = 4 (1 - |x|^2)^-2 g_E with |x| = tanh(r/2)
        r = GRID.nodes
        x = np.tanh(r / 2)
        np.testing.assert_allclose(euclidean_factor(GRID).values, (1 - x**2) ** 2 / 4, rtol=1e-13)

    def test_strictly_decreasing(self):
        assert np.all(np.diff(euclidean_factor(RadialGrid(10.0, 500)).values) < 0)

    def test_value_at_six(self):
        g = RadialGrid.with_spacing(6.0, 0.02)
        assert euclidean_factor(g).values[-1] == pytest.approx(math.cosh(3.0) ** -4 / 4, rel=1e-14)
