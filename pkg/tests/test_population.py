import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from oracles import square_disk_area
from supcoupling.errors import ConfigurationError
from supcoupling.function_class import FunctionClassSpec, Net, circle_grid
from supcoupling.population import Population, covariance_matrix, disk_square_area, first_moments


def _net(cls, members):
    members = np.atleast_2d(np.asarray(members, dtype=float))
    return Net(members, np.zeros(len(members)), 0.1, cls)


def test_quarter_disk_in_corner():
    assert disk_square_area(0.0, 0.0, 0.5) == pytest.approx(math.pi / 16, abs=1e-10)
    assert disk_square_area(0.5, 0.5, 0.25) == pytest.approx(math.pi / 16, abs=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(-0.5, 1.5), st.floats(-0.5, 1.5), st.floats(0.01, 1.5))
def test_disk_square_area_matches_quadrature(cx, cy, r):
    assert disk_square_area(cx, cy, r) == pytest.approx(square_disk_area(cx, cy, r), abs=1e-8)


def test_uniform_moments():
    pop = Population("uniform_cube", 3)
    np.testing.assert_allclose(pop.mean(), 0.5)
    np.testing.assert_allclose(pop.covariance(), np.eye(3) / 12)


def test_gaussian_halfspace_and_disk_probabilities():
    pop = Population("standard_gaussian", 2)
    hs = FunctionClassSpec("halfspace", 2)
    t = np.array([-1.0, 0.0, 0.7])
    P = np.column_stack([np.tile([1.0, 0.0], (3, 1)), t])
    np.testing.assert_allclose(first_moments(_net(hs, P), pop), stats.norm.cdf(t), atol=1e-12)
    ball = FunctionClassSpec("ball", 2, center_range=(-1, 1), radius_range=(0, 3))
    r = np.array([0.5, 1.0, 2.0])
    P = np.column_stack([np.zeros((3, 2)), r])
    np.testing.assert_allclose(first_moments(_net(ball, P), pop), 1 - np.exp(-r**2 / 2), atol=1e-10)


def test_disk_covariance_matches_monte_carlo():
    cls = FunctionClassSpec("ball", 2)
    P = np.array([[0.3, 0.3, 0.25], [0.5, 0.4, 0.3], [0.9, 0.9, 0.4]])
    pop = Population("uniform_cube", 2)
    net = _net(cls, P)
    C = covariance_matrix(net, pop)
    X = np.random.default_rng(0).uniform(size=(400_000, 2))
    V = cls.values(P, X)
    np.testing.assert_allclose(C, np.cov(V.T), atol=3e-3)
    m = first_moments(net, pop)
    np.testing.assert_allclose(np.diag(C), m * (1 - m), atol=1e-6)
    assert np.linalg.eigvalsh(C).min() > -1e-12


def test_linear_covariance_is_exact():
    pop = Population("uniform_cube", 2)
    cls = FunctionClassSpec("linear_sphere", 2)
    V = circle_grid(6)
    np.testing.assert_allclose(covariance_matrix(_net(cls, V), pop), V @ V.T / 12, atol=1e-14)


def test_tabulated_population_moments():
    table = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, 1.0]])
    probs = np.array([0.2, 0.3, 0.5])
    pop = Population("custom_tabulated", 1, probs=probs)
    cls = FunctionClassSpec("tabulated", 1, table=table)
    net = _net(cls, [[0.0], [1.0]])
    m = table @ probs
    np.testing.assert_allclose(first_moments(net, pop), m)
    expected = (table * probs) @ table.T - np.outer(m, m)
    np.testing.assert_allclose(covariance_matrix(net, pop), expected, atol=1e-14)


def test_dimension_mismatch_is_configuration_error():
    cls = FunctionClassSpec("ball", 2)
    with pytest.raises(ConfigurationError):
        first_moments(_net(cls, [[0.5, 0.5, 0.1]]), Population("uniform_cube", 3))


def test_sampling_is_seeded():
    pop = Population("standard_gaussian", 2)
    a = pop.sample(5, np.random.default_rng(3))
    b = pop.sample(5, np.random.default_rng(3))
    np.testing.assert_array_equal(a, b)
