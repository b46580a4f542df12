import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from supcoupling.errors import InputError
from supcoupling.function_class import FunctionClassSpec, Net, circle_grid
from supcoupling.population import Population
from supcoupling.process import (
    DataSample,
    SupSample,
    draw_data,
    empirical_bootstrap_sup,
    empirical_bootstrap_sups,
    empirical_sup,
    empirical_sups,
    mean_vector,
    multinomial_weights,
    multiplier_bootstrap_sup,
    multiplier_bootstrap_sups,
)


@pytest.fixture
def lin_net():
    return Net(circle_grid(8), np.zeros(8), 0.4, FunctionClassSpec("linear_sphere", 2))


def test_empirical_sup_by_hand(lin_net):
    X = np.array([[1.0, 0.0], [0.0, 2.0], [-1.0, 1.0]])
    data = DataSample(X, "standard_gaussian", seed=7)
    means = np.zeros(8)
    s = empirical_sup(data, lin_net, means)
    G = X.sum(axis=0) / math.sqrt(3)
    assert s.value == pytest.approx(max(v @ G for v in circle_grid(8)))
    assert s.kind == "Z" and s.conditioning_seed == 7


def test_multiplier_with_given_weights(lin_net):
    X = np.array([[1.0, 0.0], [0.0, 2.0], [-1.0, 1.0]])
    data = DataSample(X, "standard_gaussian")
    e = np.array([0.5, -1.0, 2.0])
    s = multiplier_bootstrap_sup(data, lin_net, None, multipliers=e)
    G = e @ (X - X.mean(axis=0)) / math.sqrt(3)
    assert s.value == pytest.approx(max(v @ G for v in circle_grid(8)))
    with pytest.raises(InputError):
        multiplier_bootstrap_sup(data, lin_net, None, multipliers=np.ones(2))


def test_empirical_bootstrap_unit_weights_gives_drift_max(lin_net):
    data = DataSample(np.random.default_rng(0).normal(size=(10, 2)), "standard_gaussian")
    net = Net(lin_net.members, np.linspace(-1, 0.3, 8), 0.4, lin_net.class_ref)
    s = empirical_bootstrap_sup(data, net, None, weights=np.ones(10))
    assert s.value == pytest.approx(0.3)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 300), st.integers(0, 2**32 - 1))
def test_multinomial_weights_are_counts(n, seed):
    w = multinomial_weights(n, seed)
    assert w.shape == (n,)
    assert w.sum() == n
    assert np.all(w >= 0)
    np.testing.assert_array_equal(w, multinomial_weights(n, seed))


def test_sup_sample_validation():
    with pytest.raises(InputError):
        SupSample(float("nan"), "Z")
    with pytest.raises(InputError):
        SupSample(1.0, "W")


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (12, 4), elements=st.floats(-3, 3)), st.integers(0, 1000))
def test_bootstrap_sups_scale_equivariance(V, seed):
    base_m = multiplier_bootstrap_sups(V, np.zeros(4), 50, seed)
    np.testing.assert_allclose(multiplier_bootstrap_sups(2 * V, np.zeros(4), 50, seed), 2 * base_m,
                               rtol=1e-12, atol=1e-12)
    base_e = empirical_bootstrap_sups(V, np.zeros(4), 50, seed)
    np.testing.assert_allclose(empirical_bootstrap_sups(2 * V, np.zeros(4), 50, seed), 2 * base_e,
                               rtol=1e-12, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (12, 3), elements=st.floats(-3, 3)),
       arrays(np.float64, (3,), elements=st.floats(-5, 5)), st.integers(0, 1000))
def test_multiplier_bootstrap_ignores_column_shifts(V, shift, seed):
    a = multiplier_bootstrap_sups(V, np.zeros(3), 40, seed)
    b = multiplier_bootstrap_sups(V + shift, np.zeros(3), 40, seed)
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_multiplier_bootstrap_conditional_law_single_column():
    # with one column, Z^e given the data is exactly N(0, sample variance)
    x = np.random.default_rng(1).normal(size=(200, 1))
    Z = multiplier_bootstrap_sups(x, np.zeros(1), 40_000, 3)
    var = x.var()
    assert Z.mean() == pytest.approx(0.0, abs=4 * math.sqrt(var / 40_000))
    assert Z.var() == pytest.approx(var, rel=0.03)


def test_empirical_bootstrap_conditional_moments_single_column():
    x = np.random.default_rng(2).normal(size=(150, 1))
    Z = empirical_bootstrap_sups(x, np.zeros(1), 40_000, 4)
    # E[sum (N_i - 1) x_i] = 0 and Var = sum x_i^2 - n xbar^2 = n var(x), scaled by 1/n
    assert Z.mean() == pytest.approx(0.0, abs=4 * math.sqrt(x.var() / 40_000))
    assert Z.var() == pytest.approx(x.var(), rel=0.03)


def test_empirical_sups_match_single_draw_law(lin_net):
    pop = Population("uniform_cube", 2)
    means = mean_vector(lin_net, pop)
    Z = empirical_sups(lin_net, pop, means, 30, 4000, seed=5)
    singles = [empirical_sup(draw_data(pop, 30, s), lin_net, means).value for s in range(1500)]
    from supcoupling.coupling import kolmogorov_distance, ks_band

    assert kolmogorov_distance(Z, singles) <= ks_band(4000, 1500)


def test_batch_functions_are_deterministic(lin_net):
    pop = Population("standard_gaussian", 2)
    means = mean_vector(lin_net, pop)
    np.testing.assert_array_equal(empirical_sups(lin_net, pop, means, 20, 100, 9),
                                  empirical_sups(lin_net, pop, means, 20, 100, 9))


def test_draw_data_rejects_zero_n():
    with pytest.raises(InputError):
        draw_data(Population("uniform_cube", 2), 0, 1)


@settings(max_examples=25, deadline=None)
@given(arrays(np.float64, (10, 3), elements=st.floats(-3, 3)), st.floats(-4, 4), st.integers(0, 1000))
def test_empirical_bootstrap_ignores_common_constant(V, c, seed):
    a = empirical_bootstrap_sups(V, np.zeros(3), 40, seed)
    b = empirical_bootstrap_sups(V + c, np.zeros(3), 40, seed)
    np.testing.assert_allclose(a, b, atol=1e-9)


def test_adding_a_member_never_lowers_the_sup():
    rng = np.random.default_rng(3)
    V = rng.normal(size=(30, 5))
    drift = rng.normal(size=5)
    for sampler in (multiplier_bootstrap_sups, empirical_bootstrap_sups):
        small = sampler(V[:, :4], drift[:4], 200, 11)
        big = sampler(V, drift, 200, 11)
        assert np.all(big >= small - 1e-12)
    means = np.zeros(5)
    from supcoupling.process import empirical_sup_from_values

    assert empirical_sup_from_values(V, drift, means) >= empirical_sup_from_values(V[:, :4], drift[:4], means[:4])


def test_single_draw_determinism(lin_net):
    pop = Population("standard_gaussian", 2)
    data = draw_data(pop, 40, 3)
    a = multiplier_bootstrap_sup(data, lin_net, 17).value
    b = multiplier_bootstrap_sup(draw_data(pop, 40, 3), lin_net, 17).value
    assert a == b
    assert empirical_bootstrap_sup(data, lin_net, 5).value == empirical_bootstrap_sup(data, lin_net, 5).value
