import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from oracles import abs_third_moment_std_normal, delta_oracle, kn_oracle
from supcoupling.bounds import (
    ClassParams,
    anticoncentration_bound,
    compute_Kn,
    cov_discrepancy,
    delta_rate,
    gaussian_tail_term,
    levy_concentration_mc,
    nazarov_density_bound,
    third_moment_terms,
)
from supcoupling.errors import InputError
from supcoupling.gaussian import CovarianceModel

PARAMS = [
    dict(v=1, A_const=math.e, b=1, sigma=1, q=4, n=2048),
    dict(v=2, A_const=10, b=2, sigma=0.5, q=8, n=10**5, N_B_eta=7, gamma=0.1),
    dict(v=4, A_const=1e4, b=3, sigma=3, q=4, n=50, gamma=0.9),
    dict(v=1.5, A_const=3.3, b=1, sigma=0.01, q=1e6, n=10**7, N_B_eta=2.5),
    dict(v=10, A_const=math.e, b=5, sigma=2, q=12, n=2**20, N_B_eta=1000, gamma=0.25),
]


@pytest.mark.parametrize("kw", PARAMS)
def test_kn_matches_decimal_oracle(kw):
    p = ClassParams(**kw)
    ref = kn_oracle(p.N_B_eta, p.v, p.n, p.A_const, p.b, p.sigma)
    assert compute_Kn(p) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("kw", PARAMS)
@pytest.mark.parametrize("which", ["d1", "d2", "d3"])
def test_deltas_match_decimal_oracle(kw, which):
    p = ClassParams(**kw)
    kn = compute_Kn(p)
    ref = delta_oracle(which, p.b, p.sigma, kn, p.n, p.q, p.gamma)
    assert delta_rate(p, which).value == pytest.approx(ref, rel=1e-10)


def test_d3_dominates_d1_and_d2_terms():
    p = ClassParams(**PARAMS[0])
    d1, d2, d3 = (delta_rate(p, w).value for w in ("d1", "d2", "d3"))
    assert d3 >= d1 and d3 >= d2


@pytest.mark.parametrize("which", ["d1", "d2", "d3"])
def test_delta_decreasing_in_n(which):
    vals = [delta_rate(ClassParams(v=1, A_const=math.e, b=1, sigma=1, q=4, n=2**k), which).value
            for k in range(7, 21)]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_side_condition_flag():
    small = delta_rate(ClassParams(v=4, A_const=math.e, b=1, sigma=1, q=4, n=100), "d1")
    assert not small.side_condition_ok
    big = delta_rate(ClassParams(v=1, A_const=math.e, b=1, sigma=1, q=4, n=10**6), "d1")
    assert big.side_condition_ok
    assert delta_rate(ClassParams(v=4, A_const=math.e, b=1, sigma=1, q=4, n=100), "d2").side_condition_ok


@pytest.mark.parametrize(
    "bad",
    [dict(v=0.5), dict(A_const=2.0), dict(sigma=2.0), dict(q=3), dict(gamma=1.5), dict(gamma=0.0), dict(n=0)],
)
def test_class_params_validation(bad):
    kw = dict(v=1, A_const=math.e, b=1, sigma=1, q=4, n=100)
    kw.update(bad)
    with pytest.raises(InputError):
        ClassParams(**kw)


def test_third_moment_of_standard_normal():
    X = np.random.default_rng(0).standard_normal((400_000, 2))
    out = third_moment_terms(X, 1.0)
    assert out["L_n"] == pytest.approx(abs_third_moment_std_normal(), rel=0.02)
    assert out["threshold"] == pytest.approx(math.sqrt(400_000) / math.log(2))
    assert out["M_nX"] == 0.0
    assert third_moment_terms(X, 1.0, threshold=0.0)["M_nX"] > out["L_n"]


def test_third_moment_needs_two_columns():
    with pytest.raises(InputError):
        third_moment_terms(np.ones((5, 1)), 1.0)


def test_gaussian_tail_term_limits():
    model = CovarianceModel.from_cov(np.zeros(1), np.eye(1))
    zero_thr = gaussian_tail_term(model, 1.0, 100, 10**5, seed=1, threshold=0.0)
    assert zero_thr["M_nY"] == pytest.approx(abs_third_moment_std_normal(), abs=4 * zero_thr["se"])
    assert gaussian_tail_term(model, 1.0, 100)["M_nY"] == 0.0
    with pytest.raises(InputError):
        gaussian_tail_term(model, 1.0, 100, mc_draws=10)


def test_cov_discrepancy():
    assert cov_discrepancy(np.eye(2), [[1.0, 0.3], [0.3, 0.8]]) == pytest.approx(0.3)


def test_nazarov_formula_and_scaling():
    assert nazarov_density_bound(1, 1.0, 0.1) == pytest.approx(0.4)
    b = nazarov_density_bound(10, 0.5, 0.05)
    assert b == pytest.approx(2 * 0.05 / 0.5 * (math.sqrt(2 * math.log(10)) + 2))
    assert nazarov_density_bound(10, 0.5, 0.1) == pytest.approx(2 * b)


def test_levy_concentration_one_dimensional():
    eps = 0.2
    out = levy_concentration_mc([0.0], [[1.0]], eps, draws=200_000, seed=3)
    exact = 2 * stats.norm.cdf(eps) - 1
    assert out["prob"] == pytest.approx(exact, abs=4 * out["se"] + 2e-3)
    assert abs(out["t"]) < 0.1


@settings(max_examples=50, deadline=None)
@given(st.floats(0.1, 3), st.floats(0, 1), st.floats(0, 1), st.integers(1, 10**6), st.floats(0, 0.5))
def test_anticoncentration_bound_monotone_in_epsilon(sig, eps, phi, N, delta):
    grid = np.linspace(0, 10, 101)
    lo = anticoncentration_bound(sig, eps, phi, N, delta, grid)
    hi = anticoncentration_bound(sig, eps + 0.1, phi, N, delta, grid)
    assert hi >= lo
    # r = 0 is in the grid, so the bound never exceeds the no-discretisation value + 1
    assert lo <= 2 / sig * (eps + phi) * (math.sqrt(2 * math.log(N)) + 2) + 1 + 1e-12


def test_anticoncentration_with_zero_delta_reduces_to_nazarov():
    grid = np.linspace(0, 20, 2001)
    val = anticoncentration_bound(0.8, 0.05, 0.0, 30, 0.0, grid)
    assert val == pytest.approx(nazarov_density_bound(30, 0.8, 0.05) + math.exp(-200), rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(1, 20), st.floats(math.e, 1e6), st.floats(0.1, 10), st.integers(2, 10**8), st.floats(1, 1e4))
def test_kn_at_least_v_log_n(v, A, b, n, NB):
    p = ClassParams(v=v, A_const=A, b=b, sigma=b, q=4, n=n, N_B_eta=NB)
    assert compute_Kn(p) >= v * math.log(n) - 1e-9


def test_tail_term_nonincreasing_in_delta():
    X = np.random.default_rng(5).standard_t(4, size=(2000, 6))
    vals = [third_moment_terms(X, d)["M_nX"] for d in (0.01, 0.05, 0.1, 0.2, 0.5)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert len({third_moment_terms(X, d)["L_n"] for d in (0.01, 0.5)}) == 1
