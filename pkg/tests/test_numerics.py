import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from robust_r2 import numerics as nm
from robust_r2.exceptions import DomainError, NotPositiveDefinite


def random_spd(rng, d):
    a = rng.standard_normal((d, d))
    return a @ a.T + d * np.eye(d)


def test_cholesky_small_example():
    low = nm.cholesky(np.array([[4.0, 2.0], [2.0, 5.0]]))
    np.testing.assert_allclose(low, [[2.0, 0.0], [1.0, 2.0]], atol=1e-14)
    np.testing.assert_allclose(low @ low.T, [[4.0, 2.0], [2.0, 5.0]], atol=1e-14)


def test_cholesky_rejects_singular():
    with pytest.raises(NotPositiveDefinite):
        nm.cholesky(np.array([[1.0, 1.0], [1.0, 1.0]]))


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        nm.cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))


@pytest.mark.parametrize(
    "bad",
    [np.ones((2, 3)), np.array([[1.0, 0.5], [0.0, 1.0]]), np.array([[np.nan, 0.0], [0.0, 1.0]])],
)
def test_cholesky_domain_errors(bad):
    with pytest.raises(DomainError):
        nm.cholesky(bad)


def test_cholesky_is_unit_invariant():
    # badly scaled but well conditioned after rescaling columns
    s = np.diag([1e-6, 1.0, 1e6])
    a = s @ np.array([[2.0, 0.3, 0.1], [0.3, 1.0, 0.2], [0.1, 0.2, 1.5]]) @ s
    low = nm.cholesky(a)
    np.testing.assert_allclose(low @ low.T, a, rtol=1e-12, atol=0)


def test_solve_spd_residual():
    rng = np.random.default_rng(0)
    a = random_spd(rng, 5)
    b = rng.standard_normal(5)
    x = nm.solve_spd(a, b)
    assert np.linalg.norm(a @ x - b) / np.linalg.norm(b) < 1e-8


def test_invert_identity_and_product():
    np.testing.assert_array_equal(nm.invert_spd(np.eye(3)), np.eye(3))
    a = random_spd(np.random.default_rng(1), 4)
    np.testing.assert_allclose(nm.invert_spd(a) @ a, np.eye(4), atol=1e-8)


@given(st.integers(1, 8), st.integers(0, 2**32 - 1))
def test_invert_spd_property(d, seed):
    a = random_spd(np.random.default_rng(seed), d)
    prod = nm.invert_spd(a) @ a
    assert np.linalg.norm(prod - np.eye(d)) / np.sqrt(d) < 1e-8


@given(arrays(np.float64, (4, 4), elements=st.floats(-10, 10)))
def test_cholesky_reconstructs_any_gram(m):
    a = m @ m.T + np.eye(4)
    low = nm.cholesky(a)
    assert np.allclose(np.triu(low, 1), 0)
    np.testing.assert_allclose(low @ low.T, a, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("p, expected", [(0.975, 1.959964), (0.925, 1.439531)])
def test_normal_quantile_examples(p, expected):
    oracle = oracles.bisect(oracles.normal_cdf_quad, p)
    assert abs(oracle - expected) < 1e-6
    assert abs(nm.normal_quantile(p) - oracle) < 1e-10


def test_student_quantile_example():
    oracle = oracles.bisect(lambda t: oracles.student_cdf_quad(t, 10), 0.975)
    assert abs(oracle - 2.228139) < 1e-6
    assert abs(nm.student_quantile(0.975, 10) - oracle) < 1e-10


def test_normal_quantile_cdf_round_trip():
    grid = np.arange(1, 1000) / 1000
    for p in grid:
        assert abs(nm.normal_cdf(nm.normal_quantile(p)) - p) < 1e-10


def test_student_quantile_tends_to_normal():
    z = nm.normal_quantile(0.975)
    gaps = [nm.student_quantile(0.975, df) - z for df in (10, 100, 1000, 10000)]
    assert all(g > 0 for g in gaps)
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_quantile_domain(p):
    with pytest.raises(DomainError):
        nm.normal_quantile(p)
    with pytest.raises(DomainError):
        nm.student_quantile(p, 5)


def test_student_quantile_df_domain():
    with pytest.raises(DomainError):
        nm.student_quantile(0.9, 0)


def test_chi2_sf():
    assert nm.chi2_sf(0.0, 3) == 1.0
    assert abs(nm.chi2_sf(3.841458820694124, 1) - 0.05) < 1e-12


def test_toeplitz_examples():
    np.testing.assert_array_equal(nm.toeplitz_corr(0.0, 3), np.eye(3))
    t = nm.toeplitz_corr(0.57, 5)
    assert abs(t[0, 2] - 0.57**2) < 1e-15
    nm.cholesky(nm.toeplitz_corr(0.7, 10))


@settings(max_examples=20, deadline=None)
@given(st.floats(-0.95, 0.95), st.integers(1, 1000))
def test_toeplitz_always_factorizes(rho, d):
    nm.cholesky(nm.toeplitz_corr(rho, d))
