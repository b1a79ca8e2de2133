import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from robust_r2 import ols, simgen
from robust_r2.data import Dataset, empirical_var
from robust_r2.exceptions import DomainError, SingularDesign, SingularSubcovariance


def test_alpha_matches_exact_normal_equations():
    x = [[1], [2], [3], [4], [5], [6]]
    y = [1, 3, 2, 5, 4, 6]
    exact = oracles.exact_ols(x, y)
    fit = ols.fit(Dataset(y, x))
    np.testing.assert_allclose(fit.alpha, [float(v) for v in exact], atol=1e-12)


def test_model_coefficients_recovered():
    d, truth = simgen.generate("gaussian-linear", 100_000, 11)
    fit = ols.fit(d)
    assert np.max(np.abs(fit.alpha - truth.true_alpha)) < 0.02


def test_singular_design():
    x = np.column_stack([np.arange(8.0), 2 * np.arange(8.0)])
    with pytest.raises(SingularDesign):
        ols.fit(Dataset(np.arange(8.0) ** 2, x))


def test_exact_fit_has_zero_sandwich():
    x = np.arange(8.0)[:, None]
    fit = ols.fit(Dataset(np.arange(8.0), x))
    assert np.all(fit.residuals == 0)
    assert np.all(fit.m_eps_hat == 0) and np.all(fit.sandwich == 0)


def test_wald_zero_coefficient():
    # y symmetric in x around its mean: the slope is exactly 0
    x = np.array([[-2.0], [-1.0], [0.0], [1.0], [2.0]])
    y = np.array([4.0, 1.0, 0.0, 1.0, 4.0])
    res = ols.wald_test(ols.fit(Dataset(y, x)), [1])
    assert res.statistic == 0.0 and res.p_value == 1.0 and res.df == 1


def test_wald_duplicate_indices_collapse():
    d, _ = simgen.generate("gaussian-linear", 200, 1)
    fit = ols.fit(d)
    assert ols.wald_test(fit, [1, 1]) == ols.wald_test(fit, [1])


def test_wald_index_validation():
    fit = ols.fit(Dataset(np.arange(6.0) ** 2, np.arange(6.0)[:, None]))
    for bad in ([], [2], [-1]):
        with pytest.raises(DomainError):
            ols.wald_test(fit, bad)


def test_wald_singular_subcovariance():
    x = np.arange(8.0)[:, None]
    fit = ols.fit(Dataset(np.arange(8.0), x))
    with pytest.raises(SingularSubcovariance):
        ols.wald_test(fit, [1])


@settings(max_examples=50, deadline=None)
@given(st.integers(5, 40), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_residuals_orthogonal_to_design(n, p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n + p, p)) * rng.uniform(0.1, 100, p)
    y = rng.standard_normal(n + p) * 5 + x @ rng.standard_normal(p)
    fit = ols.fit(Dataset(y, x))
    design = ols.design_with_intercept(x)
    scale = np.abs(design).max(axis=0) * (np.abs(y).max() + 1)
    assert np.all(np.abs(design.T @ fit.residuals) <= 1e-8 * (n + p) * scale)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sandwich_invariant_to_row_order(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((30, 3))
    y = x[:, 0] + rng.standard_normal(30) * (1 + x[:, 1] ** 2)
    perm = rng.permutation(30)
    a = ols.fit(Dataset(y, x)).sandwich
    b = ols.fit(Dataset(y[perm], x[perm])).sandwich
    np.testing.assert_allclose(a, b, rtol=1e-8, atol=1e-12 * np.abs(a).max())


def test_consistency_across_sample_sizes():
    wins = 0
    for s in range(20):
        small, truth = simgen.generate("gaussian-linear", 1000, s, (1,))
        big, _ = simgen.generate("gaussian-linear", 10_000, s, (2,))
        e_small = np.linalg.norm(ols.fit(small).alpha - truth.true_alpha)
        e_big = np.linalg.norm(ols.fit(big).alpha - truth.true_alpha)
        wins += e_big < e_small
    assert wins >= 16


def test_homoscedastic_agreement():
    d, _ = simgen.generate("gaussian-linear", 100_000, 4)
    fit = ols.fit(d)
    classical = empirical_var(fit.residuals) * np.linalg.inv(fit.m_hat)
    assert np.max(np.abs(fit.sandwich - classical) / np.abs(classical).max()) < 0.02


def test_standard_errors():
    d, _ = simgen.generate("gaussian-linear", 2000, 8)
    fit = ols.fit(d)
    np.testing.assert_allclose(fit.standard_errors(), np.sqrt(np.diag(fit.sandwich) / d.n))


@pytest.mark.slow
def test_wald_size_under_null():
    from robust_r2.montecarlo import wald_size_experiment

    rate = wald_size_experiment(500, 2000, 0.05, base_seed=0, workers=1)
    assert 0.035 <= rate <= 0.07
