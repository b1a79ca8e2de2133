import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robust_r2 import joint, simgen
from robust_r2.data import Dataset
from robust_r2.exceptions import DegenerateColumn, DegenerateResponse, DomainError

TRUE_INDIVIDUAL = np.array([1 / 9, 4 / 9])  # model Y = 0.5 + 0.5 X1 + X2 + eps


def test_exact_single_dependence():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((5000, 2))
    res = joint.individual_r2s(Dataset(x[:, 0], x))
    assert abs(res.r2_individual[0] - 1) < 1e-12
    assert res.r2_individual[1] < 0.002


def test_degenerate_inputs():
    x = np.column_stack([np.arange(6.0), np.ones(6)])
    with pytest.raises(DegenerateColumn) as info:
        joint.individual_r2s(Dataset(np.arange(6.0) ** 2, x))
    assert info.value.column == 1
    with pytest.raises(DegenerateResponse):
        joint.individual_r2s(Dataset(np.ones(6), x[:, :1]))


def test_zero_diagonal_gives_point_interval():
    res = joint.JointR2(
        np.array([0.2]), np.ones(1), np.ones(1), np.zeros((2, 2)), np.eye(2), np.zeros((1, 2)),
        np.zeros((1, 1)), 50,
    )
    (ci,) = joint.marginal_cis(res)
    assert ci.lower == ci.upper == 0.2
    with pytest.raises(DomainError):
        joint.marginal_cis(res, 1.5)


def test_ellipsoid_and_share():
    d, _ = simgen.generate("gaussian-linear", 500, 1)
    res = joint.individual_r2s(d)
    centre, cov = res.ellipsoid()
    np.testing.assert_array_equal(centre, res.r2_individual)
    np.testing.assert_allclose(cov, res.cov_hat / 500)
    np.testing.assert_allclose(res.share_of_total(0.5), res.r2_individual / 0.5)


def test_covariance_matches_gaussian_closed_form():
    # squared correlations of a Gaussian vector with rho = (1/3, 2/3) and
    # uncorrelated regressors: Var = 4 rho^2 (1 - rho^2)^2 and
    # Cov = -2 rho1^2 rho2^2 (1 - rho1^2 - rho2^2) = -32/729
    r1, r2 = 1 / 3, 2 / 3
    expected = np.array([
        [4 * r1**2 * (1 - r1**2) ** 2, -32 / 729],
        [-32 / 729, 4 * r2**2 * (1 - r2**2) ** 2],
    ])
    d, _ = simgen.generate("gaussian-linear", 1_000_000, 1)
    np.testing.assert_allclose(joint.individual_r2s(d).cov_hat, expected, atol=0.01)


@pytest.mark.slow
def test_covariance_matches_monte_carlo():
    # 20000 replicates: at 1000 the Monte Carlo error of the off-diagonal
    # entry alone is larger than a quarter of its size
    reps, n = 20_000, 2000
    draws, covs = [], []
    for r in range(reps):
        d, _ = simgen.generate("gaussian-linear", n, 0, (n, r))
        res = joint.individual_r2s(d)
        draws.append(np.sqrt(n) * (res.r2_individual - TRUE_INDIVIDUAL))
        if r % 100 == 0:
            covs.append(res.cov_hat)
    empirical = np.cov(np.array(draws).T, bias=True)
    mean_cov = np.mean(covs, axis=0)
    assert np.all(np.abs(empirical - mean_cov) <= 0.25 * np.abs(mean_cov))


@pytest.mark.slow
def test_coordinate_coverage():
    hits = 0
    for r in range(1000):
        d, _ = simgen.generate("gaussian-linear", 1000, 4, (1000, r))
        ci = joint.marginal_cis(joint.individual_r2s(d))[1]
        hits += ci.contains(TRUE_INDIVIDUAL[1])
    assert 0.92 <= hits / 1000 <= 0.97


def test_product_feature_matches_individual_with_known_means():
    d, _ = simgen.generate("gaussian-linear", 100_000, 6)
    known = joint.product_feature_r2(d, [0.0, 0.0], [(0,), (1,)])
    np.testing.assert_allclose(known, joint.individual_r2s(d).r2_individual, atol=0.01)
    emp = joint.product_feature_r2(d, None, [(0,), (1,)], empirical_centering=True)
    np.testing.assert_allclose(emp, joint.individual_r2s(d).r2_individual, atol=1e-12)


def test_product_feature_edge_cases():
    d, _ = simgen.generate("gaussian-linear", 50, 6)
    assert joint.product_feature_r2(d, [0.0, 0.0], []).shape == (0,)
    for bad in [(), (1, 0), (0, 0), (2,)]:
        with pytest.raises(DomainError):
            joint.product_feature_r2(d, [0.0, 0.0], [bad])
    with pytest.raises(DomainError):
        joint.product_features(d.x, [0.0], [(0,)])


def test_all_subsets_order():
    assert joint.all_subsets(3) == [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2), (0, 1, 2)]


@settings(max_examples=60, deadline=None)
@given(st.integers(8, 60), st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_individual_equals_squared_correlation(n, p, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p)) * rng.uniform(0.1, 10, p)
    y = x.sum(axis=1) + rng.standard_normal(n)
    res = joint.individual_r2s(Dataset(y, x))
    corr = np.array([np.corrcoef(x[:, k], y)[0, 1] ** 2 for k in range(p)])
    assert np.all(res.r2_individual >= -1e-12) and np.all(res.r2_individual <= 1 + 1e-12)
    np.testing.assert_allclose(res.r2_individual, corr, atol=1e-10, rtol=0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_covariance_permutation_equivariant(seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((40, 4))
    y = x[:, 0] - x[:, 2] + rng.standard_normal(40) * (1 + np.abs(x[:, 1]))
    perm = rng.permutation(4)
    a = joint.individual_r2s(Dataset(y, x)).cov_hat
    b = joint.individual_r2s(Dataset(y, x[:, perm])).cov_hat
    np.testing.assert_allclose(b, a[np.ix_(perm, perm)], atol=1e-9, rtol=0)


# balanced two-level factorial: centered products are exactly orthogonal
_LEVELS = np.array([[a, b, c] for a in (-1, 1) for b in (-1, 1) for c in (-1, 1)] * 3, dtype=float)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, _LEVELS.shape[0], elements=st.floats(-100, 100)))
def test_orthogonal_product_basis_sums_below_one(y):
    if np.var(y) < 1e-6:
        return
    d = Dataset(y, _LEVELS)
    vals = joint.product_feature_r2(d, [0.0, 0.0, 0.0], joint.all_subsets(3))
    assert vals.sum() <= 1 + 1e-6
