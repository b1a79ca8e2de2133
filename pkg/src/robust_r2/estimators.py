"""scikit-learn style wrappers over the functional core.

Each estimator validates its inputs with sklearn helpers and stores the
result of the matching module function in trailing-underscore attributes.
"""

from __future__ import annotations

from sklearn.base import BaseEstimator, RegressorMixin, TransformerMixin
from sklearn.feature_selection import SelectorMixin
from sklearn.utils.validation import check_is_fitted, check_X_y, validate_data

from . import joint, ols, partial, r2, screening
from .data import Dataset

__all__ = ["RobustOLS", "R2Estimator", "IndividualR2", "PartialR2", "MarginalScreener"]


def _dataset(est, X, y):
    X, y = validate_data(est, X, y, y_numeric=True, ensure_min_samples=3)
    return Dataset(y, X)


class RobustOLS(RegressorMixin, BaseEstimator):
    """Least squares with an intercept and a heteroscedasticity-robust covariance."""

    def fit(self, X, y):
        res = ols.fit(_dataset(self, X, y))
        self.fit_ = res
        self.intercept_ = float(res.alpha[0])
        self.coef_ = res.alpha[1:].copy()
        self.sandwich_ = res.sandwich
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        X = validate_data(self, X, reset=False)
        return self.intercept_ + X @ self.coef_

    def wald_test(self, indices):
        """Robust Wald test that the coefficients at ``indices`` vanish (0 = intercept)."""
        check_is_fitted(self, "fit_")
        return ols.wald_test(self.fit_, indices)


class R2Estimator(BaseEstimator):
    """Point estimate and robust confidence interval for the population R^2."""

    def __init__(self, delta=0.05, quantile="student"):
        self.delta = delta
        self.quantile = quantile

    def fit(self, X, y):
        inf = r2.estimate(_dataset(self, X, y))
        self.inference_ = inf
        self.r2_ = inf.r2_hat
        self.v_hat_ = inf.v_hat
        self.degeneracy_ = r2.degeneracy_check(inf)
        return self

    def confidence_interval(self):
        check_is_fitted(self, "inference_")
        return r2.confidence_interval(self.inference_, self.delta, self.quantile)

    def score(self, X=None, y=None):
        check_is_fitted(self, "r2_")
        return self.r2_


class IndividualR2(BaseEstimator):
    """Squared correlations of Y with each column and their joint covariance."""

    def __init__(self, delta=0.05):
        self.delta = delta

    def fit(self, X, y):
        res = joint.individual_r2s(_dataset(self, X, y))
        self.result_ = res
        self.r2_individual_ = res.r2_individual
        self.cov_ = res.cov_hat
        return self

    def confidence_intervals(self):
        check_is_fitted(self, "result_")
        return joint.marginal_cis(self.result_, self.delta)


class PartialR2(BaseEstimator):
    """Partial R^2 of the first column of ``X`` with ``y`` given the remaining columns."""

    def __init__(self, delta=0.05, quantile="student"):
        self.delta = delta
        self.quantile = quantile

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True, ensure_min_samples=3)
        self.n_features_in_ = X.shape[1]
        z = X[:, 1:] if X.shape[1] > 1 else None
        inf = partial.partial_r2(X[:, 0], y, z)
        self.inference_ = inf
        self.r2_partial_ = inf.r2_partial
        self.v_hat_ = inf.v_hat
        return self

    def confidence_interval(self):
        check_is_fitted(self, "inference_")
        return partial.partial_r2_ci(self.inference_, self.delta, self.quantile)


class MarginalScreener(SelectorMixin, TransformerMixin, BaseEstimator):
    """Keep the columns whose studentized marginal slope exceeds the normal threshold."""

    def __init__(self, q=0.15):
        self.q = q

    def fit(self, X, y):
        X, y = validate_data(self, X, y, y_numeric=True, ensure_min_samples=3)
        res = screening.screen(X, y, self.q)
        self.result_ = res
        self.statistics_ = res.statistics
        self.threshold_ = res.threshold
        return self

    def _get_support_mask(self):
        check_is_fitted(self, "result_")
        return self.result_.support_mask()
