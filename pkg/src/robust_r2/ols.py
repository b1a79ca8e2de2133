"""Least squares with White's heteroscedasticity-consistent covariance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, NotPositiveDefinite, SingularDesign, SingularSubcovariance
from .numerics import chi2_sf, cholesky, solve_spd

__all__ = ["OlsFit", "WaldResult", "fit", "wald_test", "design_with_intercept"]


@dataclass(frozen=True, eq=False)
class OlsFit:
    """Result of :func:`fit`.

    Attributes
    ----------
    alpha : ndarray of shape (p + 1,)
        Coefficients, intercept first.
    residuals : ndarray of shape (n,)
    m_hat : ndarray of shape (p + 1, p + 1)
        ``X'X / n`` for the design with the ones column prepended.
    m_eps_hat : ndarray of shape (p + 1, p + 1)
        ``sum_i x_i x_i' e_i^2 / n``.
    sandwich : ndarray of shape (p + 1, p + 1)
        ``m_hat^-1 m_eps_hat m_hat^-1``, the asymptotic covariance of
        ``sqrt(n) (alpha_hat - alpha)``.
    n : int
    """

    alpha: np.ndarray
    residuals: np.ndarray
    m_hat: np.ndarray
    m_eps_hat: np.ndarray
    sandwich: np.ndarray
    n: int

    def standard_errors(self):
        return np.sqrt(np.diag(self.sandwich) / self.n)


@dataclass(frozen=True)
class WaldResult:
    statistic: float
    df: int
    p_value: float


def design_with_intercept(x):
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    return np.column_stack([np.ones(x.shape[0]), x])


def fit(d):
    """Ordinary least squares of ``d.y`` on ``(1, d.x)`` with sandwich covariance."""
    d.require_rows()
    xd = design_with_intercept(d.x)
    n = xd.shape[0]
    m_hat = xd.T @ xd / n
    try:
        low = cholesky(m_hat)
    except NotPositiveDefinite as exc:
        raise SingularDesign(f"design is rank deficient: {exc}") from None
    alpha = solve_spd(m_hat, xd.T @ d.y / n, factor=low)
    residuals = d.y - xd @ alpha
    weighted = xd * residuals[:, None]
    m_eps_hat = weighted.T @ weighted / n
    m_inv = solve_spd(m_hat, np.eye(xd.shape[1]), factor=low)
    sandwich = m_inv @ m_eps_hat @ m_inv
    sandwich = 0.5 * (sandwich + sandwich.T)
    return OlsFit(alpha, residuals, m_hat, m_eps_hat, sandwich, n)


def wald_test(result, indices):
    """Robust Wald test of ``alpha_i = 0`` for all ``i`` in ``indices``.

    Positions count from 0 (the intercept).  The statistic is asymptotically
    chi-square with ``len(indices)`` degrees of freedom under the null.
    """
    idx = sorted(set(int(i) for i in indices))
    if not idx:
        raise DomainError("indices must be non-empty")
    if idx[0] < 0 or idx[-1] >= result.alpha.shape[0]:
        raise DomainError(f"indices must lie in 0..{result.alpha.shape[0] - 1}")
    sub = result.alpha[idx]
    v_k = result.sandwich[np.ix_(idx, idx)]
    try:
        low = cholesky(v_k)
    except NotPositiveDefinite as exc:
        raise SingularSubcovariance(str(exc)) from None
    xi = np.linalg.solve(low, np.sqrt(result.n) * sub)
    stat = float(xi @ xi)
    return WaldResult(statistic=stat, df=len(idx), p_value=chi2_sf(stat, len(idx)))
