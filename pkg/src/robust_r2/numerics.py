"""Dense linear algebra and distribution quantiles.

Every matrix that needs inverting in this package is a Gram matrix, so all
solves go through a Cholesky factorization.  A failed factorization is the
empirical signature of a rank-deficient design and is reported, never
regularized away.
"""

from __future__ import annotations

import numpy as np
from scipy import linalg, special

from .exceptions import DomainError, NotPositiveDefinite

__all__ = [
    "cholesky",
    "solve_spd",
    "invert_spd",
    "normal_cdf",
    "normal_quantile",
    "student_quantile",
    "chi2_sf",
    "toeplitz_corr",
]

_EPS = np.finfo(float).eps


def _as_square(a):
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix has non-finite entries")
    scale = np.max(np.abs(a)) if a.size else 0.0
    if scale > 0 and np.max(np.abs(a - a.T)) > 1e-10 * scale:
        raise DomainError("matrix is not symmetric")
    return a


def cholesky(a):
    """Lower-triangular Cholesky factor of a symmetric positive definite matrix.

    The matrix is first scaled to unit diagonal so that the singularity test
    does not depend on the units of the underlying variables.  A pivot of the
    scaled matrix below ``rows * eps`` raises :class:`NotPositiveDefinite`.
    """
    a = _as_square(a)
    d = a.shape[0]
    diag = np.diag(a).copy()
    if d == 0:
        return np.zeros((0, 0))
    if np.any(diag <= 0):
        raise NotPositiveDefinite("non-positive diagonal entry")
    s = 1.0 / np.sqrt(diag)
    scaled = a * s[:, None] * s[None, :]
    try:
        ls = np.linalg.cholesky(scaled)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(ls) ** 2
    if np.min(pivots) <= d * _EPS * np.max(np.diag(scaled)):
        raise NotPositiveDefinite(
            f"pivot {np.min(pivots):.3g} below singularity threshold"
        )
    return ls / s[:, None]


def solve_spd(a, b, *, factor=None):
    """Solve ``a @ x = b`` for symmetric positive definite ``a``."""
    low = cholesky(a) if factor is None else factor
    b = np.asarray(b, dtype=float)
    y = linalg.solve_triangular(low, b, lower=True)
    return linalg.solve_triangular(low.T, y, lower=False)


def invert_spd(a):
    a = np.asarray(a, dtype=float)
    inv = solve_spd(a, np.eye(a.shape[0]))
    return 0.5 * (inv + inv.T)


def _check_prob(p):
    arr = np.asarray(p, dtype=float)
    if np.any(~(arr > 0) | ~(arr < 1)):
        raise DomainError("probability must lie strictly between 0 and 1")
    return arr


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def normal_cdf(x):
    return _scalar_or_array(special.ndtr(np.asarray(x, dtype=float)))


def normal_quantile(p):
    """Quantile function of N(0, 1); accepts scalars or arrays."""
    return _scalar_or_array(special.ndtri(_check_prob(p)))


def student_quantile(p, df):
    """Quantile of the Student distribution with ``df`` degrees of freedom."""
    arr = _check_prob(p)
    if not df >= 1:
        raise DomainError("degrees of freedom must be at least 1")
    return _scalar_or_array(special.stdtrit(float(df), arr))


def chi2_sf(x, df):
    """Upper tail probability of the chi-square distribution."""
    if df < 1:
        raise DomainError("degrees of freedom must be at least 1")
    return float(special.chdtrc(df, max(float(x), 0.0)))


def toeplitz_corr(rho, d):
    """Correlation matrix with entries ``rho ** |i - j|``."""
    if not -1 < rho < 1:
        raise DomainError("rho must lie strictly between -1 and 1")
    if int(d) != d or d < 1:
        raise DomainError("dimension must be a positive integer")
    return linalg.toeplitz(float(rho) ** np.arange(int(d)))
