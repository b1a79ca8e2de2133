"""Joint inference for the individual (single-covariate) R^2's.

``R2_(k) = tau_k * theta_k`` where ``tau_k`` is the marginal slope of Y on
X^(k) and ``theta_k`` the slope of X^(k) on Y.  The vector
``sqrt(n) ([tau:theta] - truth)`` is asymptotically ``N(0, D C D)`` and the
delta method through ``H`` gives the covariance ``H D C D H'`` of the
individual R^2's.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .data import Dataset, center
from .exceptions import DegenerateColumn, DegenerateResponse, DomainError
from .r2 import interval_from_variance

__all__ = [
    "JointR2",
    "individual_r2s",
    "marginal_cis",
    "product_feature_r2",
    "product_features",
    "all_subsets",
]


@dataclass(frozen=True, eq=False)
class JointR2:
    r2_individual: np.ndarray
    tau_hat: np.ndarray
    theta_hat: np.ndarray
    c_hat: np.ndarray
    d_hat: np.ndarray
    h_hat: np.ndarray
    cov_hat: np.ndarray
    n: int

    def ellipsoid(self):
        """Centre and covariance ``cov_hat / n`` of the confidence ellipsoid."""
        return self.r2_individual.copy(), self.cov_hat / self.n

    def share_of_total(self, r2_total):
        """Point estimates of ``R2_(k) / R^2``; no interval is attached."""
        return self.r2_individual / r2_total


def _marginal_pieces(d):
    cv = center(d)
    y0, x0 = cv.y0, cv.x0
    ss_y = y0 @ y0
    if not ss_y > 0:
        raise DegenerateResponse("response has zero empirical variance")
    ss_x = np.einsum("ij,ij->j", x0, x0)
    bad = np.flatnonzero(~(ss_x > 0))
    if bad.size:
        raise DegenerateColumn(int(bad[0]))
    cross = x0.T @ y0
    tau = cross / ss_x
    theta = cross / ss_y
    return y0, x0, ss_y, ss_x, tau, theta


def individual_r2s(d):
    """Individual R^2's with their joint robust covariance."""
    n, p = d.n, d.p
    y0, x0, ss_y, ss_x, tau, theta = _marginal_pieces(d)
    # marginal residuals of Y on each X^(k), and of each X^(k) on Y
    eps = y0[:, None] - x0 * tau[None, :]
    e = x0 - np.outer(y0, theta)
    g = np.hstack([x0 * eps, e * y0[:, None]])
    c_hat = g.T @ g / n
    d_hat = np.diag(np.concatenate([n / ss_x, np.full(p, n / ss_y)]))
    h_hat = np.zeros((p, 2 * p))
    h_hat[np.arange(p), np.arange(p)] = theta
    h_hat[np.arange(p), p + np.arange(p)] = tau
    left = h_hat @ d_hat
    cov = left @ c_hat @ left.T
    cov = 0.5 * (cov + cov.T)
    return JointR2(tau * theta, tau, theta, c_hat, d_hat, h_hat, cov, n)


def marginal_cis(j, delta=0.05):
    """Per-coordinate normal-quantile intervals from the diagonal of ``cov_hat``."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie strictly between 0 and 1")
    variances = np.clip(np.diag(j.cov_hat), 0.0, None)
    return [
        interval_from_variance(r, v, j.n, delta, "normal")
        for r, v in zip(j.r2_individual, variances)
    ]


def product_features(x, means, subsets):
    """Columns ``prod_{i in S} (x_i - means_i)`` for each subset ``S`` (0-based)."""
    x = np.asarray(x, dtype=float)
    means = np.asarray(means, dtype=float)
    if means.shape != (x.shape[1],):
        raise DomainError("one mean per column is required")
    shifted = x - means
    cols = []
    for s in subsets:
        s = tuple(s)
        if not s or list(s) != sorted(set(s)):
            raise DomainError(f"subset {s} must be non-empty with distinct sorted indices")
        if s[0] < 0 or s[-1] >= x.shape[1]:
            raise DomainError(f"subset {s} out of range")
        cols.append(np.prod(shifted[:, list(s)], axis=1))
    return np.column_stack(cols) if cols else np.empty((x.shape[0], 0))


def product_feature_r2(d, means, subsets, *, empirical_centering=False):
    """Individual R^2 of Y against each product feature built from ``subsets``.

    The inputs are centered at the supplied population ``means`` so that
    products over distinct independent inputs are orthogonal.  With
    ``empirical_centering`` the sample means are used instead, for when
    the input law is unknown.
    """
    subsets = [tuple(s) for s in subsets]
    if not subsets:
        return np.empty(0)
    if empirical_centering:
        means = d.x.mean(axis=0)
    feats = product_features(d.x, means, subsets)
    fd = Dataset(d.y, feats, tuple("*".join(d.names[i] for i in s) for s in subsets))
    try:
        return individual_r2s(fd).r2_individual
    except DegenerateColumn as exc:
        raise DegenerateColumn(subsets[exc.column]) from None


def all_subsets(p):
    """Every non-empty subset of ``range(p)``, by size then lexicographically."""
    return [s for k in range(1, p + 1) for s in combinations(range(p), k)]
