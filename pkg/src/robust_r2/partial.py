"""Squared partial correlation of two variables given a confounder block.

Both variables are residualized on ``(1, Z)`` by least squares; the squared
partial correlation is then the R^2 between the two residual series, and
its robust variance follows from the one-regressor case of
:func:`robust_r2.r2.estimate`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ols
from .data import Dataset, empirical_var
from .exceptions import DegenerateResiduals, DomainError, TooFewRows
from .r2 import ConfidenceInterval, estimate, interval_from_variance

__all__ = ["PartialR2Inference", "partial_r2", "partial_r2_ci", "residualize"]

# residual variance below this fraction of the raw variance counts as zero
_RELATIVE_ZERO = 1e-12


@dataclass(frozen=True, eq=False)
class PartialR2Inference:
    """Squared partial correlation and its robust asymptotic variance.

    ``alpha_hat`` is the slope of the Y-residuals on the X-residuals and
    ``theta_hat`` the slope of the X-residuals on the Y-residuals, so that
    ``r2_partial = alpha_hat * theta_hat``.
    """

    r2_partial: float
    alpha_hat: float
    theta_hat: float
    a_hat: np.ndarray
    b_hat: np.ndarray
    v_hat: float
    n: int


def residualize(v, z):
    """Residuals of ``v`` after least squares on ``(1, z)``."""
    v = np.asarray(v, dtype=float)
    if z.shape[1] == 0:
        return v - v.mean()
    return ols.fit(Dataset(v, z)).residuals


def partial_r2(x, y, z=None):
    """Squared partial correlation of ``x`` and ``y`` given the columns of ``z``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = x.shape[0]
    z = np.empty((n, 0)) if z is None else np.asarray(z, dtype=float)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    if y.shape[0] != n or z.shape[0] != n:
        raise DomainError("all inputs must have the same number of rows")
    if n < z.shape[1] + 3:
        raise TooFewRows(f"need at least q + 3 = {z.shape[1] + 3} rows, got {n}")
    x_res = residualize(x, z)
    y_res = residualize(y, z)
    for name, raw, res in (("x", x, x_res), ("y", y, y_res)):
        if not empirical_var(res) > _RELATIVE_ZERO * max(empirical_var(raw), 1e-300):
            raise DegenerateResiduals(f"{name} is (numerically) in the span of (1, z)")
    inf = estimate(Dataset(y_res, x_res.reshape(-1, 1)))
    return PartialR2Inference(
        r2_partial=inf.r2_hat,
        alpha_hat=float(inf.alpha_hat[0]),
        theta_hat=float(inf.theta_hat[0]),
        a_hat=inf.a_hat,
        b_hat=inf.b_hat,
        v_hat=inf.v_hat,
        n=n,
    )


def partial_r2_ci(inf, delta=0.05, quantile_kind="student") -> ConfidenceInterval:
    return interval_from_variance(inf.r2_partial, inf.v_hat, inf.n, delta, quantile_kind)
