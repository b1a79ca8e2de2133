"""Point estimate and robust confidence interval for R^2.

The estimator is written as the inner product ``theta_hat . alpha_hat`` of
the regression slopes of Y on X and the normalized covariances of X with Y.
Both vectors are jointly asymptotically normal with covariance ``B A B``;
the delta method applied to the inner product yields the variance
``V = w' B A B w`` with ``w = (theta, alpha)``.  No model for the
conditional law of Y is assumed, which makes the interval valid under
heteroscedasticity and misspecification.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .data import center, empirical_var
from .exceptions import (
    DegenerateResponse,
    DomainError,
    NotPositiveDefinite,
    NumericalError,
    SingularDesign,
)
from .numerics import cholesky, normal_quantile, solve_spd, student_quantile

__all__ = [
    "R2Inference",
    "ConfidenceInterval",
    "Degeneracy",
    "estimate",
    "confidence_interval",
    "interval_from_variance",
    "r2_total_effect",
    "degeneracy_check",
]

# quadratic forms slightly below zero are rounding noise; anything lower is a bug
_NEGATIVE_V_TOLERANCE = -1e-10


class Degeneracy(str, enum.Enum):
    REGULAR = "Regular"
    NEAR_ONE = "NearOne"
    NEAR_ZERO = "NearZero"


@dataclass(frozen=True, eq=False)
class R2Inference:
    r2_hat: float
    theta_hat: np.ndarray
    alpha_hat: np.ndarray
    a_hat: np.ndarray
    b_hat: np.ndarray
    v_hat: float
    n: int

    @property
    def p(self):
        return self.theta_hat.shape[0]


@dataclass(frozen=True)
class ConfidenceInterval:
    """Symmetric interval around an estimate.

    ``lower``/``upper`` are the raw endpoints; ``clipped`` intersects them
    with ``[0, 1]``.
    """

    estimate: float
    lower: float
    upper: float
    level: float
    quantile_kind: str

    @property
    def clipped(self):
        return max(self.lower, 0.0), min(self.upper, 1.0)

    @property
    def width(self):
        return self.upper - self.lower

    def contains(self, value):
        return self.lower <= value <= self.upper

    def as_dict(self):
        lo, hi = self.clipped
        return {
            "estimate": self.estimate,
            "lower": self.lower,
            "upper": self.upper,
            "lower_clipped": lo,
            "upper_clipped": hi,
            "level": self.level,
            "quantile": self.quantile_kind,
        }


def quadratic_variance(weights, a_hat, b_hat):
    """``w' B A B w`` with clipping of rounding-level negative values."""
    bw = b_hat @ weights
    v = float(bw @ a_hat @ bw)
    if v < 0:
        if v < _NEGATIVE_V_TOLERANCE:
            raise NumericalError(f"negative variance estimate {v:.3g}")
        v = 0.0
    return v


def estimate(d):
    """Estimate R^2 and its robust asymptotic variance from a Dataset.

    Returns
    -------
    R2Inference
        ``a_hat`` and ``b_hat`` are ``2p x 2p`` with the slope block first
        and the normalized-covariance block second.
    """
    d.require_rows()
    n, p = d.n, d.p
    var_y = empirical_var(d.y)
    if not var_y > 0:
        raise DegenerateResponse("response has zero empirical variance")
    cv = center(d)
    y0, x0 = cv.y0, cv.x0
    gram = x0.T @ x0
    try:
        low = cholesky(gram)
    except NotPositiveDefinite as exc:
        raise SingularDesign(f"centered design is rank deficient: {exc}") from None
    xty = x0.T @ y0
    alpha = solve_spd(gram, xty, factor=low)
    theta = xty / (y0 @ y0)
    r2_hat = float(theta @ alpha)

    # residuals of the full fit, and of each X on (1, Y)
    eps = y0 - x0 @ alpha
    e = x0 - np.outer(y0, theta)
    g = np.hstack([x0 * eps[:, None], e * y0[:, None]])
    a_hat = g.T @ g / n

    b_hat = np.zeros((2 * p, 2 * p))
    b_hat[:p, :p] = n * solve_spd(gram, np.eye(p), factor=low)
    b_hat[:p, :p] = 0.5 * (b_hat[:p, :p] + b_hat[:p, :p].T)
    b_hat[p:, p:] = np.eye(p) / var_y

    # w' B A B w evaluated as mean((G B w)^2): same value, no cancellation at R^2 = 1
    bw = b_hat @ np.concatenate([theta, alpha])
    v_hat = float(np.mean((g @ bw) ** 2))
    return R2Inference(r2_hat, theta, alpha, a_hat, b_hat, v_hat, n)


def interval_from_variance(value, variance, n, delta=0.05, quantile_kind="student"):
    """``value +/- q * sqrt(variance / n)`` with a normal or Student(n) quantile."""
    if not 0 < delta < 1:
        raise DomainError("delta must lie strictly between 0 and 1")
    if quantile_kind == "normal":
        q = normal_quantile(1 - delta / 2)
    elif quantile_kind == "student":
        q = student_quantile(1 - delta / 2, n)
    else:
        raise DomainError(f"unknown quantile kind {quantile_kind!r}")
    half = q * np.sqrt(variance) / np.sqrt(n)
    return ConfidenceInterval(
        float(value), float(value - half), float(value + half), 1 - delta, quantile_kind
    )


def confidence_interval(inf, delta=0.05, quantile_kind="student"):
    """Asymptotic level ``1 - delta`` interval for R^2.

    ``quantile_kind="student"`` uses the Student quantile with ``n`` degrees
    of freedom, which slightly widens the interval at small ``n``;
    ``"normal"`` gives the plain Gaussian interval.
    """
    return interval_from_variance(inf.r2_hat, inf.v_hat, inf.n, delta, quantile_kind)


def r2_total_effect(d, i):
    """``1 - R^2`` of the regression without column ``i`` (0-based)."""
    if d.p < 2:
        raise DomainError("total effect needs at least two columns")
    if not 0 <= i < d.p:
        raise DomainError(f"column index must lie in 0..{d.p - 1}")
    return 1.0 - estimate(d.drop_column(i)).r2_hat


def degeneracy_check(inf, tol=1e-6):
    """Flag estimates for which the normal approximation is unreliable.

    The limiting variance vanishes at ``R^2 = 1`` and ``R^2 = 0``; near
    either boundary the interval should not be trusted.
    """
    if inf.r2_hat > 1 - tol:
        return Degeneracy.NEAR_ONE
    if inf.r2_hat < tol or inf.v_hat < tol**2:
        return Degeneracy.NEAR_ZERO
    return Degeneracy.REGULAR
