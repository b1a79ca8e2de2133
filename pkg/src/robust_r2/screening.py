"""Studentized marginal-slope screening.

Column ``j`` is kept when ``sqrt(n) |tau_j| / sqrt(v_j) >= gamma`` where
``tau_j`` is the marginal least-squares slope of Y on X^(j), ``v_j`` its
heteroscedasticity-robust asymptotic variance and
``gamma = Phi^-1(1 - q / 2)``.  ``q`` is the expected false-positive rate
per truly unrelated column; no multiplicity correction is applied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import DegenerateColumn, DegenerateResponse, DomainError
from .numerics import normal_quantile

__all__ = [
    "ScreeningResult",
    "ScreeningMetrics",
    "marginal_statistics",
    "screen",
    "evaluate",
    "per_index_rates",
]


@dataclass(frozen=True, eq=False)
class ScreeningResult:
    statistics: np.ndarray
    threshold: float
    selected: frozenset
    q: float

    def support_mask(self):
        mask = np.zeros(self.statistics.shape[0], dtype=bool)
        mask[list(self.selected)] = True
        return mask


@dataclass(frozen=True)
class ScreeningMetrics:
    tpr: float
    fpr: float
    selected_size: int


def marginal_statistics(x, y):
    """Studentized marginal slopes, one per column of ``x``.

    Columns whose marginal residuals vanish identically get ``+inf``.

    Returns
    -------
    statistics, tau_hat, v_hat : ndarray of shape (p,)
    """
    # one contiguous row per column: every column goes through the same
    # reduction path, so statistics[j] does not depend on the other columns
    xt = np.ascontiguousarray(np.asarray(x, dtype=float).T)
    y = np.asarray(y, dtype=float).reshape(-1)
    n = y.shape[0]
    y0 = y - y.mean()
    if not y0 @ y0 > 0:
        raise DegenerateResponse("response has zero empirical variance")
    x0 = xt - (xt.sum(axis=1) / n)[:, None]
    ss_x = (x0 * x0).sum(axis=1)
    bad = np.flatnonzero(~(ss_x > 0))
    if bad.size:
        raise DegenerateColumn(int(bad[0]))
    tau = (x0 * y0).sum(axis=1) / ss_x
    var_x = ss_x / n
    eps = y0 - x0 * tau[:, None]
    meat = (x0 * x0 * eps * eps).sum(axis=1)
    v = meat / n / var_x**2
    with np.errstate(divide="ignore", invalid="ignore"):
        stats = np.where(v > 0, np.sqrt(n) * np.abs(tau) / np.sqrt(v), np.inf)
    return stats, tau, v


def screen(x, y, q=0.15):
    """Apply the screening rule at expected false-positive rate ``q``.

    ``x`` may be a :class:`~robust_r2.data.Dataset`, in which case ``y`` is
    ignored and taken from it.
    """
    if not 0 < q < 1:
        raise DomainError("q must lie strictly between 0 and 1")
    if hasattr(x, "x") and hasattr(x, "y"):
        x, y = x.x, x.y
    stats, _, _ = marginal_statistics(x, y)
    gamma = normal_quantile(1 - q / 2)
    selected = frozenset(int(j) for j in np.flatnonzero(stats >= gamma))
    return ScreeningResult(stats, gamma, selected, q)


def evaluate(result, truth, p=None):
    """True- and false-positive rates of a screening result against ``truth``."""
    p = result.statistics.shape[0] if p is None else int(p)
    truth = frozenset(int(t) for t in truth)
    if not truth or len(truth) >= p:
        raise DomainError("truth must be non-empty and a strict subset of the columns")
    if min(truth) < 0 or max(truth) >= p:
        raise DomainError("truth indices out of range")
    hits = len(result.selected & truth)
    false = len(result.selected - truth)
    return ScreeningMetrics(hits / len(truth), false / (p - len(truth)), len(result.selected))


def per_index_rates(results, indices):
    """Fraction of ``results`` that selected each of ``indices``."""
    results = list(results)
    if not results:
        raise DomainError("need at least one screening result")
    indices = list(indices)
    return np.array([sum(i in r.selected for r in results) / len(results) for i in indices])
