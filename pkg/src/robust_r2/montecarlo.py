"""Replicated Monte Carlo experiments for interval coverage and screening.

Replicate ``r`` at sample size ``n`` always draws from substream
``(base_seed, n, r)``.  Replicates are split into contiguous chunks that may
run in separate processes; per-replicate outcomes are gathered back in
replicate order before any summation, so reports are bit-identical for any
worker count.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import ols, partial, r2, screening, simgen
from .data import Dataset
from .exceptions import DomainError, RobustR2Error, SingularDesign

__all__ = [
    "CoverageLevel",
    "CoverageReport",
    "ScreeningReport",
    "coverage_experiment",
    "variance_calibration",
    "screening_experiment",
    "partial_coverage_experiment",
    "wald_size_experiment",
    "default_workers",
    "dumps17",
]

WORKERS_ENV = "ROBUST_R2_WORKERS"


def default_workers():
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError:
            raise DomainError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if value < 1:
            raise DomainError(f"{WORKERS_ENV} must be positive")
        return value
    return os.cpu_count() or 1


def _chunks(reps, workers):
    size = max(1, math.ceil(reps / (4 * workers)))
    return [(lo, min(lo + size, reps)) for lo in range(0, reps, size)]


def _run(func, tasks, workers):
    """Apply ``func`` to each task and return the concatenated results in order."""
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise DomainError("workers must be positive")
    if workers == 1 or len(tasks) == 1:
        parts = [func(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(func, tasks))
    return [item for part in parts for item in part]


def _with_context(fn, n, r, *args):
    """Call ``fn``, prefixing any package error with its replicate position.

    The exception keeps its type so callers can still map it to an exit code.
    """
    try:
        return fn(*args)
    except SingularDesign:
        raise
    except RobustR2Error as exc:
        exc.args = (f"replicate n={n}, r={r}: {exc}",) + exc.args[1:]
        raise


# --------------------------------------------------------------------------
# Coverage
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CoverageLevel:
    coverage: float
    reps: int
    mean_width: float
    mean_vhat: float
    excluded: int = 0


@dataclass(frozen=True)
class CoverageReport:
    spec: simgen.ModelSpec
    levels: dict
    delta: float
    base_seed: int
    quantile_kind: str = "student"
    true_r2: float = float("nan")

    def to_dict(self):
        return {
            "model": self.spec.kind.value,
            "noise_scale": self.spec.noise_scale,
            "true_r2": self.true_r2,
            "delta": self.delta,
            "quantile": self.quantile_kind,
            "base_seed": self.base_seed,
            "levels": {
                str(n): {
                    "coverage": lv.coverage,
                    "reps": lv.reps,
                    "mean_width": lv.mean_width,
                    "mean_vhat": lv.mean_vhat,
                    "excluded": lv.excluded,
                }
                for n, lv in self.levels.items()
            },
        }

    def to_json(self):
        return dumps17(self.to_dict())

    def to_table(self):
        ns = list(self.levels)
        rows = [
            ["n", *[str(n) for n in ns]],
            ["CI1", *[_fmt(self.levels[n].coverage) for n in ns]],
        ]
        caption = (
            f"Estimated coverage at level {1 - self.delta:g} for model "
            f"{self.spec.kind.value} (true R^2 = {self.true_r2:.6g}, "
            f"reps per n = {self.levels[ns[0]].reps})"
        )
        return _grid(rows) + "\n" + caption + "\n"


def _coverage_task(task):
    spec, n, lo, hi, delta, quantile_kind, seed = task
    truth = spec.ground_truth().true_r2
    out = []
    for r in range(lo, hi):
        d, _ = simgen.generate(spec, n, seed, (n, r))
        try:
            inf = _with_context(r2.estimate, n, r, d)
        except SingularDesign:
            out.append(None)
            continue
        ci = r2.confidence_interval(inf, delta, quantile_kind)
        out.append((ci.lower <= truth <= ci.upper, ci.width, inf.v_hat))
    return out


def coverage_experiment(
    spec,
    n_list,
    reps=1000,
    delta=0.05,
    quantile_kind="student",
    base_seed=0,
    *,
    workers=None,
):
    """Fraction of replicates whose interval covers the true R^2, per ``n``.

    Replicates whose design is singular are excluded and counted.
    """
    if isinstance(spec, (str, simgen.ModelKind)):
        spec = simgen.ModelSpec(simgen.ModelKind(spec))
    if spec.kind == simgen.ModelKind.SCREENING_DESIGN:
        raise DomainError("coverage experiments need a design with a known R^2")
    if reps < 10:
        raise DomainError("reps must be at least 10")
    n_list = [int(n) for n in n_list]
    if not n_list or any(n < 50 for n in n_list):
        raise DomainError("every n must be at least 50")
    workers = default_workers() if workers is None else workers
    tasks = [
        (spec, n, lo, hi, delta, quantile_kind, base_seed)
        for n in n_list
        for lo, hi in _chunks(reps, workers)
    ]
    flat = _run(_coverage_task, tasks, workers)
    levels = {}
    for k, n in enumerate(n_list):
        block = flat[k * reps : (k + 1) * reps]
        kept = [b for b in block if b is not None]
        m = len(kept)
        levels[n] = CoverageLevel(
            coverage=sum(b[0] for b in kept) / m if m else float("nan"),
            reps=reps,
            mean_width=math.fsum(b[1] for b in kept) / m if m else float("nan"),
            mean_vhat=math.fsum(b[2] for b in kept) / m if m else float("nan"),
            excluded=reps - m,
        )
    return CoverageReport(
        spec, levels, delta, base_seed, quantile_kind, spec.ground_truth().true_r2
    )


# --------------------------------------------------------------------------
# Variance calibration
# --------------------------------------------------------------------------


def _calibration_task(task):
    spec, n, lo, hi, seed = task
    out = []
    for r in range(lo, hi):
        d, _ = simgen.generate(spec, n, seed, (n, r))
        inf = _with_context(r2.estimate, n, r, d)
        out.append((inf.r2_hat, inf.v_hat))
    return out


def variance_calibration(spec, n, reps=2000, base_seed=0, *, workers=None):
    """Mean of the variance estimates and the Monte Carlo variance of
    ``sqrt(n) (R2_hat - R2)``; their ratio should approach 1.

    Returns
    -------
    (mean_vhat, empirical_var_scaled)
    """
    if isinstance(spec, (str, simgen.ModelKind)):
        spec = simgen.ModelSpec(simgen.ModelKind(spec))
    if reps < 2:
        raise DomainError("reps must be at least 2")
    truth = spec.ground_truth().true_r2
    workers = default_workers() if workers is None else workers
    tasks = [(spec, int(n), lo, hi, base_seed) for lo, hi in _chunks(reps, workers)]
    flat = np.array(_run(_calibration_task, tasks, workers))
    scaled = np.sqrt(n) * (flat[:, 0] - truth)
    return float(np.mean(flat[:, 1])), float(np.mean(scaled**2))


# --------------------------------------------------------------------------
# Screening
# --------------------------------------------------------------------------

SUPPORT_SIZE = 14


@dataclass(frozen=True)
class ScreeningReport:
    per_index_rates: np.ndarray
    tpr: float
    fpr: float
    mean_selected: float
    q: float
    n: int
    reps: int
    base_seed: int = 0

    def to_dict(self):
        return {
            "q": self.q,
            "n": self.n,
            "reps": self.reps,
            "base_seed": self.base_seed,
            "per_index_rates": {
                f"R{i + 1}": float(v) for i, v in enumerate(self.per_index_rates)
            },
            "tpr": self.tpr,
            "fpr": self.fpr,
            "mean_selected": self.mean_selected,
        }

    def to_json(self):
        return dumps17(self.to_dict())

    def to_table(self):
        rows = [["n", str(self.n)]]
        rows += [[f"R_{i + 1}", _fmt(v)] for i, v in enumerate(self.per_index_rates)]
        rows += [["TPR", _fmt(self.tpr)], ["FPR", _fmt(self.fpr)]]
        rows += [["mean |M|", f"{self.mean_selected:.3f}"]]
        caption = (
            f"Case q={self.q:g}, n={self.n}, reps={self.reps}. Selection rates for "
            f"indexes 1..{SUPPORT_SIZE} with summary rates and mean selected set size."
        )
        return _grid(rows) + "\n" + caption + "\n"


def _screening_task(task):
    q, n, lo, hi, seed = task
    out = []
    support = frozenset(range(SUPPORT_SIZE))
    for r in range(lo, hi):
        d, _ = simgen.generate(simgen.ModelKind.SCREENING_DESIGN, n, seed, (n, r))
        res = _with_context(screening.screen, n, r, d, None, q)
        hits = tuple(i in res.selected for i in range(SUPPORT_SIZE))
        false = len(res.selected - support)
        out.append((hits, false, len(res.selected)))
    return out


def screening_experiment(q=0.15, n=500, reps=100, base_seed=0, *, workers=None):
    """Repeat the 1000-covariate logistic screening design ``reps`` times."""
    if not 0 < q < 1:
        raise DomainError("q must lie strictly between 0 and 1")
    if reps < 1:
        raise DomainError("reps must be positive")
    n = int(n)
    workers = default_workers() if workers is None else workers
    tasks = [(q, n, lo, hi, base_seed) for lo, hi in _chunks(reps, workers)]
    flat = _run(_screening_task, tasks, workers)
    hits = np.array([f[0] for f in flat], dtype=float)
    rates = hits.mean(axis=0)
    null_count = simgen.SCREENING_P - SUPPORT_SIZE
    return ScreeningReport(
        per_index_rates=rates,
        tpr=float(hits.sum() / (reps * SUPPORT_SIZE)),
        fpr=float(sum(f[1] for f in flat) / (reps * null_count)),
        mean_selected=float(sum(f[2] for f in flat) / reps),
        q=q,
        n=n,
        reps=reps,
        base_seed=base_seed,
    )


# --------------------------------------------------------------------------
# Partial correlation coverage and Wald size
# --------------------------------------------------------------------------


def _partial_task(task):
    n, lo, hi, delta, quantile_kind, partial_r2, seed = task
    out = []
    for r in range(lo, hi):
        x, y, z, truth = simgen.partial_triple(n, seed, (n, r), partial_r2)
        inf = _with_context(partial.partial_r2, n, r, x, y, z)
        ci = partial.partial_r2_ci(inf, delta, quantile_kind)
        out.append((ci.lower <= truth <= ci.upper, ci.width))
    return out


def partial_coverage_experiment(
    n=1000, reps=1000, delta=0.05, partial_r2=0.16, base_seed=0, *,
    quantile_kind="student", workers=None,
):
    """Coverage of the partial-R^2 interval on a Gaussian triple.

    Returns
    -------
    (coverage, mean_width)
    """
    workers = default_workers() if workers is None else workers
    tasks = [
        (int(n), lo, hi, delta, quantile_kind, partial_r2, base_seed)
        for lo, hi in _chunks(reps, workers)
    ]
    flat = _run(_partial_task, tasks, workers)
    return sum(f[0] for f in flat) / reps, math.fsum(f[1] for f in flat) / reps


def _wald_task(task):
    n, lo, hi, level, seed = task
    out = []
    for r in range(lo, hi):
        d, _ = simgen.generate(simgen.ModelKind.GAUSSIAN_LINEAR, n, seed, (n, r))
        # remove the X1 effect so that alpha_1 = 0 holds exactly
        null = Dataset(d.y - 0.5 * d.x[:, 0], d.x, d.names)
        res = ols.wald_test(ols.fit(null), [1])
        out.append(res.p_value < level)
    return out


def wald_size_experiment(n=500, reps=2000, level=0.05, base_seed=0, *, workers=None):
    """Rejection rate of the robust Wald test of a true null coefficient."""
    workers = default_workers() if workers is None else workers
    tasks = [(int(n), lo, hi, level, base_seed) for lo, hi in _chunks(reps, workers)]
    flat = _run(_wald_task, tasks, workers)
    return sum(flat) / reps


# --------------------------------------------------------------------------
# Output helpers
# --------------------------------------------------------------------------


def _fmt(v):
    return f"{v:.3f}".rstrip("0").rstrip(".") if v == v else "nan"


def _grid(rows):
    """Aligned plain-text table; the first row is the header."""
    widths = [max(len(row[c]) for row in rows) for c in range(len(rows[0]))]
    fmt = lambda row: "  ".join(
        cell.ljust(w) if c == 0 else cell.rjust(w) for c, (cell, w) in enumerate(zip(row, widths))
    )
    rule = "-" * len(fmt(rows[0]))
    return "\n".join([fmt(rows[0]), rule, *map(fmt, rows[1:])])


def _encode17(obj):
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return json.dumps(None)
        return format(v, ".17g") if v != int(v) or abs(v) >= 1e16 else repr(v)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {_encode17(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode17(v) for v in obj) + "]"
    raise TypeError(f"cannot encode {type(obj).__name__}")


def dumps17(obj):
    """JSON text with every non-integral float written with 17 significant digits.

    Non-finite floats become ``null``.
    """
    return _encode17(obj)
