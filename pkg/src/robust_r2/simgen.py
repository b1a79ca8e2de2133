"""Seeded simulation designs with analytically known ground truth.

Random numbers
--------------
Every stream is numpy's Philox4x64-10 counter-based generator keyed by
``SeedSequence(entropy=seed, spawn_key=key)``; ``key`` is a tuple of
non-negative integers (the Monte Carlo harness uses ``(n, replicate)``).
Uniforms are ``((raw >> 11) + 0.5) * 2**-53`` from the raw 64-bit outputs,
so they lie strictly inside (0, 1).  Every other variate is obtained by
inversion of its distribution function, so each variate consumes exactly
one uniform and datasets are reproducible bit for bit given
``(seed, key)``.

Within a design, blocks of variates are drawn in the order documented on
each generator, row-major for matrices.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special

from .data import Dataset
from .exceptions import DomainError
from .numerics import cholesky, toeplitz_corr

__all__ = [
    "Stream",
    "make_stream",
    "ModelKind",
    "ModelSpec",
    "GroundTruth",
    "generate",
    "multivariate_gaussian",
    "partial_triple",
    "SCREENING_BETA",
    "SCREENING_P",
]

_TWO_POW_53 = float(2**53)


class Stream:
    """Uniform source plus inversion samplers on top of a Philox generator."""

    def __init__(self, bit_generator):
        self._bits = bit_generator

    def uniform01(self, size=None):
        raw = self._bits.random_raw(size)
        return ((raw >> np.uint64(11)).astype(float) + 0.5) / _TWO_POW_53

    def normal(self, mu=0.0, sigma=1.0, size=None):
        if not sigma >= 0:
            raise DomainError("sigma must be non-negative")
        return mu + sigma * special.ndtri(self.uniform01(size))

    def exponential(self, rate=1.0, size=None):
        if not rate > 0:
            raise DomainError("rate must be positive")
        return -np.log(self.uniform01(size)) / rate

    def chi_square(self, df, size=None):
        if not df > 0:
            raise DomainError("degrees of freedom must be positive")
        return special.chdtri(df, self.uniform01(size))

    def bernoulli(self, p, size=None):
        p = np.asarray(p, dtype=float)
        if np.any((p < 0) | (p > 1)):
            raise DomainError("Bernoulli probability must lie in [0, 1]")
        return (self.uniform01(size if size is not None else p.shape) < p).astype(float)

    def poisson(self, lam, size=None):
        """Poisson variates by sequential search of the distribution function."""
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < 0) or np.any(lam > 700):
            raise DomainError("Poisson mean must lie in [0, 700]")
        u = self.uniform01(size if size is not None else lam.shape)
        lam = np.broadcast_to(lam, u.shape)
        k = np.zeros(u.shape)
        pmf = np.exp(-lam)
        cdf = pmf.copy()
        todo = u > cdf
        j = 0
        while np.any(todo):
            j += 1
            pmf = pmf * lam / j
            cdf = cdf + pmf
            k[todo] = j
            todo &= u > cdf
            # the cdf can stall just below 1 in floating point
            if j > 1000:
                break
        return k

    def student_t(self, df, size=None):
        if not df > 0:
            raise DomainError("degrees of freedom must be positive")
        return special.stdtrit(df, self.uniform01(size))


def _check_seed(seed):
    if int(seed) != seed or not 0 <= seed < 2**64:
        raise DomainError("seed must be an integer in [0, 2**64)")
    return int(seed)


def make_stream(seed, *key):
    ss = np.random.SeedSequence(entropy=_check_seed(seed), spawn_key=tuple(int(k) for k in key))
    return Stream(np.random.Philox(ss))


@lru_cache(maxsize=16)
def _toeplitz_factor(rho, d):
    low = cholesky(toeplitz_corr(rho, d))
    low.flags.writeable = False
    return low


def multivariate_gaussian(cov, n, stream, *, factor=None):
    """``n`` i.i.d. rows from ``N(0, cov)``: standard normals times ``L'``."""
    low = cholesky(cov) if factor is None else factor
    z = stream.normal(size=(int(n), low.shape[0]))
    return z @ low.T


class ModelKind(str, enum.Enum):
    GAUSSIAN_LINEAR = "gaussian-linear"
    STUDENT_NOISE = "student-noise"
    HETEROSCEDASTIC = "heteroscedastic"
    MISSPECIFIED_ABS = "misspecified-abs"
    POLYNOMIAL = "polynomial"
    POISSON_COUNT = "poisson-count"
    SCREENING_DESIGN = "screening-design"


@dataclass(frozen=True)
class ModelSpec:
    """A simulation design.

    ``noise_scale`` multiplies the additive error of the five additive-noise
    designs; 0 gives an exact fit.  It must stay 1 for the Poisson and
    screening designs.
    """

    kind: ModelKind
    noise_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.noise_scale < 0:
            raise DomainError("noise_scale must be non-negative")
        if self.kind in (ModelKind.POISSON_COUNT, ModelKind.SCREENING_DESIGN) and self.noise_scale != 1:
            raise DomainError(f"{self.kind.value} has no adjustable noise scale")

    @classmethod
    def parse(cls, key):
        try:
            return cls(ModelKind(key))
        except ValueError:
            choices = ", ".join(k.value for k in ModelKind)
            raise DomainError(f"unknown model {key!r}; choose from {choices}") from None

    def ground_truth(self):
        return _ground_truth(self)


@dataclass(frozen=True)
class GroundTruth:
    """Population values for a design.

    ``true_alpha`` is intercept-first; ``true_support`` holds 0-based column
    indices of the covariates associated with the response.
    """

    true_r2: float | None
    true_alpha: tuple | None
    true_support: frozenset | None = None

    def as_dict(self):
        return {
            "true_r2": self.true_r2,
            "true_alpha": None if self.true_alpha is None else list(self.true_alpha),
            "true_support": None if self.true_support is None else sorted(self.true_support),
        }


_SQRT_2_OVER_PI = math.sqrt(2 / math.pi)
_VAR_ABS = 1 - 2 / math.pi  # Var|X| for X ~ N(0, 1)

SCREENING_BETA = (
    -1.0,
    4 * math.exp(-0.1),
    -4 * math.exp(-0.2),
    4 * math.exp(-0.3),
    -4 * math.exp(-0.4),
    2.0,
    4.0,
    6.0,
    3.0,
    3.0,
    4.0,
)
SCREENING_P = 1000
_SCREENING_COPY_SD = (0.3, 0.2, 0.35, 0.55)
_SCREENING_COPY_OF = (0, 2, 3, 4)  # X11..X14 are noisy copies of X1, X3, X4, X5


def _ground_truth(spec):
    s2 = spec.noise_scale**2
    kind = spec.kind
    if kind == ModelKind.GAUSSIAN_LINEAR:
        return GroundTruth(1.25 / (1.25 + s2), (0.5, 0.5, 1.0))
    if kind == ModelKind.STUDENT_NOISE:
        return GroundTruth(1.25 / (1.25 + 1.25 * s2), (0.5, 0.5, 1.0))
    if kind == ModelKind.HETEROSCEDASTIC:
        return GroundTruth(1.25 / (1.25 + s2), (0.5, 0.5, 1.0))
    if kind == ModelKind.MISSPECIFIED_ABS:
        slope = _SQRT_2_OVER_PI / _VAR_ABS
        explained = slope**2 * _VAR_ABS
        return GroundTruth(explained / (2 + s2), (1 - slope * _SQRT_2_OVER_PI, 0.0, slope))
    if kind == ModelKind.POLYNOMIAL:
        return GroundTruth(2 / (2 + s2), (0.0, 0.0, 1.0))
    if kind == ModelKind.POISSON_COUNT:
        # Var(X1 + X2) = 1/12 + 1, E Var(Y | X) = 0.5 + 0.5 + 1
        return GroundTruth((13 / 12) / (13 / 12 + 2), (0.5, 1.0, 1.0))
    return GroundTruth(None, None, frozenset(range(14)))


def _additive(stream, n, spec):
    """Draw order: X (n x 2), then the error (n)."""
    x = stream.normal(size=(n, 2))
    if spec.kind == ModelKind.STUDENT_NOISE:
        err = stream.student_t(10, size=n)
    else:
        err = stream.normal(size=n)
        if spec.kind == ModelKind.HETEROSCEDASTIC:
            err = np.sqrt(0.2 + 0.8 * x[:, 0] ** 2) * err
    y = 0.5 + 0.5 * x[:, 0] + x[:, 1] + spec.noise_scale * err
    return Dataset(y, x, ("x1", "x2"))


def _quadratic(stream, n, spec):
    """Draw order: X (n), then the error (n)."""
    x = stream.normal(size=n)
    y = x**2 + spec.noise_scale * stream.normal(size=n)
    if spec.kind == ModelKind.MISSPECIFIED_ABS:
        return Dataset(y, np.column_stack([x, np.abs(x)]), ("x", "abs_x"))
    return Dataset(y, np.column_stack([x, x**2]), ("x", "x_sq"))


def _poisson(stream, n):
    """Draw order: X1 uniform (n), X2 exponential (n), Y (n)."""
    x1 = stream.uniform01(n)
    x2 = stream.exponential(1.0, n)
    y = stream.poisson(0.5 + x1 + x2)
    return Dataset(y, np.column_stack([x1, x2]), ("x1", "x2"))


def _screening(stream, n):
    """Draw order: X1..X5, X6, X7, Z1, Z2, X10, Y, Z3..Z6, X15..X1000."""
    x = np.empty((n, SCREENING_P))
    x[:, :5] = multivariate_gaussian(None, n, stream, factor=_toeplitz_factor(0.57, 5))
    x[:, 5] = stream.bernoulli(0.35, n)
    x[:, 6] = stream.chi_square(2, n)
    x[:, 7] = x[:, 0] * stream.poisson(2.0, n)
    x[:, 8] = x[:, 1] * stream.normal(1.0, 1.0, n)
    x[:, 9] = stream.exponential(0.5, n)
    beta = np.asarray(SCREENING_BETA)
    prob = special.expit(beta[0] + x[:, :10] @ beta[1:])
    y = stream.bernoulli(prob)
    for j, (src, sd) in enumerate(zip(_SCREENING_COPY_OF, _SCREENING_COPY_SD)):
        x[:, 10 + j] = x[:, src] + stream.normal(0.0, sd, n)
    d = SCREENING_P - 14
    x[:, 14:] = multivariate_gaussian(None, n, stream, factor=_toeplitz_factor(0.7, d))
    return Dataset(y, x, tuple(f"x{j + 1}" for j in range(SCREENING_P)))


def generate(spec, n, seed, key=()):
    """Draw a dataset of ``n`` rows from ``spec`` on stream ``(seed, *key)``.

    Returns
    -------
    (Dataset, GroundTruth)
    """
    if isinstance(spec, (str, ModelKind)):
        spec = ModelSpec(ModelKind(spec))
    if int(n) != n or n < 10:
        raise DomainError("n must be an integer >= 10")
    n = int(n)
    stream = make_stream(seed, *key)
    kind = spec.kind
    if kind in (ModelKind.GAUSSIAN_LINEAR, ModelKind.STUDENT_NOISE, ModelKind.HETEROSCEDASTIC):
        d = _additive(stream, n, spec)
    elif kind in (ModelKind.MISSPECIFIED_ABS, ModelKind.POLYNOMIAL):
        d = _quadratic(stream, n, spec)
    elif kind == ModelKind.POISSON_COUNT:
        d = _poisson(stream, n)
    else:
        d = _screening(stream, n)
    return d, spec.ground_truth()


def partial_rho_for(partial_r2):
    """Loading ``r`` such that ``r^2 / (r^2 + 1) = partial_r2``."""
    if not 0 <= partial_r2 < 1:
        raise DomainError("partial R^2 must lie in [0, 1)")
    return math.sqrt(partial_r2 / (1 - partial_r2))


def partial_triple(n, seed, key=(), partial_r2=0.16):
    """Gaussian ``(x, y, z)`` with ``x = z + u`` and ``y = z + r u + w``.

    With ``z, u, w`` i.i.d. N(0, 1) the residuals given ``z`` are ``u`` and
    ``r u + w``, whose squared correlation is ``r^2 / (r^2 + 1)``; ``r`` is
    chosen to hit ``partial_r2``.  Draw order: z, u, w (n each).
    """
    stream = make_stream(seed, *key)
    z = stream.normal(size=n)
    u = stream.normal(size=n)
    w = stream.normal(size=n)
    r = partial_rho_for(partial_r2)
    return z + u, z + r * u + w, z.reshape(-1, 1), partial_r2
