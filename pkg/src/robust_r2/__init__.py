"""Distribution-free inference for the population R^2.

Robust confidence intervals for the multiple correlation coefficient and its
relatives, plus marginal screening and reproducible simulation tooling.
"""

from .data import Dataset, from_csv, to_csv
from .estimators import IndividualR2, MarginalScreener, PartialR2, R2Estimator, RobustOLS
from .exceptions import (
    DataError,
    DomainError,
    NumericalError,
    RobustR2Error,
    SingularDesign,
)
from .joint import individual_r2s, marginal_cis
from .ols import fit, wald_test
from .partial import partial_r2, partial_r2_ci
from .r2 import confidence_interval, degeneracy_check, estimate
from .screening import screen

__version__ = "0.1.0"

__all__ = [
    "Dataset",
    "from_csv",
    "to_csv",
    "RobustOLS",
    "R2Estimator",
    "IndividualR2",
    "PartialR2",
    "MarginalScreener",
    "RobustR2Error",
    "DomainError",
    "DataError",
    "NumericalError",
    "SingularDesign",
    "fit",
    "wald_test",
    "estimate",
    "confidence_interval",
    "degeneracy_check",
    "individual_r2s",
    "marginal_cis",
    "partial_r2",
    "partial_r2_ci",
    "screen",
]
