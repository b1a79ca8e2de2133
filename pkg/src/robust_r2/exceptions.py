"""Exception hierarchy.

The command line maps each family to its own exit code.  Bad arguments
raise :class:`DomainError`; malformed or degenerate input raises
:class:`DataError`.  Singular designs and failed factorizations raise
:class:`NumericalError`.
"""


class RobustR2Error(Exception):
    """Base class for every error raised by this package."""


class DomainError(RobustR2Error, ValueError):
    """An argument lies outside the domain of the operation."""


class DataError(RobustR2Error, ValueError):
    """The input data are malformed or statistically degenerate."""


class NumericalError(RobustR2Error, ArithmeticError):
    """A numerical procedure failed or produced an invalid value."""


class ParseError(DataError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class MissingColumn(DataError):
    pass


class TooFewRows(DataError):
    pass


class DegenerateResponse(DataError):
    """The response has zero empirical variance."""


class DegenerateColumn(DataError):
    def __init__(self, column, message=None):
        super().__init__(message or f"column {column} has zero empirical variance")
        self.column = column


class DegenerateResiduals(DataError):
    """A residualized variable has zero empirical variance."""


class NotPositiveDefinite(NumericalError):
    pass


class SingularDesign(NotPositiveDefinite):
    """The design (with intercept) is not of full column rank."""


class SingularSubcovariance(NumericalError):
    pass
