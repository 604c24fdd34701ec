"""
Exception hierarchy shared by every module
"""


class GibbsError(Exception):
    """Base class for all errors raised by the toolkit."""


class DomainError(GibbsError, ValueError):
    """Argument outside the domain of the operation."""


class ConvergenceError(GibbsError, ArithmeticError):
    """Series hit its term cap before the stopping rule fired."""


class QuadratureError(GibbsError, ArithmeticError):
    """Quadrature did not reach the requested tolerance."""


class TruncationError(GibbsError, RuntimeError):
    """Stick-breaking reached its cap with residual above eps."""


class InversionError(GibbsError, ArithmeticError):
    """Tabulated CDF could not bracket the target quantile."""


class DegeneracyError(GibbsError, RuntimeError):
    """Importance weights collapsed below the effective-sample-size floor."""


class RejectionBudgetError(GibbsError, RuntimeError):
    """Rejection sampler exhausted its proposal budget."""


class InvalidBoundError(GibbsError, ValueError):
    """A supplied upper bound on h was exceeded by an evaluation."""


class UnknownSuiteError(GibbsError, KeyError):
    """No verification suite is registered under the requested name."""
