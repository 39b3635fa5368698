"""Exception types raised across the package.

Every exception carries a ``code`` string so the CLI can map failures to
exit codes and reports without matching on message text.
"""


class PolyBergmanError(Exception):
    code = "ERROR"


class ValidationError(PolyBergmanError, ValueError):
    """Input data violates a structural invariant."""

    code = "INVALID"


class NumericalError(PolyBergmanError, ArithmeticError):
    """A numerical procedure could not deliver a trustworthy result."""

    code = "NUMERICAL"


class OutOfDomainError(ValidationError):
    code = "OUT_OF_DOMAIN"


class PositivityError(ValidationError):
    code = "FAILS_POSITIVITY"


class PsiNotNonpositiveError(ValidationError):
    code = "PSI_NOT_NONPOSITIVE"


class OrderUnavailableError(ValidationError):
    code = "ORDER_UNAVAILABLE"


class UbarDegreeError(ValidationError):
    code = "UBAR_DEGREE_TOO_HIGH"


class NotPositiveDefiniteError(NumericalError):
    code = "NOT_POSITIVE_DEFINITE"

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class QuadratureUnconvergedError(NumericalError):
    code = "QUADRATURE_UNCONVERGED"


class BetaZeroError(NumericalError):
    code = "BETA_ZERO"


class DivergentError(NumericalError):
    code = "DIVERGENT"


class NonpositiveDiagonalError(NumericalError):
    code = "NONPOSITIVE_DIAGONAL"


class NonpositiveLiftError(NumericalError):
    code = "NONPOSITIVE_LIFT"


class SolverInconsistentError(NumericalError):
    code = "SOLVER_INCONSISTENT"


class InexactDivisionError(NumericalError):
    code = "INEXACT_DIVISION"


class ConfigError(PolyBergmanError):
    """Configuration text could not be parsed."""

    code = "CONFIG_PARSE"
