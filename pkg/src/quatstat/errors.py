"""Exception hierarchy.

The CLI maps these onto exit codes, so each class carries the code it
should produce.
"""


class QuatStatError(Exception):
    exit_code = 2


class DimensionError(QuatStatError, ValueError):
    """Operand shapes are incompatible."""


class InvalidAxesError(QuatStatError, ValueError):
    pass


class StructureError(QuatStatError, ValueError):
    """Input lacks the matrix structure an operation requires (Hermitian, alpha-Hermitian, ...)."""


class NotAnAdjointError(StructureError):
    pass


class NotFactorableError(StructureError):
    pass


class DomainError(QuatStatError, ValueError):
    """Argument outside the operation's domain (empty sample set, rho out of range, ...)."""


class RankDeficiencyError(DomainError):
    """Raised by whitening when the covariance is not positive definite."""

    def __init__(self, message, eigenvalue):
        super().__init__(message)
        self.eigenvalue = eigenvalue


class UndefinedError(DomainError):
    pass


class ParseError(DomainError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericError(QuatStatError, ArithmeticError):
    exit_code = 3


class IOFailure(QuatStatError, OSError):
    """File could not be read or written."""

    exit_code = 4


# --- warnings -------------------------------------------------------------

class QuatStatWarning(UserWarning):
    pass


class NonZeroMeanWarning(QuatStatWarning):
    """Estimator called on data whose sample mean is not negligible."""


class DegeneracyWarning(QuatStatWarning):
    """Near-repeated eigenvalues; eigenvectors (and derived errors) depend on gauge."""
