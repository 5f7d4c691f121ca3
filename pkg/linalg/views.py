from utils.errors import ConfigurationError, NumericalError


class SingularMatrixError(NumericalError):
    """Raised when a factorization meets a (numerically) zero pivot"""

    def __init__(self, message: str, pivot_index: int | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index


class NotPositiveDefiniteError(NumericalError):
    """Raised when the mass matrix of a generalized eigenproblem is not SPD"""


class BandwidthOverflowError(NumericalError):
    """Raised when an entry is inserted outside the declared band"""


class TripletIndexError(ConfigurationError, IndexError):
    """Raised when a triplet references a row or column outside the matrix"""
