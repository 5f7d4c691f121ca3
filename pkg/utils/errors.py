class AcmsError(Exception):
    """Base class for all errors raised by the package"""


class ConfigurationError(AcmsError):
    """Invalid input: configs, parameters out of range, unmet preconditions"""


class NumericalError(AcmsError):
    """A computation could not be carried out (singular systems, resonances)"""


class OracleCheckFailed(AcmsError):
    """One or more oracle checks exceeded their tolerance"""

    def __init__(self, message: str, failures: list[str] | None = None):
        super().__init__(message)
        self.failures = failures or []
