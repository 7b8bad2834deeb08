"""Exception hierarchy shared by the library and the command line."""


class BenfordError(Exception):
    """Base class for every error raised by this package."""


class DomainError(BenfordError, ValueError):
    """An argument lies outside the domain of the operation."""


class InvalidObservationError(BenfordError, ValueError):
    """An observation has no first significant digit (zero, negative, non-finite)."""


class ZeroObservationError(InvalidObservationError):
    """The observation is zero."""


class DigitParseError(BenfordError, ValueError):
    """A text record could not be read as a decimal number."""


class EmptySampleError(BenfordError, ValueError):
    """No valid observation remained after applying the ingestion policy."""


class ConfigurationError(BenfordError, ValueError):
    """Inconsistent or missing configuration (calibration, critical values)."""


class RegistryError(BenfordError, KeyError):
    """Unknown statistic identifier."""


class ApproximationError(BenfordError, ArithmeticError):
    """The moment-matching tail approximation is not defined for the input."""


class NumericalError(BenfordError, ArithmeticError):
    """A matrix that should be positive semidefinite is not, beyond tolerance."""
