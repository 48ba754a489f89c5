"""Exception types raised across the toolkit.

Every error derives from ``ValueError`` so callers that only care about
"bad input" can catch that.
"""


class PriceNoiseError(ValueError):
    """Base class for all toolkit errors."""


class InvalidSeriesError(PriceNoiseError):
    """Non-positive time step, non-finite sample, or malformed series."""


class EmptyRequestError(PriceNoiseError):
    """A generator was asked for zero samples or zero paths."""


class ConfigError(PriceNoiseError):
    """Unsupported option value (distribution tag, taper name, ...)."""


class ResourceLimitError(PriceNoiseError):
    """Requested ensemble exceeds the configured sample cap."""


class DegenerateWindowError(PriceNoiseError):
    """Switch window does not overlap the series."""


class InsufficientDataError(PriceNoiseError):
    """Series too short for the requested lag, span or estimator."""


class DegenerateInputError(PriceNoiseError):
    """Zero-variance input where a normalisation is required."""


class StatisticalPowerError(PriceNoiseError):
    """Too few ensemble paths for a meaningful standard error."""


class PriceFileError(PriceNoiseError):
    """Problem in a price CSV; carries the offending line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MissingColumnError(PriceFileError):
    pass


class UnparseableValueError(PriceFileError):
    pass


class NonMonotoneTimeError(PriceFileError):
    pass


class NonPositivePriceError(PriceFileError):
    pass
