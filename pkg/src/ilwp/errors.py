"""Exception types shared across the codec."""


class IlwpError(Exception):
    """Base class for all errors raised by this package."""


class FormatError(IlwpError):
    """A serialized container or stream is malformed or corrupt."""


class ConfigError(IlwpError):
    """A parameter is outside its supported range or inconsistent."""


class CodingError(IlwpError):
    """Entropy coding was asked to do something impossible."""


class PredictionError(IlwpError):
    """A prediction search was set up with an invalid target or context."""


class AnalysisError(IlwpError):
    """A statistic is undefined for the given input."""
