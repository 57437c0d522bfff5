"""Error types raised across gaitscope."""


class GaitscopeError(Exception):
    """Base class for all gaitscope errors."""


class ConfigError(GaitscopeError, ValueError):
    """Invalid or unknown configuration value."""


class DatasetFormatError(GaitscopeError, ValueError):
    """A dataset file does not follow the documented layout."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class SkeletonValidationError(GaitscopeError, ValueError):
    """A skeleton, topology or record violates one of its invariants."""


class PreprocessingError(GaitscopeError, ValueError):
    """A preprocessing step cannot be applied to the given sequence."""


class ModelStateError(GaitscopeError, RuntimeError):
    """A model is used in a state that does not support the operation."""


class AnalysisError(GaitscopeError, ValueError):
    """Inputs to a statistic, regression or split do not support the computation."""
