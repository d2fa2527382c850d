"""Exception types shared across the package."""


class TimecilError(Exception):
    """Base class for all package errors."""


class ConfigError(TimecilError):
    """Invalid configuration value or unknown config key."""


class DatasetLoadError(TimecilError):
    """Dataset files missing or malformed; message names the expected layout."""


class ValidationError(TimecilError):
    """Loaded data violates a declared shape or balance invariant."""


class ProtocolError(TimecilError):
    """Stream too short for the requested tuning protocol."""


class ContractError(TimecilError):
    """An operation was called outside its declared contract."""


class InferenceError(TimecilError):
    """Prediction requested from an unready component (e.g. empty prototypes)."""


class UndefinedMetricError(TimecilError):
    """Metric not defined for the given inputs (e.g. forgetting after task 1)."""


class TrainingAborted(TimecilError):
    """Non-finite loss or another fatal condition inside a training run."""
