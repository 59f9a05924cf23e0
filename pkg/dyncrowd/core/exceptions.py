"""
dyncrowd Exceptions
===================

Every error raised on purpose by dyncrowd derives from ``DynCrowdError`` so the
command-line tool can catch one type at its dispatch boundary.
"""

from typing import Any, Dict, Optional


class DynCrowdError(Exception):
    """
    Base exception class for all dyncrowd errors.

    Carries an error code for programmatic handling and a details mapping
    that ends up in structured logs.
    """

    error_code: Optional[str] = None

    def __init__(
        self,
        message: str,
        error_code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None,
        original_error: Optional[Exception] = None
    ):
        """
        Initialize DynCrowdError.

        Args:
            message (str): Human-readable error message
            error_code (str): Overrides the class error code
            details (Dict[str, Any]): Additional error details
            original_error (Exception): Original exception that caused this error
        """
        super().__init__(message)
        self.message = message
        self.error_code = error_code or self.error_code
        self.details = details or {}
        self.original_error = original_error

    def __str__(self) -> str:
        if self.error_code:
            return f"[{self.error_code}] {self.message}"
        return self.message

    def to_dict(self) -> Dict[str, Any]:
        """Convert error to dictionary for serialization."""
        return {
            "error_type": self.__class__.__name__,
            "message": self.message,
            "error_code": self.error_code,
            "details": self.details,
            "original_error": str(self.original_error) if self.original_error else None
        }


class ConfigurationError(DynCrowdError):
    """
    Configuration-related errors.

    Raised for invalid threshold values, unknown config keys and unreadable
    config files. ``config_key`` names the offending field.
    """

    error_code = "CONFIG_ERROR"

    def __init__(
        self,
        message: str,
        config_key: Optional[str] = None,
        config_value: Optional[Any] = None,
        **kwargs
    ):
        details = kwargs.pop("details", None) or {}
        if config_key is not None:
            details.setdefault("config_key", config_key)
        super().__init__(message, details=details, **kwargs)
        self.config_key = config_key
        self.config_value = config_value


class ClusteringError(DynCrowdError):
    """Agglomerative clustering received an empty input or a bad threshold."""

    error_code = "CLUSTERING_ERROR"


class InsufficientMembersError(DynCrowdError):
    """Too few members for a density score or a centroid."""

    error_code = "INSUFFICIENT_MEMBERS"


class EngineError(DynCrowdError):
    """Dynamic clustering engine misuse, e.g. an empty initialization window."""

    error_code = "ENGINE_ERROR"


class FrameOrderError(EngineError):
    """
    Frame stream precondition violated.

    Raised when frame indices do not strictly increase or an id repeats
    within one frame.
    """

    error_code = "FRAME_ORDER_ERROR"

    def __init__(self, message: str, frame: Optional[int] = None, **kwargs):
        super().__init__(message, **kwargs)
        self.frame = frame


class InvariantViolation(EngineError):
    """The partition validator found a pedestrian in two places (or none)."""

    error_code = "INVARIANT_VIOLATION"


class MetricsError(DynCrowdError):
    """A metric had nothing to measure or got mismatched inputs."""

    error_code = "METRICS_ERROR"


class PredictionError(DynCrowdError):
    """Predictor input too short or evaluation horizon beyond available truth."""

    error_code = "PREDICTION_ERROR"


class SceneSpecError(DynCrowdError):
    """Degenerate or invalid synthetic scene specification."""

    error_code = "SCENE_SPEC_ERROR"


class MotFormatError(DynCrowdError):
    """
    MOT tracking file could not be used.

    ``line_no`` is the 1-based line that triggered the error, when there is one.
    """

    error_code = "MOT_FORMAT_ERROR"

    def __init__(self, message: str, line_no: Optional[int] = None, **kwargs):
        details = kwargs.pop("details", None) or {}
        if line_no is not None:
            details.setdefault("line_no", line_no)
        super().__init__(message, details=details, **kwargs)
        self.line_no = line_no


class RunDirectoryError(DynCrowdError):
    """A run directory is missing or lacks the files a command needs."""

    error_code = "RUN_DIRECTORY_ERROR"
