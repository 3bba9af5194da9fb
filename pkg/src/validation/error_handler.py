# src/validation/error_handler.py

from typing import Any, Optional


class BaseFitzkitError(Exception):
    """Base class for custom exceptions in this application."""
    exit_code = 2

    def __init__(self, message: str = "fitzkit error", details: Optional[Any] = None):
        self.message = message
        self.details = details
        super().__init__(f"{message}{f': {details}' if details else ''}")


class InputError(BaseFitzkitError):
    """Malformed or inconsistent input: shapes, ordering, empty operators, bad segments."""
    def __init__(self, message="Invalid input", details=None):
        super().__init__(message, details)


class UnsupportedDimensionError(InputError):
    """Raised when an exact geometric routine is asked for a dimension it does not cover."""
    def __init__(self, dimension: int, limit: int = 3, details=None):
        self.dimension = dimension
        self.limit = limit
        super().__init__(f"Dimension {dimension} is not supported (limit {limit})", details)


class ImproperFunctionError(InputError):
    """Raised when a function is identically +inf or takes the value -inf."""
    def __init__(self, message="Function is not proper", details=None):
        super().__init__(message, details)


class UnsupportedRepresentationError(InputError):
    """Raised when an operation is not defined for the given representation."""
    def __init__(self, message="Unsupported representation", details=None):
        super().__init__(message, details)


class SchemaValidationError(InputError):
    """Raised when a JSON document does not match its schema."""
    def __init__(self, message="Schema validation failed", path: str = "", details=None):
        self.path = path
        super().__init__(f"{message} (path: {path or '<root>'})", details)


class PreconditionError(BaseFitzkitError):
    """Raised when a stage is run without the precondition it needs."""
    def __init__(self, message="Precondition not met", details=None):
        super().__init__(message, details)


class ConfigurationError(BaseFitzkitError):
    """Exception raised for errors in configuration loading or validation."""
    def __init__(self, message="Configuration error", details=None):
        super().__init__(message, details)


# short alias
ConfigError = ConfigurationError


class AssertionViolation(BaseFitzkitError):
    """A mathematical assertion failed; the witness locates the failure."""
    exit_code = 1

    def __init__(self, message="Assertion violated", witness: Optional[Any] = None, details=None):
        self.witness = witness
        super().__init__(message, details)


class InternalError(BaseFitzkitError):
    """An unexpected failure inside fitzkit itself, not attributable to the input."""
    exit_code = 3

    def __init__(self, message="Internal error", details=None):
        super().__init__(message, details)

    @classmethod
    def wrap(cls, error: BaseException) -> "InternalError":
        return cls(f"Unexpected {type(error).__name__}", str(error) or None)


def exit_code_for(error: BaseException) -> int:
    """Map an exception to the CLI exit-code contract (1 = violation, 2 = input/config, 3 = internal)."""
    if isinstance(error, BaseFitzkitError):
        return error.exit_code
    return InternalError.exit_code
