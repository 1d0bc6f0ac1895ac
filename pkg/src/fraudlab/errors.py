"""Exception hierarchy shared by every module.

Three top-level families map onto the CLI exit codes: configuration
problems (exit 2), data problems (exit 3), and fitting problems (exit 4).
"""


class FraudLabError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(FraudLabError):
    """Invalid parameter value, grid axis, or pipeline configuration."""

    exit_code = 2


class DataError(FraudLabError):
    """Problem with input data: schema, parsing, resampling, splitting."""

    exit_code = 3


class SchemaError(DataError):
    """CSV header does not match the expected column layout."""


class RowParseError(DataError):
    """A CSV data row could not be parsed; message carries the line number."""


class ResampleError(DataError):
    """Oversampling preconditions violated (class counts, neighbour pool)."""


class StratificationError(DataError):
    """A stratified split or fold assignment cannot be built."""


class PersistenceError(DataError):
    """A saved model file is unreadable, malformed, or version-incompatible."""


class FitError(FraudLabError):
    """Model training could not proceed or produced no usable model."""

    exit_code = 4


class SearchError(FitError):
    """Every grid-search candidate failed; no winner can be selected."""
