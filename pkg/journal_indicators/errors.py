"""
Exception hierarchy for journal indicators.
"""

# CLI exit codes
EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_INVARIANT = 4
EXIT_VALIDATION_FAILED = 5
EXIT_DEGENERATE = 6


class IndicatorError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = EXIT_ERROR


class DomainError(IndicatorError, ValueError):
    """A mathematical precondition does not hold."""

    exit_code = EXIT_INVARIANT


class DegenerateComparisonError(DomainError):
    """Two point masses at the same location cannot be compared."""

    exit_code = EXIT_DEGENERATE


class UnknownJournalError(IndicatorError, KeyError):
    """A journal id is not present in the loaded data."""

    exit_code = EXIT_USAGE

    def __str__(self):
        return str(self.args[0]) if self.args else "unknown journal"


class SettingsError(IndicatorError):
    """Configuration file is missing, malformed or holds invalid values."""

    exit_code = EXIT_USAGE


class ResultIdentityError(IndicatorError):
    """A computed result failed an internal identity check."""

    exit_code = EXIT_INVARIANT


class DatasetError(IndicatorError):
    """Problem with an input file, carrying its position."""

    exit_code = EXIT_PARSE

    def __init__(self, path, reason, line=None, column=None):
        self.path = str(path)
        self.reason = reason
        self.line = line
        self.column = column
        super().__init__(self._format())

    def _format(self):
        position = self.path
        if self.line is not None:
            position += f":{self.line}"
        if self.column is not None:
            position += f":{self.column}"
        return f"{position}: {self.reason}"


class SchemaError(DatasetError):
    """Header does not match the expected columns."""


class ParseError(DatasetError):
    """A cell could not be parsed."""


class DuplicateKeyError(DatasetError):
    """A key that must be unique appears twice."""


class NegativeCitationError(DatasetError):
    """A citation count below zero."""

    exit_code = EXIT_INVARIANT


class InvariantViolationError(DatasetError):
    """A parsed row violates a record invariant (e.g. m < 1)."""

    exit_code = EXIT_INVARIANT


class OutputError(IndicatorError):
    """Results could not be written."""


class UsageError(IndicatorError):
    """A request that cannot be served with the given inputs."""

    exit_code = EXIT_USAGE
