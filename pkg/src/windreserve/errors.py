"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class WindReserveError(Exception):
    exit_code = 3


class ConfigurationError(WindReserveError, ValueError):
    exit_code = 1


class DomainError(WindReserveError, ValueError):
    """Argument outside the feasible set of an operation."""

    exit_code = 1


class DataError(WindReserveError, ValueError):
    exit_code = 3


class AlignmentError(DataError):
    pass


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GapError(DataError):
    def __init__(self, message: str, start: int, length: int):
        self.start = start
        self.length = length
        super().__init__(message)


class CoverageError(DataError):
    pass


class MissingDayError(WindReserveError):
    exit_code = 4


class InsufficientHistoryError(WindReserveError):
    exit_code = 5

    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(
            f"insufficient history: {required} days required, {available} available"
        )
