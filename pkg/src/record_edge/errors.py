"""Exception types shared across the package."""


class RecordEdgeError(Exception):
    """Base class for errors raised by this package."""


class DomainError(RecordEdgeError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ParseError(RecordEdgeError, ValueError):
    """Malformed text input; carries the offending location when known."""

    def __init__(self, message, *, line=None, column=None):
        loc = ""
        if line is not None:
            loc += f" (line {line}"
            loc += f", column {column})" if column is not None else ")"
        elif column is not None:
            loc += f" (column {column})"
        super().__init__(message + loc)
        self.line = line
        self.column = column


class ParseWarning(UserWarning):
    """A row was skipped while reading input in lenient mode."""
