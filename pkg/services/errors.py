"""Exception hierarchy shared by the engine and the CLI."""

from typing import Optional

from models import Report


class NcError(ValueError):
    pass


class PresentationError(NcError):
    """Structural problem: rule shape, missing rule, index range, rank mismatch."""


class InvalidModelError(NcError):
    """A model failed a consistency check that an operation depends on."""

    def __init__(self, message: str, report: Optional[Report] = None):
        super().__init__(message)
        self.report = report


class ParseError(NcError):
    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column
