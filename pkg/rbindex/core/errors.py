from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from rbindex.services.geometry import ValidationReport


class RBIndexError(Exception):
    """Base class for every error raised by the package."""


class InvalidInput(RBIndexError, ValueError):
    """Input violates the general-position assumptions."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        super().__init__(message)
        self.report = report


class DuplicateKey(RBIndexError, KeyError):
    pass


class MissingKey(RBIndexError, KeyError):
    pass


class JoinOrderViolation(RBIndexError, ValueError):
    pass


class UnknownEdge(RBIndexError, KeyError):
    pass


class InconsistentOracle(RBIndexError, RuntimeError):
    pass


class OutOfDomain(RBIndexError, ValueError):
    pass


class GenerationFailure(RBIndexError, RuntimeError):
    pass


class InputFormatError(RBIndexError, ValueError):
    """A segment, terrain or planes file could not be parsed."""

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no
