"""Exception types shared across the package."""


class LeakVoronoiError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateSites(LeakVoronoiError):
    """Site set violates general position (collinear triples, cocircular quadruples)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class EmptyCell(LeakVoronoiError):
    """A cell with empty interior was used where a feasible cell is required."""


class MissingLink(LeakVoronoiError):
    """A two-leak sample references single-leak samples that are not available."""


class EmptyInput(LeakVoronoiError, ValueError):
    """A metric was requested over zero samples."""


class FormatError(LeakVoronoiError, ValueError):
    """Malformed setup or dataset file.

    ``line`` is the 1-based line number of the offending record, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
