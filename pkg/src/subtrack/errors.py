"""Exception hierarchy shared across the toolkit."""


class PrognosticsError(Exception):
    """Base class for all toolkit errors."""


class DataFormatError(PrognosticsError):
    """Malformed input file (bad field count, non-numeric token, ...)."""


class ValidationError(PrognosticsError):
    """Input violates a documented precondition or invariant."""


class NumericalError(PrognosticsError):
    """Numerical failure (degenerate basis, non-finite values, ...)."""


class NoMatchError(PrognosticsError):
    """No valid (train unit, lag) candidate exists for a test curve."""
