"""Exception types shared across the package."""


class NaesatError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParametersError(NaesatError, ValueError):
    """An operation was called with out-of-range or inconsistent arguments."""


class CorruptInstanceError(NaesatError, ValueError):
    """A formula or clause violates a structural invariant."""


class FormulaParseError(NaesatError, ValueError):
    """A serialized instance could not be parsed.

    ``line`` is the 1-based offending line number when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TooLargeError(NaesatError):
    """An exact computation was refused because it would not fit the guard."""


class WindowUnreachableError(NaesatError):
    """No interpolation step reaches the requested distance window."""
