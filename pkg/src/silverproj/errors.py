"""Exception types shared by every module."""


class SilverError(Exception):
    """Base class for all errors raised by silverproj."""


class ParseError(SilverError):
    """Input text does not match its format."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(SilverError):
    """Input parsed but violates a structural invariant."""
