"""Exception types shared across the package."""


class CtcRexError(Exception):
    """Base class for every error raised by this package."""


class InputError(CtcRexError):
    """Invalid argument or inconsistent data passed to an operation."""


class FormatError(InputError):
    """Malformed data file; carries the offending line number when known."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class GrammarError(CtcRexError):
    """Syntax or compilation failure in the regex dialect.

    `offset` is the byte offset into the pattern text when the error is
    positional (parse errors), else None.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"offset {offset}: {message}"
        super().__init__(message)
        self.offset = offset


class EnumerationCapError(CtcRexError):
    """Brute-force search space exceeds the configured cap."""
