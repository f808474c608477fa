"""Exception hierarchy shared by the library and the command line."""


class SSNMFError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(SSNMFError, ValueError):
    """An argument is outside its admissible range."""


class DimensionError(ParameterError):
    """Array shapes are incompatible."""


class InputError(SSNMFError, ValueError):
    """Input data is malformed (e.g. contains NaN or Inf)."""


class DegenerateInputError(InputError):
    """Input is well-formed but degenerate for the requested quantity."""


class RankDeficiencyError(SSNMFError, ArithmeticError):
    """A vector to be added to an orthonormal basis lies in its span."""


class FormatError(SSNMFError):
    """A file does not follow the expected format.

    ``offset`` is the byte offset (binary formats) and ``line`` the 1-based
    line number (text formats) where the problem was detected, when known.
    """

    def __init__(self, message, *, offset=None, line=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        if line is not None:
            message = f"{message} (at line {line})"
        super().__init__(message)
        self.offset = offset
        self.line = line
