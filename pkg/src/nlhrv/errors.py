"""Exception hierarchy shared by all nlhrv modules."""


class NlhrvError(Exception):
    """Base class for every error raised by this package."""


class DegenerateInputError(NlhrvError, ValueError):
    pass


class InsufficientDataError(NlhrvError, ValueError):
    pass


class BoundsError(NlhrvError, IndexError):
    pass


class ShapeError(NlhrvError, ValueError):
    pass


class ParameterError(NlhrvError, ValueError):
    pass


class UndefinedEntropyError(NlhrvError, ArithmeticError):
    pass


class CalibrationError(NlhrvError, RuntimeError):
    pass


class ExtrapolationError(NlhrvError, ValueError):
    """A Gaussian correlation fell outside the populated calibration support."""


class IntegrationError(NlhrvError, ArithmeticError):
    pass


class InvalidNullTestError(NlhrvError, RuntimeError):
    """Too many surrogates failed for the percentile test to be meaningful."""

    def __init__(self, message, n_failed=0, n_total=0):
        super().__init__(message)
        self.n_failed = n_failed
        self.n_total = n_total


class ParseError(NlhrvError, ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptyInputError(NlhrvError, ValueError):
    pass
