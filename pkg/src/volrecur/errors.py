"""Exception hierarchy.

Three broad classes map onto CLI exit codes: configuration problems (2),
bad input data (3) and numerical failures (4).
"""
from __future__ import annotations


class VolrecurError(Exception):
    exit_code = 1


class ConfigError(VolrecurError, ValueError):
    exit_code = 2


class DataError(VolrecurError, ValueError):
    exit_code = 3


class NumericalError(VolrecurError, ArithmeticError):
    exit_code = 4


class ParseError(DataError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonPositivePrice(ParseError):
    pass


class UnsortedInput(ParseError):
    pass


class DuplicateRecord(ParseError):
    pass


class ZeroVariance(DataError):
    pass


class MissingSlot(DataError):
    pass


class InsufficientData(DataError):
    pass


class DegenerateSample(DataError):
    pass


class InsufficientTail(DataError):
    pass


class InvalidParams(ConfigError):
    pass


class ExponentialBoundary(NumericalError):
    """The q-exponential likelihood is maximized at the q -> 1 edge.

    The boundary fit is kept on ``fit`` so callers can still use it.
    """

    def __init__(self, message: str, fit=None):
        super().__init__(message)
        self.fit = fit


class UndefinedRate(NumericalError):
    pass


class FitFailed(NumericalError):
    pass
