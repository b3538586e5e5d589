"""Exception types shared across the toolkit."""


class FractalLabError(Exception):
    """Base class for all toolkit errors."""


class CapacityError(FractalLabError):
    """Grid or cell count exceeds what the index representation can hold."""


class DomainError(FractalLabError, ValueError):
    """An argument is outside its mathematical domain."""


class EmptySupportError(FractalLabError, ValueError):
    """A measure construction was asked to run on an empty set."""


class EmptyLevelError(FractalLabError, ValueError):
    """A zero count appeared inside a log-fit range."""


class DegenerateFitError(FractalLabError, ValueError):
    """Fewer than two usable points were supplied to a slope fit."""


class UndefinedRatioError(FractalLabError, ArithmeticError):
    """A normalized ratio was requested with a zero denominator."""
