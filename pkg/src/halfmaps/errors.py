"""Exception types raised across the package."""

from __future__ import annotations


class HalfMapError(ValueError):
    """Base class for every error raised by :mod:`halfmaps`."""


class InvalidInputError(HalfMapError):
    pass


class MeanNotZeroError(HalfMapError):
    """A negative-order operator was applied to a field with a non-negligible mean."""


class NotOnSphereError(HalfMapError):
    pass


class DegenerateParameterError(HalfMapError):
    """A Blaschke zero (or family parameter) lies on or outside the unit circle."""


class DegreeUndeterminedError(HalfMapError):
    pass


class InsufficientResolutionError(HalfMapError):
    pass


class InconsistentProfileError(HalfMapError):
    pass


class ExtractionUnreliableError(HalfMapError):
    pass


class InsufficientFamilyError(HalfMapError):
    pass


class ConfigError(HalfMapError):
    pass


class ParseError(HalfMapError):
    """Malformed map file or spec string; ``location`` says where."""

    def __init__(self, message: str, location: str | None = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class StagnationError(HalfMapError):
    """Descent step size underflowed; ``trace`` holds the iterates so far."""

    def __init__(self, message: str, trace=None):
        self.trace = trace
        super().__init__(message)
