"""Exception hierarchy.

Configuration problems (bad inputs, parameters outside their allowed range)
derive from ``ConfigError`` and map to CLI exit code 2. Failures while a
well-posed computation runs derive from ``ComputationError`` and map to 3.
"""

from __future__ import annotations


class SiegelLabError(Exception):
    """Base class for every error raised by siegel_lab."""


class ConfigError(SiegelLabError, ValueError):
    """Invalid input or parameter."""


class ComputationError(SiegelLabError, RuntimeError):
    """A numerical evaluation failed."""


class InvalidDiscriminantError(ConfigError):
    pass


class WindowTooLargeError(ConfigError):
    pass


class WindowOverflowError(ConfigError):
    pass


class InvalidThresholdsError(ConfigError):
    pass


class QualityBelowFloorError(ConfigError):
    pass


class RangeTooSmallError(ConfigError):
    pass


class CutoffTooSmallError(ConfigError):
    pass


class SieveSupportTooLargeError(ConfigError):
    pass


class TypeICutoffTooLargeError(ConfigError):
    pass


class PreconditionError(ConfigError):
    pass


class NonConvergenceError(ComputationError):
    pass


class QuadratureError(ComputationError):
    pass


class EvaluationError(ComputationError):
    """An arithmetic function returned a non-finite value."""

    def __init__(self, message: str, n: int | None = None) -> None:
        super().__init__(message if n is None else f"{message} (n={n})")
        self.n = n
