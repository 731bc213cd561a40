"""
Exception hierarchy shared by the simulation, analysis and numerics packages
"""

from typing import Optional


class ShockTasepError(Exception):
    """Base class for all toolkit errors"""


class ConfigError(ShockTasepError, ValueError):
    """Invalid parameters, densities or experiment configuration"""


class WindowError(ShockTasepError, ValueError):
    """Empty window, site outside the window or invalid horizon"""


class HorizonExceededError(ShockTasepError, ValueError):
    """Evolution requested past the stream horizon or backwards in time"""


class PreconditionError(ShockTasepError, ValueError):
    """An operation was called on inputs violating its precondition"""


class StateSpaceError(ShockTasepError, ValueError):
    """Exact CTMC requested on a state space that is too large"""


class RangeTooSmallError(ShockTasepError):
    """Minimizer of a superposition sits on the boundary of the search range"""

    def __init__(self, message: str, argmin: Optional[int] = None):
        super().__init__(message)
        self.argmin = argmin


class ContaminationError(ShockTasepError):
    """An observable's backwards light cone touched the guard band"""

    def __init__(self, reason: str, seed: Optional[int] = None):
        super().__init__(f"contaminated sample (seed={seed}): {reason}")
        self.reason = reason
        self.seed = seed


class InvariantBreachError(ShockTasepError, AssertionError):
    """A pathwise invariant of the coupled dynamics was violated"""


class PrecisionError(ShockTasepError, ArithmeticError):
    """High-precision evaluation disagrees with its precision-doubled rerun"""


class TruncationError(ShockTasepError, ArithmeticError):
    """Dynamic-programming truncation lost more mass than allowed"""


class ConvergenceError(ShockTasepError, ArithmeticError):
    """Quadrature or Fredholm determinant failed its self-convergence check"""
