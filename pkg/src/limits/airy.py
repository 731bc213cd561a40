"""
Airy function wrappers with the domain guard used throughout the numerics
"""

from typing import Union

import numpy as np
from scipy.special import airy

from src.errors import PreconditionError

AIRY_LOWER_BOUND = -50.0

ArrayLike = Union[float, np.ndarray]


def _guard(x: ArrayLike) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < AIRY_LOWER_BOUND):
        raise PreconditionError(f"Airy argument below {AIRY_LOWER_BOUND}")
    return x


def airy_ai(x: ArrayLike) -> ArrayLike:
    """Ai(x) for x >= -50"""
    value = airy(_guard(x))[0]
    return float(value) if np.ndim(value) == 0 else value


def airy_ai_prime(x: ArrayLike) -> ArrayLike:
    """Ai'(x) for x >= -50"""
    value = airy(_guard(x))[1]
    return float(value) if np.ndim(value) == 0 else value


def airy_pair(x: np.ndarray):
    """(Ai, Ai') on an array in one call"""
    ai, aip, _, _ = airy(_guard(x))
    return ai, aip
