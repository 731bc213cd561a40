"""
Nystrom evaluation of Fredholm determinants det(I - K) on L2((s, inf))
"""

from typing import Callable, Optional

import numpy as np

from src.errors import ConvergenceError
from src.limits.quadrature import DEFAULT_ORDER, DEFAULT_SCALE, QuadratureRule, semi_infinite
from src.monitoring.logger import StructuredLogger

logger = StructuredLogger(name='fredholm')

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]

CONVERGENCE_TOLERANCE = 1e-6
SELF_CONVERGENCE_TARGET = 1e-8


def nystrom_det(kernel: Kernel, rule: QuadratureRule) -> float:
    """det(I - W^(1/2) K W^(1/2)) on the rule's nodes"""
    root = np.sqrt(rule.weights)
    x = rule.nodes
    matrix = np.eye(len(x)) - root[:, None] * kernel(x[:, None], x[None, :]) * root[None, :]
    return float(np.linalg.det(matrix))


def fredholm_det(
    kernel: Kernel,
    s: float,
    rule: Optional[QuadratureRule] = None,
    check: bool = True,
    tolerance: float = CONVERGENCE_TOLERANCE
) -> float:
    """
    det(I - K) on L2((s, inf))

    Args:
        kernel: Vectorized K(x, y)
        s: Left end of the domain
        rule: Quadrature on (s, inf) (default: order 60 exponential map)
        check: Re-evaluate at doubled order and compare
        tolerance: Largest accepted change under order doubling

    Returns:
        Determinant at the highest order evaluated

    Raises:
        ConvergenceError: doubling the order moved the result by more than tolerance
    """
    if rule is None:
        rule = semi_infinite(DEFAULT_ORDER, s, DEFAULT_SCALE)
    value = nystrom_det(kernel, rule)
    if not check:
        return value

    refined = nystrom_det(kernel, rule.doubled())
    change = abs(refined - value)
    if change > tolerance:
        raise ConvergenceError(f"Fredholm determinant at s={s} moved by {change:.2e} under order doubling")
    if change > SELF_CONVERGENCE_TARGET:
        logger.warning("Fredholm determinant above self-convergence target", s=s, change=change, order=rule.order)
    return refined
