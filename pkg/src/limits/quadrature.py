"""
Gauss-Legendre rules on finite and semi-infinite intervals
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from src.errors import ConfigError

DEFAULT_ORDER = 60
DEFAULT_SCALE = 5.0


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    """
    Nodes and positive weights of a mapped Gauss-Legendre rule

    For kind 'finite' the rule lives on [lower, param]; for kind
    'semi_infinite' it lives on (lower, inf) with map scale `param`.
    """

    nodes: np.ndarray
    weights: np.ndarray
    order: int
    kind: str
    lower: float
    param: float

    def __post_init__(self):
        if np.any(self.weights <= 0):
            raise ConfigError("quadrature weights must be positive")

    def integrate(self, fn: Callable[[np.ndarray], np.ndarray]) -> float:
        return float(np.dot(self.weights, fn(self.nodes)))

    def with_order(self, order: int) -> 'QuadratureRule':
        if self.kind == 'finite':
            return gauss_legendre(order, self.lower, self.param)
        return semi_infinite(order, self.lower, self.param)

    def doubled(self) -> 'QuadratureRule':
        return self.with_order(2 * self.order)


def gauss_legendre(order: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    """Gauss-Legendre rule on [a, b], exact for polynomials of degree 2 order - 1"""
    if order < 1 or not b > a:
        raise ConfigError(f"invalid rule: order={order}, interval=[{a}, {b}]")
    u, w = leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (u + 1.0), half * w, order, 'finite', float(a), float(b))


def semi_infinite(order: int = DEFAULT_ORDER, start: float = 0.0, scale: float = DEFAULT_SCALE) -> QuadratureRule:
    """
    Rule on (start, inf) through x = start + scale * log(2 / (1 - u)), u in (-1, 1)

    The map sends u = -1 to the left end and compresses the tail, which suits
    integrands with Airy-type decay.
    """
    if order < 1 or not scale > 0:
        raise ConfigError(f"invalid rule: order={order}, scale={scale}")
    u, w = leggauss(order)
    nodes = start + scale * np.log(2.0 / (1.0 - u))
    weights = w * scale / (1.0 - u)
    return QuadratureRule(nodes, weights, order, 'semi_infinite', float(start), float(scale))
