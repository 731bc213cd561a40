"""
Limit kernel of half-flat TASEP data and the Airy2->1 one-point law

The kernel is written in the scaling variables (xi, u) of the finite-time
kernels, with xt = 2^(2/3) xi and ut = 2^(1/3) u:

    L = -G(xi_j - xi_i, u_j - u_i) 1[xi_j > xi_i] + T1 + T2

    T1 = 2^(1/3) E int_0^inf e^(v (xt_j - xt_i)) Ai(xt_i^2 + ut_i + v) Ai(xt_j^2 + ut_j + v) dv
    T2 = 2^(1/3) E int_0^inf e^(w (xt_i + xt_j)) Ai(xt_i^2 + ut_i - w) Ai(xt_j^2 + ut_j + w) dw

with E = exp(2/3 xt_j^3 + xt_j ut_j - 2/3 xt_i^3 - xt_i ut_i) and G the heat
kernel. When xt_i + xt_j > 0 the T2 integrand grows before it decays, so T2
is taken in its rewritten form: a closed Airy term minus an integral with
the reflected exponent.
"""

from typing import Optional, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad
from scipy.special import airy, airye

from src.errors import ConfigError, ConvergenceError
from src.limits.fredholm import fredholm_det
from src.limits.quadrature import DEFAULT_ORDER, DEFAULT_SCALE, semi_infinite
from src.limits.tracy_widom import DistributionTable, table_grid, tabulate

CUBE_ROOT_2 = 2.0 ** (1.0 / 3.0)
XI_TILDE = 2.0 ** (2.0 / 3.0)

INNER_NODES = 400
DECAY_LENGTH = 25.0
FORMS = (1, 2)


def _log_airy(z: np.ndarray):
    """Ai(z) as mantissa * exp(log_scale) so products of tiny values do not underflow early"""
    z = np.asarray(z, dtype=float)
    positive = z >= 0
    scaled = airye(np.where(positive, z, 0.0))[0]
    plain = airy(np.where(positive, 0.0, z))[0]
    mantissa = np.where(positive, scaled, plain)
    log_scale = np.where(positive, -2.0 / 3.0 * np.abs(z) ** 1.5, 0.0)
    return mantissa, log_scale


def _product(z1, z2, exponent):
    """Ai(z1) Ai(z2) exp(exponent) without forming the factors separately"""
    m1, l1 = _log_airy(z1)
    m2, l2 = _log_airy(z2)
    return m1 * m2 * np.exp(exponent + l1 + l2)


def _tilde(xi, u):
    return XI_TILDE * np.asarray(xi, dtype=float), CUBE_ROOT_2 * np.asarray(u, dtype=float)


def _log_conjugation(xt_i, ut_i, xt_j, ut_j):
    return 2.0 / 3.0 * xt_j ** 3 + xt_j * ut_j - 2.0 / 3.0 * xt_i ** 3 - xt_i * ut_i


def _integrate(integrand, decay_arg, nodes: int = INNER_NODES) -> np.ndarray:
    """
    Gauss-Legendre over [0, max(0, -decay_arg) + DECAY_LENGTH] elementwise

    `integrand(v)` takes v with a trailing node axis; `decay_arg` is the
    Airy argument whose growth in v makes the integrand decay.
    """
    decay_arg = np.asarray(decay_arg, dtype=float)
    upper = np.maximum(0.0, -decay_arg) + DECAY_LENGTH
    x, w = leggauss(nodes)
    v = 0.5 * upper[..., None] * (x + 1.0)
    weights = 0.5 * upper[..., None] * w
    return np.sum(weights * integrand(v), axis=-1)


def gaussian_part(xi_i, u_i, xi_j, u_j) -> np.ndarray:
    """Heat kernel with variance 2 (xi_j - xi_i), zero unless xi_j > xi_i"""
    dxi = np.asarray(xi_j, dtype=float) - np.asarray(xi_i, dtype=float)
    du = np.asarray(u_j, dtype=float) - np.asarray(u_i, dtype=float)
    later = dxi > 0
    safe = np.where(later, dxi, 1.0)
    return np.where(later, np.exp(-du ** 2 / (4.0 * safe)) / np.sqrt(4.0 * np.pi * safe), 0.0)


def first_term(xi_i, u_i, xi_j, u_j, nodes: int = INNER_NODES) -> np.ndarray:
    xt_i, ut_i = _tilde(xi_i, u_i)
    xt_j, ut_j = _tilde(xi_j, u_j)
    a = (xt_i ** 2 + ut_i)[..., None]
    b = (xt_j ** 2 + ut_j)[..., None]
    rate = (xt_j - xt_i)[..., None]
    log_e = _log_conjugation(xt_i, ut_i, xt_j, ut_j)[..., None]
    decay = np.minimum(xt_i ** 2 + ut_i, xt_j ** 2 + ut_j)
    return CUBE_ROOT_2 * _integrate(lambda v: _product(a + v, b + v, log_e + rate * v), decay, nodes)


def _closed_term(xi_i, u_i, xi_j, u_j) -> np.ndarray:
    xi_i, u_i, xi_j, u_j = (np.asarray(a, dtype=float) for a in (xi_i, u_i, xi_j, u_j))
    gap = xi_j - xi_i
    mantissa, log_scale = _log_airy(u_i + u_j + gap ** 2)
    return mantissa * np.exp(log_scale + 2.0 / 3.0 * gap ** 3 + gap * (u_i + u_j))


def second_term(xi_i, u_i, xi_j, u_j, form: Optional[int] = None, nodes: int = INNER_NODES) -> np.ndarray:
    """
    T2 in the direct form (1), the rewritten form (2), or elementwise the
    stable one when `form` is None
    """
    xt_i, ut_i = _tilde(xi_i, u_i)
    xt_j, ut_j = _tilde(xi_j, u_j)
    xt_i, ut_i, xt_j, ut_j = np.broadcast_arrays(xt_i, ut_i, xt_j, ut_j)
    a = (xt_i ** 2 + ut_i)[..., None]
    b = (xt_j ** 2 + ut_j)[..., None]
    total = (xt_i + xt_j)[..., None]
    log_e = _log_conjugation(xt_i, ut_i, xt_j, ut_j)[..., None]

    def direct():
        return CUBE_ROOT_2 * _integrate(
            lambda w: _product(a - w, b + w, log_e + total * w), xt_j ** 2 + ut_j, nodes)

    def rewritten():
        reflected = CUBE_ROOT_2 * _integrate(
            lambda v: _product(a + v, b - v, log_e - total * v), xt_i ** 2 + ut_i, nodes)
        return _closed_term(xi_i, u_i, xi_j, u_j) - reflected

    if form == 1:
        return direct()
    if form == 2:
        return rewritten()
    if form is not None:
        raise ConfigError(f"unknown form {form}; expected one of {FORMS}")
    growing = (xt_i + xt_j) > 0
    if np.all(growing):
        return rewritten()
    if not np.any(growing):
        return direct()
    return np.where(growing, rewritten(), direct())


def second_term_quad(xi_i: float, u_i: float, xi_j: float, u_j: float, form: int,
                     tolerance: float = 1e-12) -> float:
    """Scalar T2 by adaptive quadrature, used to cross-check the two forms"""
    xt_i, ut_i = float(XI_TILDE * xi_i), float(CUBE_ROOT_2 * u_i)
    xt_j, ut_j = float(XI_TILDE * xi_j), float(CUBE_ROOT_2 * u_j)
    a, b = xt_i ** 2 + ut_i, xt_j ** 2 + ut_j
    log_e = float(_log_conjugation(xt_i, ut_i, xt_j, ut_j))
    total = xt_i + xt_j

    if form == 1:
        fn = lambda w: float(_product(a - w, b + w, log_e + total * w))  # noqa: E731
        upper = max(0.0, -b) + 2.0 * DECAY_LENGTH
    elif form == 2:
        fn = lambda v: float(_product(a + v, b - v, log_e - total * v))  # noqa: E731
        upper = max(0.0, -a) + 2.0 * DECAY_LENGTH
    else:
        raise ConfigError(f"unknown form {form}; expected one of {FORMS}")

    value, error = quad(fn, 0.0, upper, epsabs=tolerance, epsrel=tolerance, limit=500)
    if error > 1e3 * tolerance:
        raise ConvergenceError(f"adaptive quadrature error {error:.2e} for form {form}")
    value *= CUBE_ROOT_2
    if form == 2:
        value = float(_closed_term(xi_i, u_i, xi_j, u_j)) - value
    return value


def limit_kernel(xi_i, u_i, xi_j, u_j, nodes: int = INNER_NODES) -> np.ndarray:
    """Limit kernel in (xi, u) variables, vectorized over broadcastable arguments"""
    return (-gaussian_part(xi_i, u_i, xi_j, u_j)
            + first_term(xi_i, u_i, xi_j, u_j, nodes)
            + second_term(xi_i, u_i, xi_j, u_j, None, nodes))


def airy21_kernel(xt_i, U_i, xt_j, U_j, nodes: int = INNER_NODES) -> np.ndarray:
    """
    Kernel in the tilde variables with the interface shift min(0, xt)^2

    U is the shifted tilde height, ut = U - min(0, xt)^2; the factor 2^(-1/3)
    accounts for dU = 2^(1/3) du.
    """
    xt_i, U_i, xt_j, U_j = (np.asarray(a, dtype=float) for a in (xt_i, U_i, xt_j, U_j))
    u_i = (U_i - np.minimum(0.0, xt_i) ** 2) / CUBE_ROOT_2
    u_j = (U_j - np.minimum(0.0, xt_j) ** 2) / CUBE_ROOT_2
    value = limit_kernel(xt_i / XI_TILDE, u_i, xt_j / XI_TILDE, u_j, nodes)
    return value / CUBE_ROOT_2


def airy21_onepoint(xi: float, s: float, order: int = DEFAULT_ORDER, check: bool = True) -> float:
    """
    det(I - L(xi, ., xi, .)) on L2((s, inf), du)

    Interpolates between a GUE-type law for xi << 0 and F_GOE(2s) for xi >> 0.
    """
    def kernel(x, y):
        return limit_kernel(xi, x, xi, y)

    return fredholm_det(kernel, s, semi_infinite(order, s, DEFAULT_SCALE), check=check)


def airy21_table(
    xi: float,
    grid: Optional[Sequence[float]] = None,
    order: int = DEFAULT_ORDER,
    workers: int = 1
) -> DistributionTable:
    """Tabulate airy21_onepoint at fixed xi"""
    grid = table_grid() if grid is None else grid
    return tabulate(lambda s: airy21_onepoint(xi, s, order), grid,
                    {'law': 'airy21', 'xi': xi, 'order': order}, workers)
