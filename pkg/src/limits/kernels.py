"""
Finite-time kernel entries for half-flat TASEP data and their Airy-scaled limits

The contour integrals around 0 have a single pole there, so each entry is
a Taylor coefficient computed exactly as a finite alternating sum. The sums
cancel heavily, so they run in a private mpmath context whose precision is
doubled (through tenacity) until a precision-doubled rerun agrees.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import exp, floor, lgamma, log, pi, sqrt
from typing import Callable, Dict, Optional

import numpy as np
from mpmath.ctx_mp import MPContext
from scipy.signal import lfilter
from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from src.errors import PrecisionError, PreconditionError, TruncationError
from src.limits.airy import airy_ai

BASE_PRECISION = 512
PRECISION_ATTEMPTS = 3
RELATIVE_TOLERANCE = 1e-8
TRUNCATION_TOLERANCE = 1e-8
MAX_KERNEL_TIME = 500.0

CUBE_ROOT_2 = 2.0 ** (1.0 / 3.0)


def kernel_Q(n: int, dx: int, lam: float) -> float:
    """
    Conjugated transition weight of n geometric steps covering distance dx

    (1 - lam)^(dx - n) lam^n binom(dx - 1, n - 1), zero unless dx >= n.
    """
    if n < 1:
        raise PreconditionError(f"kernel_Q needs n >= 1, got {n}")
    if dx < n:
        return 0.0
    log_value = ((dx - n) * log(1.0 - lam) + n * log(lam)
                 + lgamma(dx) - lgamma(n) - lgamma(dx - n + 1))
    return exp(log_value)


def _context(precision: int) -> MPContext:
    ctx = MPContext()
    ctx.prec = precision
    return ctx


def _s_coefficient(ctx: MPContext, t: float, n: int, k: int):
    """[w^k] (1 - w)^n e^(t w)"""
    if k < 0:
        return ctx.zero
    if t == 0:
        return (-1) ** k * ctx.binomial(n, k) if k <= n else ctx.zero
    t = ctx.mpf(t)
    term = ctx.power(t, k) / ctx.factorial(k)
    total = term
    for j in range(min(n, k)):
        term *= -ctx.mpf(n - j) * (k - j) / ((j + 1) * t)
        total += term
    return total


def _sbar_coefficient(ctx: MPContext, t: float, n: int, m: int):
    """[w^(n-1)] (1 - w)^m e^(t w) for any integer m"""
    top = n - 1
    if t == 0:
        return (-1) ** top * ctx.binomial(m, top)
    t = ctx.mpf(t)
    term = ctx.power(t, top) / ctx.factorial(top)
    total = term
    for j in range(top):
        term *= -ctx.mpf(m - j) * (top - j) / ((j + 1) * t)
        total += term
    return total


def _s_value(ctx: MPContext, t: float, n: int, y: int, x: int, lam: float):
    k = n + x - y
    if k < 0:
        return ctx.zero
    lam = ctx.mpf(lam)
    return (ctx.power(1 - lam, k) * ctx.power(lam, -n) * ctx.exp(ctx.mpf(t) * (lam - 1))
            * _s_coefficient(ctx, t, n, k))


def _sbar_value(ctx: MPContext, t: float, n: int, y: int, x: int, lam: float):
    if n <= 0:
        return ctx.zero
    lam = ctx.mpf(lam)
    return (ctx.power(1 - lam, -n + y - x) * ctx.power(lam, n) * ctx.exp(-ctx.mpf(t) * lam)
            * _sbar_coefficient(ctx, t, n, x - y + n - 1))


def _checked(evaluate: Callable, precision: int) -> float:
    fine = _context(2 * precision)
    low = fine.mpf(evaluate(_context(precision)))
    high = evaluate(fine)
    if high == 0:
        if low != 0:
            raise PrecisionError(f"value {low} at {precision} bits vanishes at {2 * precision} bits")
        return 0.0
    error = abs((low - high) / high)
    if error > RELATIVE_TOLERANCE:
        raise PrecisionError(f"relative change {float(error):.2e} between {precision} and {2 * precision} bits")
    return float(high)


def high_precision(evaluate: Callable, base_precision: int = BASE_PRECISION) -> float:
    """Evaluate with precision escalation until a doubled-precision rerun agrees"""
    for attempt in Retrying(
        stop=stop_after_attempt(PRECISION_ATTEMPTS),
        retry=retry_if_exception_type(PrecisionError),
        reraise=True,
    ):
        with attempt:
            precision = base_precision * 2 ** (attempt.retry_state.attempt_number - 1)
            value = _checked(evaluate, precision)
    return value


def _guard_time(t: float) -> None:
    if not 0.0 <= t <= MAX_KERNEL_TIME:
        raise PreconditionError(f"finite-time kernels support 0 <= t <= {MAX_KERNEL_TIME:g}, got {t}")


def kernel_S(t: float, n: int, y: int, x: int, lam: float) -> float:
    """(1-lam)^k lam^(-n) e^(t(lam-1)) [w^k] (1-w)^n e^(tw), k = n + x - y"""
    _guard_time(t)
    return high_precision(lambda ctx: _s_value(ctx, t, n, y, x, lam))


def kernel_Sbar(t: float, n: int, y: int, x: int, lam: float) -> float:
    """(1-lam)^(y-x-n) lam^n e^(-t lam) [w^(n-1)] (1-w)^(x-y+n-1) e^(tw); zero for n <= 0"""
    _guard_time(t)
    return high_precision(lambda ctx: _sbar_value(ctx, t, n, y, x, lam))


def half_flat_data(lam: float) -> Callable[[int], int]:
    """X0(m) = -floor(m / lam): density lam on the negative half-line, empty on the right"""
    lam_q = Fraction(repr(lam))
    return lambda m: -floor(m / lam_q)


def kernel_Sbar_epi(
    t: float,
    n: int,
    y: int,
    x: int,
    lam: float,
    x0: Optional[Callable[[int], int]] = None,
    truncation: float = TRUNCATION_TOLERANCE
) -> float:
    """
    E[ Sbar_(n - tau)(B_tau, x) ; tau < n ] for the geometric walk B started at y

    B steps down by k >= 1 with probability lam (1 - lam)^(k - 1) and is
    stopped at tau = min{m >= 0 : B_m > X0(m + 1)}. The law of (tau, B_tau)
    comes from a dynamic programme over the surviving mass.

    Raises:
        TruncationError: mass pushed below the lower cutoff exceeds `truncation`
    """
    _guard_time(t)
    if n <= 0:
        return 0.0
    x0 = x0 or half_flat_data(lam)
    if y > x0(1):
        return kernel_Sbar(t, n, y, x, lam)
    if n == 1:
        return 0.0

    spread = sqrt(n * (1.0 - lam)) / lam
    lower = int(floor(y - n / lam - 8.0 * spread - 2.0 / lam - 10.0))
    sites = np.arange(lower, y + 1)
    alive = np.zeros(len(sites))
    alive[-1] = 1.0
    lost = 0.0
    total = 0.0

    for m in range(1, n):
        # G(b) = lam a(b+1) + (1-lam) G(b+1), run from the top site down
        shifted = np.concatenate([[0.0], alive[::-1][:-1]])
        moved = lfilter([lam], [1.0, -(1.0 - lam)], shifted)[::-1]
        lost += alive.sum() - moved.sum()
        hit = sites > x0(m + 1)
        for idx in np.flatnonzero(hit & (moved > 0)):
            total += moved[idx] * kernel_Sbar(t, n - m, int(sites[idx]), x, lam)
        moved[hit] = 0.0
        alive = moved
        if alive.sum() == 0.0:
            break

    if lost > truncation:
        raise TruncationError(f"walk lost mass {lost:.2e} below cutoff {lower}")
    return total


@dataclass(frozen=True)
class KernelScaling:
    """
    Integer lattice point nearest to the Airy scaling of (xi, u, v) at time t

    n = lam^2 t + lam c xi t^(2/3), x = (1-2lam) t - c xi t^(2/3) - d u t^(1/3) / lam
    and y = d v t^(1/3) / lam, with c = 2^(5/3) chi^(1/3), d = 2^(1/3) chi^(2/3).
    The effective xi, u, v of the rounded point are exposed for the limit.
    """

    lam: float
    t: float
    xi: float
    u: float
    v: float = 0.0

    @property
    def chi(self) -> float:
        return self.lam * (1.0 - self.lam)

    @property
    def c(self) -> float:
        return 2.0 ** (5.0 / 3.0) * self.chi ** (1.0 / 3.0)

    @property
    def d(self) -> float:
        return CUBE_ROOT_2 * self.chi ** (2.0 / 3.0)

    @property
    def prefactor(self) -> float:
        return self.d * self.t ** (1.0 / 3.0) / self.lam

    @property
    def n(self) -> int:
        exact = self.lam ** 2 * self.t + self.lam * self.c * self.xi * self.t ** (2.0 / 3.0)
        return max(1, int(round(exact)))

    @property
    def x(self) -> int:
        return int(round((1.0 - 2.0 * self.lam) * self.t - self.c * self.xi_eff * self.t ** (2.0 / 3.0)
                         - self.u * self.prefactor))

    @property
    def y(self) -> int:
        return int(round(self.v * self.prefactor))

    @property
    def xi_eff(self) -> float:
        return (self.n - self.lam ** 2 * self.t) / (self.lam * self.c * self.t ** (2.0 / 3.0))

    @property
    def u_eff(self) -> float:
        return ((1.0 - 2.0 * self.lam) * self.t - self.c * self.xi_eff * self.t ** (2.0 / 3.0) - self.x) \
            / self.prefactor

    @property
    def v_eff(self) -> float:
        return self.y / self.prefactor

    def offsets(self) -> Dict[str, float]:
        return {'xi': self.xi_eff - self.xi, 'u': self.u_eff - self.u, 'v': self.v_eff - self.v}


def gaussian_limit(delta_xi: float, delta_u: float) -> float:
    """Heat kernel with variance 2 delta_xi, the limit of the scaled Q"""
    return exp(-delta_u ** 2 / (4.0 * delta_xi)) / sqrt(4.0 * pi * delta_xi)


def _tilde(xi: float, u: float, v: float):
    return 2.0 ** (2.0 / 3.0) * xi, CUBE_ROOT_2 * u, CUBE_ROOT_2 * v


def s_limit(xi: float, u: float, v: float) -> float:
    xt, ut, vt = _tilde(xi, u, v)
    return CUBE_ROOT_2 * airy_ai(xt ** 2 + ut + vt) * exp(-2.0 / 3.0 * xt ** 3 - xt * (ut + vt))


def sbar_limit(xi: float, u: float, v: float) -> float:
    xt, ut, vt = _tilde(xi, u, v)
    return CUBE_ROOT_2 * airy_ai(xt ** 2 + ut + vt) * exp(2.0 / 3.0 * xt ** 3 + xt * (ut + vt))


def sbar_epi_limit(xi: float, u: float, v: float) -> float:
    """Above the initial data the walk stops at once; below it the limit reflects v"""
    return sbar_limit(xi, u, v if v >= 0 else -v)


def scaled_Q(lam: float, t: float, xi_i: float, u_i: float, xi_j: float, u_j: float) -> Dict[str, float]:
    """Scaled Q between two lattice points next to the limit at their effective coordinates"""
    first, second = KernelScaling(lam, t, xi_i, u_i), KernelScaling(lam, t, xi_j, u_j)
    value = first.prefactor * kernel_Q(second.n - first.n, first.x - second.x, lam)
    limit = gaussian_limit(second.xi_eff - first.xi_eff, second.u_eff - first.u_eff)
    return {'value': value, 'limit': limit}


def scaled_S(lam: float, t: float, xi: float, u: float, v: float) -> Dict[str, float]:
    point = KernelScaling(lam, t, xi, u, v)
    value = point.prefactor * kernel_S(t, point.n, point.y, point.x, lam)
    return {'value': value, 'limit': s_limit(point.xi_eff, point.u_eff, point.v_eff)}


def scaled_Sbar(lam: float, t: float, xi: float, u: float, v: float) -> Dict[str, float]:
    point = KernelScaling(lam, t, xi, u, v)
    value = point.prefactor * kernel_Sbar(t, point.n, point.y, point.x, lam)
    return {'value': value, 'limit': sbar_limit(point.xi_eff, point.u_eff, point.v_eff)}


def scaled_Sbar_epi(lam: float, t: float, xi: float, u: float, v: float) -> Dict[str, float]:
    point = KernelScaling(lam, t, xi, u, v)
    value = point.prefactor * kernel_Sbar_epi(t, point.n, point.y, point.x, lam)
    return {'value': value, 'limit': sbar_epi_limit(point.xi_eff, point.u_eff, point.v_eff)}
