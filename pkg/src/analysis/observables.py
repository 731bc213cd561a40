"""
Space-time observation points around the shock and the fluctuation fields read at them

A sits on the shock at time t + tau t^(2/3), shifted by s t^(1/3). B- and B+
sit at the earlier time t - t^nu on the characteristics of the two sides
through A, so h- (resp. h~+) at A and at B-/B+ differ by a deterministic
amount plus o(t^(1/3)).
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from src.analysis.geodesics import BackwardsPath, PathVariant, build_backwards_path, height_history, path_contaminated
from src.analysis.samples import ShockSample
from src.dynamics.lattice import ShockParameters
from src.errors import ConfigError, ContaminationError
from src.monitoring.logger import StructuredLogger

logger = StructuredLogger(name='observables')

SpaceTime = Tuple[int, float]


@dataclass(frozen=True)
class ObservationPoints:
    """Lattice points A, B-, B+ for one (t, tau, s, nu)"""

    params: ShockParameters
    t: float
    tau: float
    s: float
    nu: float

    def __post_init__(self):
        if not 2.0 / 3.0 < self.nu < 1.0:
            raise ConfigError(f"nu must lie in (2/3, 1), got {self.nu}")
        if self.t - self.t ** self.nu <= 0 or self.t + self.tau * self.t ** (2.0 / 3.0) <= 0:
            raise ConfigError(f"observation times must be positive at t={self.t}, tau={self.tau}")

    @property
    def late_time(self) -> float:
        return self.t + self.tau * self.t ** (2.0 / 3.0)

    @property
    def early_time(self) -> float:
        return self.t - self.t ** self.nu

    @property
    def lag(self) -> float:
        """tau t^(2/3) + t^nu, the time between B and A"""
        return self.tau * self.t ** (2.0 / 3.0) + self.t ** self.nu

    @property
    def horizon(self) -> float:
        return max(self.late_time, self.early_time)

    @property
    def A(self) -> SpaceTime:
        x = self.params.v_s * self.late_time + self.s * self.t ** (1.0 / 3.0)
        return int(round(x)), self.late_time

    def B(self, side: str) -> SpaceTime:
        density = self._density(side)
        x = self.params.v_s * self.late_time - (1.0 - 2.0 * density) * self.lag
        return int(round(x)), self.early_time

    def drift(self, side: str) -> float:
        """Deterministic part of h(A) - h(B) on one side"""
        density = self._density(side)
        chi = density * (1.0 - density)
        return (1.0 - 2.0 * chi) * self.lag + (1.0 - 2.0 * density) * self.s * self.t ** (1.0 / 3.0)

    def _density(self, side: str) -> float:
        if side == 'minus':
            return self.params.lam
        if side == 'plus':
            return self.params.rho
        raise ConfigError(f"side must be 'minus' or 'plus', got {side!r}")


MEMBER_FOR_SIDE = {'minus': 'minus', 'plus': 'plus_tilde'}


def fluctuation(sample: ShockSample, points: ObservationPoints, side: str, x_shift: int = 0) -> float:
    """
    Z-(B-) or Z+(B+): the height at B recentred by its deterministic value and divided by -t^(1/3)

    Args:
        x_shift: Read the height this many sites right of B (for nearby-point controls)
    """
    x, time = points.B(side)
    history = height_history(sample.system, MEMBER_FOR_SIDE[side])
    h = history.height(x + x_shift, time)
    centred = h - sample.params.mu_s * points.late_time + points.drift(side)
    return centred / (-points.t ** (1.0 / 3.0))


def height_increment(sample: ShockSample, points: ObservationPoints, side: str) -> float:
    """h(A) - h(B) minus its deterministic drift, on one side"""
    history = height_history(sample.system, MEMBER_FOR_SIDE[side])
    xa, ta = points.A
    xb, tb = points.B(side)
    return history.height(xa, ta) - history.height(xb, tb) - points.drift(side)


def side_path(sample: ShockSample, points: ObservationPoints, side: str) -> BackwardsPath:
    """Rightmost h- path from B- or leftmost h~+ path from B+"""
    x, time = points.B(side)
    variant = PathVariant.RIGHTMOST if side == 'minus' else PathVariant.LEFTMOST
    return build_backwards_path(sample.system, MEMBER_FOR_SIDE[side], x, time, variant)


def path_confined(path: BackwardsPath, v_s: float, side: str) -> bool:
    """
    x(l) < v_s l for all l on the path ('minus'), or x(l) > v_s l ('plus')

    The path is constant between breakpoints, so the line is only compared
    at segment ends.
    """
    upper = np.concatenate([[path.t], path.move_times])
    lower = np.concatenate([path.move_times, [0.0]])
    ends = v_s * np.stack([upper, lower])
    if side == 'minus':
        return bool(np.all(path.positions < ends.min(axis=0)))
    return bool(np.all(path.positions > ends.max(axis=0)))


def audit_points(sample: ShockSample, points: ObservationPoints, include_late: bool = False) -> None:
    """
    Raise ContaminationError if a path from B-, B+ (and optionally A) reaches the guard band
    """
    targets = [(MEMBER_FOR_SIDE[side], *points.B(side)) for side in ('minus', 'plus')]
    if include_late:
        targets += [(member, *points.A) for member in ('minus', 'plus_tilde')]
    for member, x, time in targets:
        for variant in PathVariant:
            if path_contaminated(build_backwards_path(sample.system, member, x, time, variant), sample.plan):
                reason = f'{variant.value} path of {member} from ({x}, {time:.3f}) entered the guard band'
                logger.sample_contaminated(sample.seed, reason)
                raise ContaminationError(reason, seed=sample.seed)

