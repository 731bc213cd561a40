"""
Backwards paths reconstructed from the executed-event log

From (x, t) the path looks at the last clock ring at x - 1. If that ring
moved a particle into x (a local minimum of the height became a maximum)
the path stays; otherwise it steps to a neighbour whose height is one
lower. Repeating until no ring is left gives a piecewise constant path
down to time 0, which is a backwards geodesic of the height function.
"""

import weakref
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.samples import ShockSample, build_shock_sample, build_step_sample, map_seeds
from src.dynamics.engine import CoupledSystem, MemberKey, WindowPlan, step_heights
from src.dynamics.lattice import InitialCondition, ShockParameters
from src.errors import ContaminationError, PreconditionError, WindowError
from src.infrastructure.statistics import proportion_estimate
from src.monitoring.logger import StructuredLogger

logger = StructuredLogger(name='geodesics')


class PathVariant(str, Enum):
    """Neighbour choice when the path sits on a local maximum"""
    RIGHTMOST = 'rightmost'
    LEFTMOST = 'leftmost'


class HeightHistory:
    """h(x, s) of one member for any s in the replayed time span, from executed bits"""

    def __init__(self, system: CoupledSystem, member: MemberKey):
        m = system.member_index(member)
        first, last = system.applied_events
        merged = system.stream.merged
        idx = np.flatnonzero(system.member_executed(m)[first:last]) + first
        times = merged.times[idx]
        targets = merged.sites[idx] + 1

        self.x_min = system.stream.x_min
        self.start_time = system.start_time
        self.end_time = system.current_time
        self._h0 = system.initial_height(m).values
        order = np.lexsort((times, targets))
        self._times = times[order]
        self._targets = targets[order]
        counts = np.bincount(self._targets - self.x_min, minlength=len(self._h0))
        self._offsets = np.concatenate([[0], np.cumsum(counts)])

    @property
    def x_max(self) -> int:
        return self.x_min + len(self._h0) - 1

    def _check(self, x: int, s: float) -> int:
        if not self.x_min <= x <= self.x_max:
            raise WindowError(f"height site {x} outside [{self.x_min}, {self.x_max}]")
        if not self.start_time <= s <= self.end_time:
            raise PreconditionError(f"time {s} outside replayed span [{self.start_time}, {self.end_time}]")
        return x - self.x_min

    def height(self, x: int, s: float) -> int:
        i = self._check(x, s)
        lo, hi = self._offsets[i], self._offsets[i + 1]
        rises = int(np.searchsorted(self._times[lo:hi], s, side='right'))
        return int(self._h0[i]) + 2 * rises

    def profile(self, s: float) -> np.ndarray:
        """Heights on every site at time s"""
        self._check(self.x_min, s)
        done = self._times <= s
        rises = np.bincount(self._targets[done] - self.x_min, minlength=len(self._h0))
        return self._h0 + 2 * rises

    def occupation(self, y: int, s: float) -> int:
        return (1 - (self.height(y + 1, s) - self.height(y, s))) // 2


_histories: 'weakref.WeakKeyDictionary[CoupledSystem, Dict[Tuple[int, int], HeightHistory]]' = \
    weakref.WeakKeyDictionary()


def height_history(system: CoupledSystem, member: MemberKey) -> HeightHistory:
    """Cached HeightHistory for the system's current replay state"""
    key = (system.member_index(member), system.applied_events[1])
    cache = _histories.setdefault(system, {})
    if key not in cache:
        cache[key] = HeightHistory(system, member)
    return cache[key]


@dataclass(frozen=True, eq=False)
class BackwardsPath:
    """
    Piecewise constant path from (x, t) down to time 0

    positions[0] holds on (move_times[0], t], positions[j] on
    (move_times[j], move_times[j-1]] and the last entry down to 0.
    """

    x: int
    t: float
    variant: PathVariant
    member: int
    move_times: np.ndarray
    positions: np.ndarray

    @property
    def anchor(self) -> Tuple[int, float]:
        return self.x, self.t

    @property
    def endpoint(self) -> int:
        return int(self.positions[-1])

    @property
    def breakpoints(self) -> List[Tuple[float, int]]:
        """[(t, x0), (s1, x1), ..., (0, xk)]"""
        points = [(self.t, int(self.positions[0]))]
        points.extend((float(s), int(p)) for s, p in zip(self.move_times, self.positions[1:]))
        points.append((0.0, self.endpoint))
        return points

    def position_at(self, tau: float) -> int:
        if not 0.0 <= tau <= self.t:
            raise PreconditionError(f"tau={tau} outside [0, {self.t}]")
        k = int(np.searchsorted(-self.move_times, -tau, side='right'))
        return int(self.positions[k])

    def positions_at(self, taus: Sequence[float]) -> np.ndarray:
        k = np.searchsorted(-self.move_times, -np.asarray(taus, dtype=float), side='right')
        return self.positions[k]

    def restrict(self, t_new: float) -> 'BackwardsPath':
        """The same path viewed as starting from (x(t_new), t_new)"""
        if not 0.0 <= t_new <= self.t:
            raise PreconditionError(f"restriction time {t_new} outside [0, {self.t}]")
        k = int(np.searchsorted(-self.move_times, -t_new, side='right'))
        return BackwardsPath(
            x=int(self.positions[k]),
            t=float(t_new),
            variant=self.variant,
            member=self.member,
            move_times=self.move_times[k:],
            positions=self.positions[k:],
        )

    def sup_deviation(self, alpha: float) -> float:
        """sup over tau in [0, t] of |x(tau) - alpha tau|"""
        upper = np.concatenate([[self.t], self.move_times])
        lower = np.concatenate([self.move_times, [0.0]])
        return float(np.max(np.maximum(
            np.abs(self.positions - alpha * upper),
            np.abs(self.positions - alpha * lower),
        )))

    def to_rows(self) -> List[Dict[str, float]]:
        return [{'tau': tau, 'x': x} for tau, x in self.breakpoints]


def build_backwards_path(
    system: CoupledSystem,
    member: MemberKey,
    x: int,
    t: float,
    variant: PathVariant = PathVariant.RIGHTMOST
) -> BackwardsPath:
    """
    Reconstruct the backwards path of `member` from (x, t)

    Args:
        system: Replayed system with its event log, evolved at least to t
        member: Member whose height function the path follows
        x: Starting height site
        t: Starting time
        variant: Side taken at a local maximum

    Returns:
        BackwardsPath from (x, t) to time 0
    """
    if not system.record_log:
        raise PreconditionError("event log was not recorded")
    if not system.start_time <= t <= system.current_time:
        raise PreconditionError(f"log covers [{system.start_time}, {system.current_time}], path needs t={t}")
    stream = system.stream
    if not stream.x_min <= x <= stream.x_max + 1:
        raise WindowError(f"path anchor {x} outside height domain")

    variant = PathVariant(variant)
    m = system.member_index(member)
    history = height_history(system, m)
    executed = system.member_executed(m)
    rank = stream.merged_rank

    p, current, inclusive = int(x), float(t), True
    move_times: List[float] = []
    positions: List[int] = [p]
    while p - 1 >= stream.x_min:
        pos = stream.event_position_before(p - 1, current, inclusive=inclusive)
        if pos < 0:
            break
        s = float(stream.times[pos])
        if s <= system.start_time:
            break
        current, inclusive = s, False
        if executed[rank[pos]]:
            continue
        left_ok = history.occupation(p - 1, s) == 0
        right_ok = p <= stream.x_max and history.occupation(p, s) == 1
        if left_ok and right_ok:
            step = 1 if variant == PathVariant.RIGHTMOST else -1
        elif left_ok:
            step = -1
        elif right_ok:
            step = 1
        else:
            # closed right edge: the ring could not execute
            continue
        p += step
        move_times.append(s)
        positions.append(p)

    return BackwardsPath(
        x=int(x),
        t=float(t),
        variant=variant,
        member=m,
        move_times=np.array(move_times, dtype=float),
        positions=np.array(positions, dtype=np.int64),
    )


def path_contaminated(path: BackwardsPath, plan: WindowPlan) -> bool:
    return any(plan.in_guard_band(int(p)) for p in path.positions)


def verify_geodesic_property(
    path: BackwardsPath,
    system: CoupledSystem,
    sample_times: Iterable[float],
    plan: Optional[WindowPlan] = None
) -> bool:
    """
    Check h(x, t) = h(x(tau), tau) + h^step_{x(tau),tau}(x, t) at every sampled tau

    Raises:
        ContaminationError: the path entered the guard band of `plan`
    """
    if plan is not None and path_contaminated(path, plan):
        raise ContaminationError("backwards path entered the guard band", seed=system.stream.seed)
    history = height_history(system, path.member)
    target = history.height(path.x, path.t)
    for tau in sample_times:
        y = path.position_at(tau)
        value = history.height(y, tau) + int(step_heights(system.stream, [y], tau, path.x, path.t)[0])
        if value != target:
            logger.check_failed('geodesic', system.stream.seed, tau=tau, expected=target, got=value)
            return False
    return True


def _comparison_times(*paths: BackwardsPath) -> np.ndarray:
    times = np.concatenate([p.move_times for p in paths] + [[0.0, min(p.t for p in paths)]])
    return np.unique(times)


def check_path_ordering(
    system: CoupledSystem,
    member: MemberKey,
    x1: int,
    x2: int,
    t: float,
    variant: PathVariant = PathVariant.RIGHTMOST
) -> bool:
    """x2(tau) >= x1(tau) for all tau in [0, t]"""
    if x1 >= x2:
        raise PreconditionError(f"need x1 < x2, got {x1}, {x2}")
    first = build_backwards_path(system, member, x1, t, variant)
    second = build_backwards_path(system, member, x2, t, variant)
    taus = _comparison_times(first, second)
    return bool(np.all(second.positions_at(taus) >= first.positions_at(taus)))


def paths_coalesce(first: BackwardsPath, second: BackwardsPath) -> bool:
    """Once two paths meet (going backwards in time) they stay together"""
    taus = _comparison_times(first, second)[::-1]
    together = first.positions_at(taus) == second.positions_at(taus)
    if not together.any():
        return True
    return bool(np.all(together[int(np.argmax(together)):]))


def check_step_domination(
    system: CoupledSystem,
    member: MemberKey,
    step_member: MemberKey,
    x: int,
    t: float
) -> bool:
    """
    Rightmost path of `member` stays left of the rightmost path of the step member

    Requires h(x, 0) = x for x >= 0 (empty right half-line) and
    h^step(x, 0) = |x| on the same stream.
    """
    config = system.initial_configuration(member)
    if np.any(config.occupation[config.sites() >= 0]) or system.initial_anchors[system.member_index(member)] != 0:
        raise PreconditionError("member must start empty on x >= 0 with h(0, 0) = 0")
    step = system.initial_configuration(step_member)
    if not np.array_equal(step.occupation, (step.sites() < 0).astype(np.uint8)) \
            or system.initial_anchors[system.member_index(step_member)] != 0:
        raise PreconditionError("step member must start from h(x, 0) = |x|")

    path = build_backwards_path(system, member, x, t)
    step_path = build_backwards_path(system, step_member, x, t)
    taus = _comparison_times(path, step_path)
    return bool(np.all(path.positions_at(taus) <= step_path.positions_at(taus)))


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    estimate = proportion_estimate(successes, trials, confidence)
    return estimate.ci_low, estimate.ci_high


@dataclass
class LocalizationResult:
    """Empirical tail u -> P(sup |x(tau) - alpha tau| > u t^(2/3))"""

    alpha: float
    t: float
    u: np.ndarray
    tail: np.ndarray
    ci_low: np.ndarray
    ci_high: np.ndarray
    endpoints: np.ndarray
    n_used: int
    n_contaminated: int


def localization_statistics(
    alpha: float,
    t: float,
    n_samples: int,
    u_grid: Sequence[float] = (0.5, 1.0, 1.5, 2.0, 3.0),
    seed_base: int = 0,
    workers: int = 1,
    confidence: float = 0.95,
    plan: Optional[WindowPlan] = None
) -> LocalizationResult:
    """
    Localization of the rightmost backwards path for step data

    Each seed runs step data from the origin and follows the path back from
    (round(alpha t), t). `plan` fixes the window and guard band (default: the
    light cone around alpha t).
    """
    if not -1.0 < alpha < 1.0:
        raise PreconditionError(f"alpha must lie in (-1, 1), got {alpha}")

    def one(seed: int) -> Optional[Tuple[float, int]]:
        sample = build_step_sample(seed, t, alpha=alpha, plan=plan)
        sample.system.evolve(t)
        path = build_backwards_path(sample.system, 'step', int(round(alpha * t)), t)
        if path_contaminated(path, sample.plan):
            logger.sample_contaminated(seed, 'localization path in guard band')
            return None
        return path.sup_deviation(alpha) / t ** (2.0 / 3.0), path.endpoint

    results = map_seeds(one, range(seed_base, seed_base + n_samples), workers)
    kept = [r for r in results if r is not None]
    sups = np.array([r[0] for r in kept])
    u = np.asarray(u_grid, dtype=float)
    exceed = [int(np.sum(sups > level)) for level in u]
    bounds = [wilson_interval(k, len(kept), confidence) for k in exceed]
    return LocalizationResult(
        alpha=alpha,
        t=t,
        u=u,
        tail=np.array([k / len(kept) if kept else float('nan') for k in exceed]),
        ci_low=np.array([b[0] for b in bounds]),
        ci_high=np.array([b[1] for b in bounds]),
        endpoints=np.array([r[1] for r in kept], dtype=np.int64),
        n_used=len(kept),
        n_contaminated=len(results) - len(kept),
    )


@dataclass
class EndpointControlResult:
    """Fraction of samples with x-(0) <= -delta t and x+(0) >= delta t"""

    lam: float
    rho: float
    t: float
    delta: float
    fraction: float
    ci_low: float
    ci_high: float
    n_used: int
    n_contaminated: int


def endpoint_paths(sample: ShockSample, t: float) -> Tuple[BackwardsPath, BackwardsPath]:
    """Rightmost path of h- and leftmost path of h~+ from (round(v_s t), t)"""
    x = int(round(sample.params.v_s * t))
    minus = build_backwards_path(sample.system, 'minus', x, t, PathVariant.RIGHTMOST)
    plus = build_backwards_path(sample.system, 'plus_tilde', x, t, PathVariant.LEFTMOST)
    return minus, plus


def endpoint_control_statistics(
    lam: float,
    rho: float,
    t: float,
    n_samples: int,
    seed_base: int = 0,
    workers: int = 1,
    confidence: float = 0.95,
    plan: Optional[WindowPlan] = None,
    initial_data: str = 'shock'
) -> EndpointControlResult:
    """
    Endpoint control of the two backwards geodesics for shock data

    Args:
        plan: Window and guard band shared by every seed (default: the light
            cone around v_s t)
        initial_data: 'shock' for deterministic data, 'bernoulli' for
            i.i.d. sites drawn from each seed
    """
    delta = ShockParameters(lam, rho).delta
    # unknown kinds fail before any seed runs
    InitialCondition.shock_family(initial_data, lam, rho, seed_base)

    def one(seed: int) -> Optional[bool]:
        ic = InitialCondition.shock_family(initial_data, lam, rho, seed)
        sample = build_shock_sample(seed, ic, t, plan=plan).evolve(t)
        minus, plus = endpoint_paths(sample, t)
        if path_contaminated(minus, sample.plan) or path_contaminated(plus, sample.plan):
            logger.sample_contaminated(seed, 'endpoint path in guard band')
            return None
        return minus.endpoint <= -delta * t and plus.endpoint >= delta * t

    results = map_seeds(one, range(seed_base, seed_base + n_samples), workers)
    kept = [r for r in results if r is not None]
    successes = int(sum(kept))
    low, high = wilson_interval(successes, len(kept), confidence)
    return EndpointControlResult(
        lam=lam,
        rho=rho,
        t=t,
        delta=delta,
        fraction=successes / len(kept) if kept else float('nan'),
        ci_low=low,
        ci_high=high,
        n_used=len(kept),
        n_contaminated=len(results) - len(kept),
    )
