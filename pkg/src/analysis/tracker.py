"""
Second-class particle tracking and pathwise checks of the coupling identities

All checks read one replayed ShockSample, so every member has seen the
same clock rings. The identities are exact: a single failure on a clean
sample is a bug, never noise.
"""

from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.geodesics import PathVariant, build_backwards_path, height_history, path_contaminated
from src.analysis.samples import ShockSample, build_shock_sample
from src.dynamics.clockwork import EventStream
from src.dynamics.engine import CoupledSystem, MulticlassState, evolve_multiclass
from src.dynamics.lattice import HeightFunction, InitialCondition
from src.errors import ContaminationError, PreconditionError
from src.monitoring.logger import StructuredLogger

logger = StructuredLogger(name='tracker')


@dataclass
class DiscrepancyTrace:
    """Positions of the second-class particle at the listed times"""

    times: np.ndarray
    positions: np.ndarray
    source: str

    def at(self, t: float) -> int:
        k = int(np.searchsorted(self.times, t, side='right')) - 1
        if k < 0:
            raise PreconditionError(f"trace starts at {self.times[0]}, asked for {t}")
        return int(self.positions[k])

    def sample(self, times: Sequence[float]) -> 'DiscrepancyTrace':
        times = np.asarray(times, dtype=float)
        return DiscrepancyTrace(times, np.array([self.at(t) for t in times], dtype=np.int64), self.source)

    def up_to(self, t: float) -> 'DiscrepancyTrace':
        keep = self.times <= t
        return DiscrepancyTrace(self.times[keep], self.positions[keep], self.source)

    def is_nearest_neighbour(self) -> bool:
        return bool(np.all(np.abs(np.diff(self.positions)) == 1))

    def same_path(self, other: 'DiscrepancyTrace') -> bool:
        return np.array_equal(self.times, other.times) and np.array_equal(self.positions, other.positions)


def jump_trace(system: CoupledSystem) -> DiscrepancyTrace:
    """Every move of the tracked discrepancy, starting from its time-0 site"""
    events, positions = system.discrepancy_changes()
    times = system.stream.merged.times[events]
    return DiscrepancyTrace(
        times=np.concatenate([[system.start_time], times]),
        positions=np.concatenate([[system.initial_discrepancy], positions]).astype(np.int64),
        source='coupling',
    )


def multiclass_trace(state: MulticlassState, stream: EventStream, start: int = 0) -> DiscrepancyTrace:
    """Every move of the tagged second-class particle of an evolved multiclass state"""
    return DiscrepancyTrace(
        times=np.concatenate([[0.0], stream.merged.times[state.change_events]]),
        positions=np.concatenate([[start], state.change_positions]).astype(np.int64),
        source='multiclass',
    )


def track_second_class(pair: CoupledSystem, times: Sequence[float]) -> DiscrepancyTrace:
    """
    X2nd(t) at each requested time

    Args:
        pair: System with a tracked single-discrepancy pair
        times: Requested times; the system is evolved up to the largest one
    """
    if pair.pair is None:
        raise PreconditionError("system has no tracked discrepancy pair")
    times = sorted(float(t) for t in times)
    if times and times[-1] > pair.current_time:
        pair.evolve(times[-1])
    return jump_trace(pair).sample(times)


def verify_shift_relation(h: HeightFunction, h_tilde: HeightFunction, x2nd_position: int, tol: int = 0) -> bool:
    """h~ = h on x <= X2nd and h~ = h - 2 on x > X2nd"""
    if h.x_min != h_tilde.x_min or len(h.values) != len(h_tilde.values):
        raise PreconditionError("height functions must share a domain")
    sites = h.sites()
    expected = np.where(sites <= x2nd_position, h.values, h.values - 2)
    return bool(np.all(np.abs(h_tilde.values - expected) <= tol))


def _contamination_reason(sample: ShockSample, observations: Iterable[Tuple[str, int, float]]) -> Optional[str]:
    system = sample.system
    trace = jump_trace(system)
    if any(sample.plan.in_guard_band(int(x)) for x in trace.positions):
        return 'second-class particle entered the guard band'
    for member, x, t in observations:
        for variant in PathVariant:
            if path_contaminated(build_backwards_path(system, member, x, t, variant), sample.plan):
                return f'{variant.value} path of {member} from ({x}, {t}) entered the guard band'
    return None


def audit_sample(sample: ShockSample, observations: Iterable[Tuple[str, int, float]]) -> None:
    """
    Raise ContaminationError if any observation depends on the guard band

    Args:
        sample: Evolved shock sample
        observations: (member, x, t) points whose values are read
    """
    reason = _contamination_reason(sample, observations)
    if reason is not None:
        logger.sample_contaminated(sample.seed, reason)
        raise ContaminationError(reason, seed=sample.seed)


def verify_distribution_identity(
    sample: ShockSample,
    pairs: Sequence[Tuple[int, float]],
    audit: bool = True
) -> bool:
    """
    [X2nd(t) >= x] iff [h-(x, t) <= h~+(x, t)] at every (x, t)

    Raises:
        ContaminationError: the sample's observations reach the guard band
    """
    times = [t for _, t in pairs]
    if any(b < a for a, b in zip(times, times[1:])):
        raise PreconditionError("observation times must be non-decreasing")
    if times and times[-1] > sample.time:
        sample.evolve(times[-1])
    if audit:
        audit_sample(sample, [(m, x, t) for x, t in pairs for m in ('minus', 'plus_tilde')])

    trace = jump_trace(sample.system)
    minus = height_history(sample.system, 'minus')
    plus = height_history(sample.system, 'plus_tilde')
    for x, t in pairs:
        particle_right = trace.at(t) >= x
        heights_ordered = minus.height(x, t) <= plus.height(x, t)
        if particle_right != heights_ordered:
            logger.check_failed('distribution_identity', sample.seed, x=x, t=t)
            return False
    return True


def verify_identity_monotone(sample: ShockSample, t: float) -> bool:
    """Whenever h-(x, t) = h~+(x, t), h-(y, t) <= h~+(y, t) for every y <= x"""
    gap = height_history(sample.system, 'minus').profile(t) - height_history(sample.system, 'plus_tilde').profile(t)
    ties = np.flatnonzero(gap == 0)
    if len(ties) == 0:
        return True
    return bool(np.all(gap[:ties[-1] + 1] <= 0))


def verify_y_equals_x(sample: ShockSample, horizon: float, stream: Optional[EventStream] = None) -> bool:
    """
    The tagged second-class particle of the multiclass system equals X2nd at every event time

    Args:
        sample: Shock sample
        horizon: Final time
        stream: Clocks for the multiclass run (default: the sample's own);
            passing another stream gives a negative control
    """
    if horizon > sample.time:
        sample.evolve(horizon)
    stream = stream if stream is not None else sample.stream
    state = evolve_multiclass(sample.multiclass, stream, horizon)
    coupling = jump_trace(sample.system).up_to(horizon)
    tagged = multiclass_trace(state, stream, sample.multiclass.tagged)
    if any(sample.plan.in_guard_band(int(x)) for x in np.concatenate([coupling.positions, tagged.positions])):
        logger.sample_contaminated(sample.seed, 'second-class particle entered the guard band')
        raise ContaminationError('second-class particle entered the guard band', seed=sample.seed)
    same = coupling.same_path(tagged)
    if not same and stream is sample.stream:
        logger.check_failed('y_equals_x', sample.seed, horizon=horizon)
    return same


def verify_multiclass_projection(sample: ShockSample, horizon: float) -> bool:
    """First-class particles follow eta- and all particles follow eta~+"""
    if horizon > sample.time:
        sample.evolve(horizon)
    state = evolve_multiclass(sample.multiclass, sample.stream, horizon)
    system = sample.system
    return (state.first_class_projection().same_as(system.configuration('minus'))
            and state.occupation_projection().same_as(system.configuration('plus_tilde')))


def verify_height_matching(sample: ShockSample, times: Sequence[float]) -> bool:
    """h-(Y, t) = h~+(Y, t) and h-(Y+1, t) = h~+(Y+1, t) + 2 at every sampled time"""
    times = sorted(float(t) for t in times)
    horizon = times[-1]
    if horizon > sample.time:
        sample.evolve(horizon)
    state = evolve_multiclass(sample.multiclass, sample.stream, horizon)
    tagged = multiclass_trace(state, sample.stream, sample.multiclass.tagged)
    if any(sample.plan.in_guard_band(int(x)) for x in tagged.positions):
        raise ContaminationError('second-class particle entered the guard band', seed=sample.seed)

    minus = height_history(sample.system, 'minus')
    plus = height_history(sample.system, 'plus_tilde')
    for t in times:
        y = tagged.at(t)
        if minus.height(y, t) != plus.height(y, t) or minus.height(y + 1, t) != plus.height(y + 1, t) + 2:
            logger.check_failed('height_matching', sample.seed, t=t, y=y)
            return False
    return True


def verify_min_property(sample: ShockSample, x: int, t: float, audit: bool = True) -> bool:
    """h = min(h-, h+) and h~ = min(h-, h~+) at (x, t)"""
    if t > sample.time:
        sample.evolve(t)
    if audit:
        audit_sample(sample, [('eta', x, t), ('eta_tilde', x, t)])
    heights = {m: height_history(sample.system, m).height(x, t)
               for m in ('eta', 'eta_tilde', 'minus', 'plus', 'plus_tilde')}
    holds = (heights['eta'] == min(heights['minus'], heights['plus'])
             and heights['eta_tilde'] == min(heights['minus'], heights['plus_tilde']))
    if not holds:
        logger.check_failed('min_property', sample.seed, x=x, t=t, **heights)
    return holds


def verify_shift_along_trace(sample: ShockSample, times: Sequence[float]) -> bool:
    """Shift relation between h and h~ at each sampled time"""
    trace = jump_trace(sample.system)
    h_history = height_history(sample.system, 'eta')
    tilde_history = height_history(sample.system, 'eta_tilde')
    x_min = h_history.x_min
    for t in times:
        h = HeightFunction(x_min, h_history.profile(t))
        h_tilde = HeightFunction(x_min, tilde_history.profile(t))
        if not verify_shift_relation(h, h_tilde, trace.at(t)):
            logger.check_failed('shift_relation', sample.seed, t=t)
            return False
    return True


@dataclass
class Verdict:
    """Outcome of every pathwise check on one seed"""

    seed: int
    checks: Dict[str, bool] = field(default_factory=dict)
    contaminated: bool = False

    @property
    def passed(self) -> bool:
        return self.contaminated or all(self.checks.values())

    def to_record(self) -> Dict:
        return {'seed': self.seed, 'checks': dict(self.checks), 'contaminated': self.contaminated}


def verdict_for_seed(
    seed: int,
    ic: InitialCondition,
    xs: Sequence[int],
    ts: Sequence[float],
    record_paths: bool = True
) -> Verdict:
    """
    Run every coupling identity on one seed over the (x, t) grid

    Returns:
        Verdict with one boolean per check; contaminated samples carry no checks
    """
    ts = sorted(float(t) for t in ts)
    horizon = ts[-1]
    sample = build_shock_sample(seed, ic, horizon, record_log=record_paths).evolve(horizon)
    pairs = [(x, t) for t in ts for x in xs]
    verdict = Verdict(seed=seed)
    observed = ('eta', 'eta_tilde', 'minus', 'plus_tilde')
    try:
        audit_sample(sample, [(m, x, t) for x, t in pairs for m in observed])
        verdict.checks['distribution_identity'] = verify_distribution_identity(sample, pairs, audit=False)
        verdict.checks['identity_monotone'] = all(verify_identity_monotone(sample, t) for t in ts)
        verdict.checks['shift_relation'] = verify_shift_along_trace(sample, ts)
        verdict.checks['y_equals_x'] = verify_y_equals_x(sample, horizon)
        verdict.checks['multiclass_projection'] = verify_multiclass_projection(sample, horizon)
        verdict.checks['height_matching'] = verify_height_matching(sample, ts)
        verdict.checks['min_property'] = all(verify_min_property(sample, x, t, audit=False) for x, t in pairs)
        verdict.checks['nearest_neighbour_trace'] = jump_trace(sample.system).is_nearest_neighbour()
    except ContaminationError:
        verdict.checks = {}
        verdict.contaminated = True
    return verdict


def second_class_velocity(samples: List[ShockSample], t: float) -> np.ndarray:
    """X2nd(t) / t for each sample"""
    return np.array([track_second_class(s.system, [t]).positions[0] / t for s in samples])
