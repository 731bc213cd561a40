"""
Basic-coupling replay of TASEP configurations over a shared event stream

Every member of a CoupledSystem sees the same Poisson events: at an event
of site s a particle at s jumps to s+1 iff s+1 is empty in that member.
The replay records one "executed" bit per (event, member), which is all the
backwards-path reconstruction needs.
"""

from dataclasses import dataclass, field
from math import ceil, floor
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.dynamics.clockwork import EventStream
from src.dynamics.lattice import Configuration, HeightFunction, SiteClass, height_of
from src.dynamics.replay import apply_coupled, apply_multiclass
from src.errors import (
    HorizonExceededError,
    InvariantBreachError,
    PreconditionError,
    RangeTooSmallError,
    WindowError,
)

MemberKey = Union[int, str]

DEFAULT_KAPPA = 3.0
DEFAULT_MARGIN = 50
DEFAULT_GUARD_FRACTION = 0.5
_STEP_BATCH = 256


@dataclass(frozen=True)
class WindowPlan:
    """Finite window standing in for Z, with a guard band at both edges"""

    x_min: int
    x_max: int
    guard_width: int

    @property
    def window(self) -> Tuple[int, int]:
        return self.x_min, self.x_max

    def in_guard_band(self, site: int) -> bool:
        return site < self.x_min + self.guard_width or site > self.x_max - self.guard_width


def plan_window(
    t: float,
    center: float = 0.0,
    kappa: float = DEFAULT_KAPPA,
    margin: int = DEFAULT_MARGIN,
    guard_fraction: float = DEFAULT_GUARD_FRACTION
) -> WindowPlan:
    """
    Window [center - kappa t - margin, center + kappa t + margin], widened to contain -1..1

    Args:
        t: Final observation time
        center: Macroscopic observation point, e.g. v_s t
        kappa: Light-cone speed bound
        margin: Extra sites on each side
        guard_fraction: Guard band width as a fraction of t
    """
    if t < 0:
        raise WindowError(f"time must be non-negative, got {t}")
    x_min = min(floor(center - kappa * t - margin), -1)
    x_max = max(ceil(center + kappa * t + margin), 1)
    return WindowPlan(x_min, x_max, int(ceil(guard_fraction * t)))


class CoupledSystem:
    """Several configurations advanced in lockstep on one EventStream"""

    def __init__(
        self,
        stream: EventStream,
        members: Sequence[Configuration],
        anchors: Optional[Sequence[int]] = None,
        labels: Optional[Sequence[str]] = None,
        start_time: float = 0.0,
        track_pair: Optional[Tuple[MemberKey, MemberKey]] = None,
        record_log: bool = True
    ):
        """
        Initialize coupled system

        Args:
            stream: Shared Poisson clocks
            members: Configurations on the stream's window at `start_time`
            anchors: Heights h(0, start_time) per member (default 0)
            labels: Optional member names for lookup
            start_time: Time of the given configurations
            track_pair: Two members differing at a single site; their
                discrepancy is followed after every event
            record_log: Keep the per-event executed bits
        """
        if not members:
            raise PreconditionError("a coupled system needs at least one member")
        for config in members:
            if config.window != stream.window:
                raise WindowError(f"member window {config.window} differs from stream window {stream.window}")
        # heights live on the interfaces x_min .. x_max + 1, one more than the sites
        height_domain = (stream.x_min, stream.x_max + 1)
        if not height_domain[0] <= 0 <= height_domain[1]:
            raise WindowError(f"site 0 outside height domain [{height_domain[0]}, {height_domain[1]}] "
                              "cannot carry the height anchor")
        if not 0.0 <= start_time <= stream.horizon:
            raise HorizonExceededError(f"start time {start_time} outside [0, {stream.horizon}]")

        self.stream = stream
        self.labels: Tuple[str, ...] = tuple(labels) if labels else tuple(str(i) for i in range(len(members)))
        if len(self.labels) != len(members):
            raise PreconditionError("one label per member")
        self._occ = np.stack([c.occupation for c in members]).astype(np.uint8)
        self.initial_occupation = self._occ.copy()
        self.initial_occupation.setflags(write=False)
        self._anchors = np.array(anchors if anchors is not None else [0] * len(members), dtype=np.int64)
        self.initial_anchors = tuple(int(a) for a in self._anchors)
        self.start_time = float(start_time)
        self.current_time = float(start_time)

        merged = stream.merged
        self._event_index = (merged.sites - stream.x_min).astype(np.int64)
        self._cursor = int(np.searchsorted(merged.times, start_time, side='right'))
        self._first_event = self._cursor
        n_log = stream.n_events if record_log else 0
        self.executed = np.zeros((n_log, len(members)), dtype=np.bool_)

        self.pair: Optional[Tuple[int, int]] = None
        self._disc_pos = -1
        self._disc_events: List[np.ndarray] = []
        self._disc_positions: List[np.ndarray] = []
        if track_pair is not None:
            a, b = (self.member_index(k) for k in track_pair)
            diff = np.flatnonzero(self._occ[a] != self._occ[b])
            if len(diff) != 1:
                raise PreconditionError(f"tracked pair must differ at exactly one site, found {len(diff)}")
            self.pair = (a, b)
            self._disc_pos = int(diff[0])
            self.initial_discrepancy = int(diff[0]) + stream.x_min

    @property
    def n_members(self) -> int:
        return self._occ.shape[0]

    @property
    def record_log(self) -> bool:
        return self.executed.shape[0] > 0

    @property
    def applied_events(self) -> Tuple[int, int]:
        """Merged index range of the events applied so far"""
        return self._first_event, self._cursor

    def member_index(self, key: MemberKey) -> int:
        if isinstance(key, str):
            try:
                return self.labels.index(key)
            except ValueError:
                raise KeyError(f"no member labelled {key!r}") from None
        if not 0 <= key < self.n_members:
            raise KeyError(f"member index {key} out of range")
        return int(key)

    def evolve(self, until: float) -> 'CoupledSystem':
        """Apply every event in (current_time, until] to all members"""
        if until < self.current_time:
            raise HorizonExceededError(f"cannot evolve backwards from {self.current_time} to {until}")
        if until > self.stream.horizon:
            raise HorizonExceededError(f"time {until} beyond stream horizon {self.stream.horizon}")

        stop = int(np.searchsorted(self.stream.merged.times, until, side='right'))
        pair_a, pair_b = self.pair if self.pair is not None else (-1, -1)
        origin = -self.stream.x_min
        breach, self._disc_pos, events, positions = apply_coupled(
            self._occ, self._anchors, self._event_index, self._cursor, stop,
            origin, self.executed, pair_a, pair_b, self._disc_pos
        )
        if len(events):
            self._disc_events.append(events.copy())
            self._disc_positions.append(positions + self.stream.x_min)
        if breach >= 0:
            raise InvariantBreachError(
                f"discrepancy count left 1 at event {breach} "
                f"(t={self.stream.merged.times[breach]:.6f}, seed={self.stream.seed})"
            )
        self._cursor = stop
        self.current_time = float(until)
        return self

    def configuration(self, key: MemberKey) -> Configuration:
        m = self.member_index(key)
        return Configuration(self.stream.x_min, self.stream.x_max, self._occ[m].copy())

    def anchor(self, key: MemberKey) -> int:
        return int(self._anchors[self.member_index(key)])

    def height(self, key: MemberKey) -> HeightFunction:
        m = self.member_index(key)
        return height_of(self.configuration(m), int(self._anchors[m]))

    def height_at(self, key: MemberKey, x: int) -> int:
        return self.height(key).at(x)

    def initial_configuration(self, key: MemberKey) -> Configuration:
        m = self.member_index(key)
        return Configuration(self.stream.x_min, self.stream.x_max, self.initial_occupation[m].copy())

    def initial_height(self, key: MemberKey) -> HeightFunction:
        m = self.member_index(key)
        return height_of(self.initial_configuration(m), self.initial_anchors[m])

    def dominates(self, lower: MemberKey, upper: MemberKey) -> bool:
        """Coordinatewise occupation order between two members now"""
        a, b = self.member_index(lower), self.member_index(upper)
        return bool(np.all(self._occ[a] <= self._occ[b]))

    def discrepancy_position(self) -> int:
        if self.pair is None:
            raise PreconditionError("no tracked pair in this system")
        return self._disc_pos + self.stream.x_min

    def discrepancy_changes(self) -> Tuple[np.ndarray, np.ndarray]:
        """Merged event indices where the tracked discrepancy moved, and its new sites"""
        if not self._disc_events:
            return np.empty(0, dtype=np.int64), np.empty(0, dtype=np.int64)
        return np.concatenate(self._disc_events), np.concatenate(self._disc_positions)

    def member_executed(self, key: MemberKey) -> np.ndarray:
        """Executed bits of one member over all merged events"""
        if not self.record_log:
            raise PreconditionError("event log was not recorded")
        return self.executed[:, self.member_index(key)]

    def snapshot(self, key: MemberKey) -> str:
        """RLE configuration line followed by `t=<time> anchor=<h(0,t)>`"""
        config = self.configuration(key)
        return f"{config.to_text()}\nt={self.current_time!r} anchor={self.anchor(key)}"


def evolve(system: CoupledSystem, until: float) -> CoupledSystem:
    return system.evolve(until)


def parse_snapshot(text: str) -> Tuple[Configuration, float, int]:
    """Inverse of CoupledSystem.snapshot"""
    config_line, state_line = text.strip().splitlines()
    fields = dict(part.split('=', 1) for part in state_line.split())
    return Configuration.from_text(config_line), float(fields['t']), int(fields['anchor'])


@dataclass
class MulticlassState:
    """Hole/first/second configuration with one tagged second-class particle"""

    configuration: Configuration
    tagged: int
    current_time: float = 0.0
    cursor: int = 0
    change_events: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    change_positions: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        if not self.configuration.is_multiclass:
            raise PreconditionError("multiclass state needs class labels")
        if self.configuration.label(self.tagged) != SiteClass.SECOND:
            raise PreconditionError(f"tagged site {self.tagged} does not hold a second-class particle")

    @classmethod
    def from_split(cls, minus: Configuration, plus_tilde: Configuration) -> 'MulticlassState':
        """First class where eta- = 1, second class where eta~+ - eta- = 1, tagged at 0"""
        if not minus.dominated_by(plus_tilde):
            raise PreconditionError("eta- must be dominated by eta~+")
        classes = (minus.occupation.astype(np.int8) * SiteClass.FIRST
                   + (plus_tilde.occupation - minus.occupation).astype(np.int8) * SiteClass.SECOND)
        config = Configuration(minus.x_min, minus.x_max, plus_tilde.occupation, classes)
        return cls(config, tagged=0)

    def class_counts(self) -> Dict[str, int]:
        labels = self.configuration.classes
        return {
            'first': int(np.sum(labels == SiteClass.FIRST)),
            'second': int(np.sum(labels == SiteClass.SECOND)),
        }

    def first_class_projection(self) -> Configuration:
        occ = (self.configuration.classes == SiteClass.FIRST).astype(np.uint8)
        return Configuration(self.configuration.x_min, self.configuration.x_max, occ)

    def occupation_projection(self) -> Configuration:
        return Configuration(self.configuration.x_min, self.configuration.x_max,
                             self.configuration.occupation.copy())


def evolve_multiclass(state: MulticlassState, stream: EventStream, until: float) -> MulticlassState:
    """
    Apply the multiclass rules for every event in (state.current_time, until]

    first+hole and second+hole jump, first+second swap; the tagged
    second-class particle is followed through swaps.
    """
    config = state.configuration
    if config.window != stream.window:
        raise WindowError(f"state window {config.window} differs from stream window {stream.window}")
    if until < state.current_time:
        raise HorizonExceededError(f"cannot evolve backwards from {state.current_time} to {until}")
    if until > stream.horizon:
        raise HorizonExceededError(f"time {until} beyond stream horizon {stream.horizon}")

    merged = stream.merged
    start = max(state.cursor, int(np.searchsorted(merged.times, state.current_time, side='right')))
    stop = int(np.searchsorted(merged.times, until, side='right'))
    classes = config.classes.copy()
    event_index = (merged.sites - stream.x_min).astype(np.int64)
    tagged, events, positions = apply_multiclass(classes, event_index, start, stop, state.tagged - stream.x_min)

    occ = (classes != SiteClass.HOLE).astype(np.uint8)
    return MulticlassState(
        configuration=Configuration(config.x_min, config.x_max, occ, classes),
        tagged=int(tagged) + stream.x_min,
        current_time=float(until),
        cursor=stop,
        change_events=np.concatenate([state.change_events, events]),
        change_positions=np.concatenate([state.change_positions, positions + stream.x_min]),
    )


def naive_replay(config: Configuration, stream: EventStream, until: float) -> Configuration:
    """Reference replay: one pass over the merged events with plain Python lists"""
    if config.window != stream.window:
        raise WindowError("configuration and stream windows differ")
    occupied = [int(v) for v in config.occupation]
    x_min, x_max = stream.window
    for time, site in stream.merged:
        if time > until:
            break
        if site + 1 > x_max:
            continue
        i = site - x_min
        if occupied[i] == 1 and occupied[i + 1] == 0:
            occupied[i], occupied[i + 1] = 0, 1
    return Configuration(x_min, x_max, np.array(occupied, dtype=np.uint8))


def step_configuration(y: int, window: Tuple[int, int]) -> Configuration:
    """Step data with apex at y: occupied exactly on sites < y"""
    x_min, x_max = window
    return Configuration(x_min, x_max, (np.arange(x_min, x_max + 1) < y).astype(np.uint8))


def step_heights(stream: EventStream, apexes: Sequence[int], tau: float, x: int, t: float) -> np.ndarray:
    """
    h^step_{y,tau}(x, t) for every apex y, all driven by the same stream

    Each member starts at time tau from h(z, tau) = |z - y|.
    """
    if not 0.0 <= tau <= t:
        raise HorizonExceededError(f"need 0 <= tau <= t, got tau={tau}, t={t}")
    values = np.empty(len(apexes), dtype=np.int64)
    for lo in range(0, len(apexes), _STEP_BATCH):
        batch = [int(y) for y in apexes[lo:lo + _STEP_BATCH]]
        system = CoupledSystem(
            stream,
            [step_configuration(y, stream.window) for y in batch],
            anchors=[abs(y) for y in batch],
            start_time=tau,
            record_log=False,
        )
        system.evolve(t)
        for k in range(len(batch)):
            values[lo + k] = system.height_at(k, x)
    return values


def min_superposition(
    h_at_tau: HeightFunction,
    stream: EventStream,
    tau: float,
    t: float,
    x: int,
    y_range: Tuple[int, int]
) -> int:
    """
    min over y in y_range of h(y, tau) + h^step_{y,tau}(x, t)

    Raises:
        RangeTooSmallError: the minimum is attained at an end of y_range
            that is not an end of the height domain
    """
    y_lo, y_hi = int(y_range[0]), int(y_range[1])
    if y_hi < y_lo or y_lo < h_at_tau.x_min or y_hi > h_at_tau.x_max:
        raise WindowError(f"y_range {y_range} outside height domain [{h_at_tau.x_min}, {h_at_tau.x_max}]")
    apexes = list(range(y_lo, y_hi + 1))
    totals = np.array([h_at_tau.at(y) for y in apexes], dtype=np.int64) + step_heights(stream, apexes, tau, x, t)
    best = int(totals.min())
    minimizers = np.flatnonzero(totals == best) + y_lo
    if (minimizers[0] == y_lo and y_lo > h_at_tau.x_min) or (minimizers[-1] == y_hi and y_hi < h_at_tau.x_max):
        raise RangeTooSmallError(f"minimizer on the boundary of y_range {y_range}", argmin=int(minimizers[0]))
    return best


def superposition_argmin(
    h_at_tau: HeightFunction,
    stream: EventStream,
    tau: float,
    t: float,
    x: int
) -> np.ndarray:
    """All minimizing apexes y over the full height domain"""
    apexes = list(range(h_at_tau.x_min, h_at_tau.x_max + 1))
    totals = h_at_tau.values + step_heights(stream, apexes, tau, x, t)
    return np.flatnonzero(totals == totals.min()) + h_at_tau.x_min
