"""
Per-site rate-1 Poisson clocks shared by every coupled configuration

Each site owns an independent Philox stream keyed by (seed, site), so
growing the window never reshuffles the history of sites already present.
Events are stored CSR-style: one flat array of times plus per-site offsets.
"""

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterator, Optional, Tuple, Union

import numpy as np

from src.errors import WindowError

MAX_HORIZON = 1.0e7
STREAM_MAGIC = b'TSEV'
STREAM_VERSION = 1
_HEADER = struct.Struct('<4sHqqqd')
_SEED_MASK = (1 << 64) - 1


def _zigzag(site: int) -> int:
    """Map a signed site index onto the non-negative integers"""
    return 2 * site if site >= 0 else -2 * site - 1


def site_generator(seed: int, site: int) -> np.random.Generator:
    """Counter-based generator for one site, independent of the window"""
    sequence = np.random.SeedSequence([seed & _SEED_MASK, _zigzag(site)])
    return np.random.Generator(np.random.Philox(sequence))


def _site_event_times(seed: int, site: int, horizon: float) -> np.ndarray:
    rng = site_generator(seed, site)
    chunk = int(horizon + 6.0 * np.sqrt(horizon) + 16)
    arrivals = np.cumsum(rng.exponential(size=chunk))
    while arrivals[-1] <= horizon:
        more = np.cumsum(rng.exponential(size=chunk)) + arrivals[-1]
        arrivals = np.concatenate([arrivals, more])
    return arrivals[:np.searchsorted(arrivals, horizon, side='right')]


@dataclass(frozen=True, eq=False)
class MergedEvents:
    """Time-ordered view of a stream: parallel arrays of times, sites and CSR positions"""

    times: np.ndarray
    sites: np.ndarray
    csr_index: np.ndarray

    def __len__(self) -> int:
        return len(self.times)

    def __iter__(self) -> Iterator[Tuple[float, int]]:
        return zip(self.times.tolist(), self.sites.tolist())

    def span(self, after: float, until: float) -> Tuple[int, int]:
        """Index range of events with after < time <= until"""
        start = int(np.searchsorted(self.times, after, side='right'))
        stop = int(np.searchsorted(self.times, until, side='right'))
        return start, stop


@dataclass(frozen=True, eq=False)
class EventStream:
    """Poisson event times for every site of [x_min, x_max] on (0, horizon]"""

    seed: int
    x_min: int
    x_max: int
    horizon: float
    times: np.ndarray
    offsets: np.ndarray

    @property
    def window(self) -> Tuple[int, int]:
        return self.x_min, self.x_max

    @property
    def n_sites(self) -> int:
        return self.x_max - self.x_min + 1

    @property
    def n_events(self) -> int:
        return int(self.offsets[-1])

    def contains(self, site: int) -> bool:
        return self.x_min <= site <= self.x_max

    def _check_site(self, site: int) -> int:
        if not self.contains(site):
            raise WindowError(f"site {site} outside window [{self.x_min}, {self.x_max}]")
        return site - self.x_min

    def site_times(self, site: int) -> np.ndarray:
        """Read-only view of the event times at `site`"""
        i = self._check_site(site)
        return self.times[self.offsets[i]:self.offsets[i + 1]]

    def counts(self) -> np.ndarray:
        return np.diff(self.offsets)

    def event_position_before(self, site: int, t: float, inclusive: bool = True) -> int:
        """
        CSR position of the last event at `site` with time <= t (or < t)

        Returns:
            Index into `times`, or -1 if there is no such event
        """
        i = self._check_site(site)
        lo, hi = int(self.offsets[i]), int(self.offsets[i + 1])
        side = 'right' if inclusive else 'left'
        k = int(np.searchsorted(self.times[lo:hi], t, side=side))
        return lo + k - 1 if k > 0 else -1

    @cached_property
    def merged(self) -> MergedEvents:
        return merged_order(self)

    @cached_property
    def merged_rank(self) -> np.ndarray:
        """For each CSR position, its index in the merged order"""
        rank = np.empty(self.n_events, dtype=np.int64)
        rank[self.merged.csr_index] = np.arange(self.n_events, dtype=np.int64)
        return rank


def generate_events(seed: int, window: Tuple[int, int], horizon: float) -> EventStream:
    """
    Draw rate-1 Poisson clocks on every site of `window` up to `horizon`

    Args:
        seed: 64-bit clock seed
        window: Inclusive site interval (x_min, x_max)
        horizon: Final time T

    Returns:
        EventStream whose per-site lists depend only on (seed, site, horizon)
    """
    x_min, x_max = int(window[0]), int(window[1])
    if x_max < x_min:
        raise WindowError(f"empty window [{x_min}, {x_max}]")
    if not horizon > 0:
        raise WindowError(f"horizon must be positive, got {horizon}")
    if horizon > MAX_HORIZON:
        raise WindowError(f"horizon {horizon} above cap {MAX_HORIZON:g}")

    per_site = [_site_event_times(seed, site, horizon) for site in range(x_min, x_max + 1)]
    offsets = np.zeros(len(per_site) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(t) for t in per_site])
    times = np.concatenate(per_site) if per_site else np.empty(0)
    times.setflags(write=False)
    offsets.setflags(write=False)
    return EventStream(seed=int(seed), x_min=x_min, x_max=x_max, horizon=float(horizon),
                       times=times, offsets=offsets)


def merged_order(stream: EventStream) -> MergedEvents:
    """
    All events of the stream sorted by time, ties broken by site index

    Returns:
        MergedEvents; iterating it yields (time, site) pairs
    """
    sites = np.repeat(
        np.arange(stream.x_min, stream.x_max + 1, dtype=np.int64),
        stream.counts()
    )
    order = np.lexsort((sites, stream.times))
    return MergedEvents(
        times=stream.times[order],
        sites=sites[order],
        csr_index=order.astype(np.int64)
    )


def last_event_before(stream: EventStream, site: int, t: float) -> Optional[float]:
    """Largest event time at `site` that is <= t, or None"""
    if t < 0 or t > stream.horizon:
        raise WindowError(f"time {t} outside [0, {stream.horizon}]")
    pos = stream.event_position_before(site, t, inclusive=True)
    return float(stream.times[pos]) if pos >= 0 else None


def dump_stream(stream: EventStream, path: Union[str, Path]) -> None:
    """Write a stream in the versioned little-endian binary format"""
    with open(path, 'wb') as f:
        f.write(_HEADER.pack(STREAM_MAGIC, STREAM_VERSION, stream.seed,
                             stream.x_min, stream.x_max, stream.horizon))
        f.write(stream.counts().astype('<i8').tobytes())
        f.write(stream.times.astype('<f8').tobytes())


def load_stream(path: Union[str, Path]) -> EventStream:
    """Read a stream written by dump_stream"""
    data = Path(path).read_bytes()
    magic, version, seed, x_min, x_max, horizon = _HEADER.unpack_from(data, 0)
    if magic != STREAM_MAGIC or version != STREAM_VERSION:
        raise WindowError(f"unrecognized stream file {path} (magic={magic!r}, version={version})")
    n_sites = x_max - x_min + 1
    cursor = _HEADER.size
    counts = np.frombuffer(data, dtype='<i8', count=n_sites, offset=cursor)
    cursor += 8 * n_sites
    times = np.frombuffer(data, dtype='<f8', count=int(counts.sum()), offset=cursor).astype(np.float64)
    offsets = np.zeros(n_sites + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts)
    times.setflags(write=False)
    offsets.setflags(write=False)
    return EventStream(seed=seed, x_min=x_min, x_max=x_max, horizon=horizon,
                       times=times, offsets=offsets)
