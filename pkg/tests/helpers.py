"""
Hand-built event streams for deterministic replay tests
"""

from typing import Dict, Iterable, Tuple

import numpy as np

from src.dynamics.clockwork import EventStream


def make_stream(window: Tuple[int, int], events: Dict[int, Iterable[float]], horizon: float = 10.0,
                seed: int = 0) -> EventStream:
    """EventStream with exactly the given ring times per site"""
    x_min, x_max = window
    per_site = [np.array(sorted(events.get(site, [])), dtype=float) for site in range(x_min, x_max + 1)]
    offsets = np.zeros(len(per_site) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([len(t) for t in per_site])
    times = np.concatenate(per_site) if per_site else np.empty(0)
    return EventStream(seed=seed, x_min=x_min, x_max=x_max, horizon=horizon, times=times, offsets=offsets)
