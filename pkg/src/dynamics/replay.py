"""
Compiled inner loops for event replay

All kernels work on window indices (site - x_min) and mutate their array
arguments in place. They release the GIL so independent trajectories can
be replayed from a thread pool.
"""

import numpy as np
from numba import njit

HOLE = 0
FIRST = 1
SECOND = 2


@njit(nogil=True, cache=True)
def _grow(buffer, used):
    bigger = np.empty(2 * buffer.shape[0], np.int64)
    bigger[:used] = buffer[:used]
    return bigger


@njit(nogil=True, cache=True)
def apply_coupled(occ, anchors, event_index, start, stop, origin, executed, pair_a, pair_b, disc_pos):
    """
    Apply merged events [start, stop) to every member

    Args:
        occ: (members, sites) uint8 occupations, updated in place
        anchors: (members,) int64 heights h(0), updated in place
        event_index: window index of each merged event's site
        start, stop: merged event range
        origin: window index of site 0
        executed: (n_events, members) bool log, or an empty array to skip logging
        pair_a, pair_b: member rows whose single discrepancy is tracked (-1 to skip)
        disc_pos: current window index of that discrepancy

    Returns:
        (breach, disc_pos, change_events, change_positions); breach is the
        merged index of the first event leaving a discrepancy count != 1, or -1
    """
    members, n = occ.shape
    log = executed.shape[0] > 0
    tracking = pair_a >= 0
    cap = 64
    change_events = np.empty(cap, dtype=np.int64)
    change_positions = np.empty(cap, dtype=np.int64)
    n_changes = 0

    for e in range(start, stop):
        s = event_index[e]
        if s + 1 >= n:
            continue
        before = 0
        if tracking:
            before = int(occ[pair_a, s] != occ[pair_b, s]) + int(occ[pair_a, s + 1] != occ[pair_b, s + 1])
        for m in range(members):
            if occ[m, s] == 1 and occ[m, s + 1] == 0:
                occ[m, s] = 0
                occ[m, s + 1] = 1
                if s + 1 == origin:
                    anchors[m] += 2
                if log:
                    executed[e, m] = True
        if tracking:
            at_s = occ[pair_a, s] != occ[pair_b, s]
            at_next = occ[pair_a, s + 1] != occ[pair_b, s + 1]
            after = int(at_s) + int(at_next)
            if after != before:
                return e, disc_pos, change_events[:n_changes], change_positions[:n_changes]
            if after == 1:
                new_pos = s if at_s else s + 1
                if new_pos != disc_pos:
                    if n_changes == change_events.shape[0]:
                        change_events = _grow(change_events, n_changes)
                        change_positions = _grow(change_positions, n_changes)
                    change_events[n_changes] = e
                    change_positions[n_changes] = new_pos
                    n_changes += 1
                    disc_pos = new_pos
    return -1, disc_pos, change_events[:n_changes], change_positions[:n_changes]


@njit(nogil=True, cache=True)
def apply_multiclass(classes, event_index, start, stop, tagged):
    """
    Apply merged events [start, stop) to a hole/first/second configuration

    Returns:
        (tagged, change_events, change_positions) for the tagged second-class particle
    """
    n = classes.shape[0]
    cap = 64
    change_events = np.empty(cap, dtype=np.int64)
    change_positions = np.empty(cap, dtype=np.int64)
    n_changes = 0

    for e in range(start, stop):
        s = event_index[e]
        if s + 1 >= n:
            continue
        here = classes[s]
        there = classes[s + 1]
        moved = False
        if here == FIRST and (there == HOLE or there == SECOND):
            classes[s] = there
            classes[s + 1] = FIRST
            if tagged == s + 1:
                tagged = s
                moved = True
        elif here == SECOND and there == HOLE:
            classes[s] = HOLE
            classes[s + 1] = SECOND
            if tagged == s:
                tagged = s + 1
                moved = True
        if moved:
            if n_changes == change_events.shape[0]:
                change_events = _grow(change_events, n_changes)
                change_positions = _grow(change_positions, n_changes)
            change_events[n_changes] = e
            change_positions[n_changes] = tagged
            n_changes += 1
    return tagged, change_events[:n_changes], change_positions[:n_changes]
