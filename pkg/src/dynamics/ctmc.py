"""
Exact law of TASEP on a small closed window via the matrix exponential
"""

from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np
from scipy.linalg import expm

from src.dynamics.lattice import Configuration
from src.errors import StateSpaceError, WindowError

MAX_CTMC_SITES = 12

State = Tuple[int, ...]


@dataclass(frozen=True, eq=False)
class StateDistribution:
    """Probability vector over lexicographically sorted occupation tuples"""

    window: Tuple[int, int]
    states: List[State]
    probabilities: np.ndarray

    def probability_of(self, config: Configuration) -> float:
        key = tuple(int(v) for v in config.occupation)
        try:
            return float(self.probabilities[self.states.index(key)])
        except ValueError:
            return 0.0

    def as_dict(self) -> Dict[State, float]:
        return {state: float(p) for state, p in zip(self.states, self.probabilities)}


def sector_states(n_sites: int, n_particles: int) -> List[State]:
    """All occupations of n_sites with n_particles, lexicographically sorted"""
    states = []
    for occupied in combinations(range(n_sites), n_particles):
        state = [0] * n_sites
        for i in occupied:
            state[i] = 1
        states.append(tuple(state))
    return sorted(states)


def generator_matrix(states: List[State]) -> np.ndarray:
    """Rate-1 nearest-neighbour right jumps with closed boundaries"""
    index = {state: k for k, state in enumerate(states)}
    generator = np.zeros((len(states), len(states)))
    for k, state in enumerate(states):
        for i in range(len(state) - 1):
            if state[i] == 1 and state[i + 1] == 0:
                target = list(state)
                target[i], target[i + 1] = 0, 1
                generator[k, index[tuple(target)]] += 1.0
                generator[k, k] -= 1.0
    return generator


def exact_ctmc_distribution(config0: Configuration, t: float) -> StateDistribution:
    """
    Law at time t of TASEP started from config0 on its closed window

    Args:
        config0: Initial configuration on at most 12 sites
        t: Time

    Returns:
        StateDistribution over the particle-number sector of config0
    """
    if config0.size > MAX_CTMC_SITES:
        raise StateSpaceError(f"{config0.size} sites exceed the exact-solver limit of {MAX_CTMC_SITES}")
    if t < 0:
        raise WindowError(f"time must be non-negative, got {t}")

    states = sector_states(config0.size, config0.particle_count())
    start = np.zeros(len(states))
    start[states.index(tuple(int(v) for v in config0.occupation))] = 1.0
    probabilities = start @ expm(t * generator_matrix(states))
    probabilities = np.clip(probabilities, 0.0, None)
    probabilities /= probabilities.sum()
    return StateDistribution(config0.window, states, probabilities)
