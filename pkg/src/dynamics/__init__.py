"""
Particle dynamics: Poisson clocks, configurations, coupled replay and the exact small-system law
"""

from .clockwork import (
    EventStream,
    MergedEvents,
    dump_stream,
    generate_events,
    last_event_before,
    load_stream,
    merged_order,
)
from .lattice import (
    Configuration,
    HeightFunction,
    InitialCondition,
    ShockParameters,
    SiteClass,
    build_initial,
    height_of,
    shock_pair,
    split_minus_plus,
)
from .engine import (
    CoupledSystem,
    MulticlassState,
    WindowPlan,
    evolve,
    evolve_multiclass,
    min_superposition,
    naive_replay,
    parse_snapshot,
    plan_window,
    step_heights,
)
from .ctmc import StateDistribution, exact_ctmc_distribution

__all__ = [
    'EventStream', 'MergedEvents', 'dump_stream', 'generate_events', 'last_event_before',
    'load_stream', 'merged_order',
    'Configuration', 'HeightFunction', 'InitialCondition', 'ShockParameters', 'SiteClass',
    'build_initial', 'height_of', 'shock_pair', 'split_minus_plus',
    'CoupledSystem', 'MulticlassState', 'WindowPlan', 'evolve', 'evolve_multiclass',
    'min_superposition', 'naive_replay', 'parse_snapshot', 'plan_window', 'step_heights',
    'StateDistribution', 'exact_ctmc_distribution',
]
