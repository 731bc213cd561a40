"""
Trajectory analysis: second-class particle tracking, coupling identities and backwards paths
"""

from .samples import ShockSample, StepSample, build_shock_sample, build_step_sample, map_seeds
from .geodesics import (
    BackwardsPath,
    HeightHistory,
    PathVariant,
    build_backwards_path,
    check_path_ordering,
    check_step_domination,
    endpoint_control_statistics,
    localization_statistics,
    verify_geodesic_property,
)
from .observables import (
    ObservationPoints,
    audit_points,
    fluctuation,
    height_increment,
    path_confined,
    side_path,
)
from .tracker import (
    DiscrepancyTrace,
    Verdict,
    track_second_class,
    verdict_for_seed,
    verify_distribution_identity,
    verify_height_matching,
    verify_identity_monotone,
    verify_min_property,
    verify_shift_relation,
    verify_y_equals_x,
)

__all__ = [
    'ShockSample', 'StepSample', 'build_shock_sample', 'build_step_sample', 'map_seeds',
    'BackwardsPath', 'HeightHistory', 'PathVariant', 'build_backwards_path', 'check_path_ordering',
    'check_step_domination', 'endpoint_control_statistics', 'localization_statistics',
    'verify_geodesic_property',
    'ObservationPoints', 'audit_points', 'fluctuation', 'height_increment', 'path_confined', 'side_path',
    'DiscrepancyTrace', 'Verdict', 'track_second_class', 'verdict_for_seed',
    'verify_distribution_identity', 'verify_height_matching', 'verify_identity_monotone',
    'verify_min_property', 'verify_shift_relation', 'verify_y_equals_x',
]
