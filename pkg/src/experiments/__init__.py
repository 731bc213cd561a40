"""
Experiments: one class per harness run, each producing a StatReport
"""

from .base_experiment import BaseExperiment
from .decorrelation import IndependenceCheck, SlowDecorrelation, run_independence_check, run_slow_decorrelation
from .geodesics import GeodesicSuite
from .identity import IdentitySuite, run_identity_suite
from .limit_law import LimitComparison, run_limit_comparison
from .scaling import ScalingExperiment, run_scaling_experiment
from .step_law import StepLawExperiment

__all__ = [
    'BaseExperiment',
    'GeodesicSuite',
    'IdentitySuite',
    'IndependenceCheck',
    'LimitComparison',
    'ScalingExperiment',
    'SlowDecorrelation',
    'StepLawExperiment',
    'run_identity_suite',
    'run_independence_check',
    'run_limit_comparison',
    'run_scaling_experiment',
    'run_slow_decorrelation',
]
