"""
Infrastructure package for configuration, statistics and output storage
"""

from .config import ExperimentConfig, RunConfig, ShockConfig, WindowConfig, load_config, parse_config
from .statistics import (
    Estimate,
    StatReport,
    correlation_estimate,
    ks_distance,
    mean_estimate,
    median_estimate,
    power_law_fit,
    proportion_estimate,
    summarize_reports,
    variance_estimate,
)
from .storage import OutputStore

__all__ = [
    'ExperimentConfig',
    'RunConfig',
    'ShockConfig',
    'WindowConfig',
    'load_config',
    'parse_config',
    'Estimate',
    'StatReport',
    'correlation_estimate',
    'ks_distance',
    'mean_estimate',
    'median_estimate',
    'power_law_fit',
    'proportion_estimate',
    'summarize_reports',
    'variance_estimate',
    'OutputStore',
]
