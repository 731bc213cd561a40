"""
Orchestration package for subcommand dispatch
"""

from .workflow import EXPERIMENTS, TABLE_LAWS, ExperimentWorkflow

__all__ = ['EXPERIMENTS', 'TABLE_LAWS', 'ExperimentWorkflow']
