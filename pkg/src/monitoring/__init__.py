"""
Monitoring package for logging and performance tracking
"""

from .logger import StructuredLogger, JsonFormatter, set_log_level
from .performance_monitor import PerformanceMonitor, performance_monitor

__all__ = ['StructuredLogger', 'JsonFormatter', 'set_log_level', 'PerformanceMonitor', 'performance_monitor']
