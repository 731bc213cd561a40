"""
Stage timings and peak memory for experiment runs
"""

import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Dict, Optional

import psutil

from src.monitoring.logger import StructuredLogger


@dataclass
class StageTiming:
    count: int = 0
    errors: int = 0
    total_seconds: float = 0.0
    max_seconds: float = 0.0

    def as_dict(self, stage: str) -> Dict[str, Any]:
        return {
            'operation': stage,
            'count': self.count,
            'errors': self.errors,
            'total_time': round(self.total_seconds, 4),
            'average_time': round(self.total_seconds / self.count, 4) if self.count else 0.0,
            'max_time': round(self.max_seconds, 4),
        }


class PerformanceMonitor:
    """
    Thread-safe collector of per-stage timings

    Experiments wrap their replay and numerics stages in track_operation;
    the peak resident set size sampled at each stage end goes into the
    runtime block of every report.
    """

    def __init__(self, slow_threshold_seconds: float = 60.0):
        self.logger = StructuredLogger(name='performance_monitor')
        self.slow_threshold_seconds = slow_threshold_seconds
        self._stages: Dict[str, StageTiming] = {}
        self._lock = threading.Lock()
        self._process = psutil.Process()
        self._peak_rss = self._process.memory_info().rss

    @contextmanager
    def track_operation(self, stage: str, metadata: Optional[Dict[str, Any]] = None):
        """
        Time the enclosed block under `stage`

        Usage:
            with monitor.track_operation('experiment.scaling'):
                experiment.run()
        """
        start = time.perf_counter()
        failure = None
        try:
            yield
        except Exception as e:
            failure = str(e)
            raise
        finally:
            self._record(stage, time.perf_counter() - start, failure, metadata or {})

    def _record(self, stage: str, seconds: float, failure: Optional[str], metadata: Dict[str, Any]) -> None:
        rss = self._process.memory_info().rss
        with self._lock:
            timing = self._stages.setdefault(stage, StageTiming())
            timing.count += 1
            timing.total_seconds += seconds
            timing.max_seconds = max(timing.max_seconds, seconds)
            if failure is not None:
                timing.errors += 1
            self._peak_rss = max(self._peak_rss, rss)

        if seconds > self.slow_threshold_seconds:
            self.logger.warning(f"Slow stage: {stage}", seconds=round(seconds, 3), operation=stage, **metadata)
        if failure is not None:
            self.logger.error(f"Stage failed: {stage}", error=failure, operation=stage)

    def get_metrics(self, stage: Optional[str] = None) -> Dict[str, Any]:
        """Timings of one stage, or of all stages keyed by name; {} for an unknown stage"""
        with self._lock:
            if stage is not None:
                timing = self._stages.get(stage)
                return timing.as_dict(stage) if timing else {}
            return {name: timing.as_dict(name) for name, timing in self._stages.items()}

    def peak_rss_mb(self) -> float:
        """Peak resident set size observed so far, in MiB"""
        with self._lock:
            self._peak_rss = max(self._peak_rss, self._process.memory_info().rss)
            return round(self._peak_rss / 2 ** 20, 1)


performance_monitor = PerformanceMonitor()
