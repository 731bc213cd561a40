"""
Base experiment class for all Monte Carlo and numerics runs
"""

import time
from abc import ABC, abstractmethod
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.analysis.samples import ShockSample, build_shock_sample, map_seeds
from src.analysis.tracker import jump_trace
from src.dynamics.engine import WindowPlan, plan_window
from src.dynamics.lattice import InitialCondition
from src.infrastructure.config import ExperimentConfig
from src.infrastructure.statistics import StatReport
from src.infrastructure.storage import OutputStore
from src.monitoring.logger import StructuredLogger
from src.monitoring.performance_monitor import performance_monitor


class BaseExperiment(ABC):
    """
    Base class for all experiments

    Every key in required_thresholds must be present in the block's
    thresholds mapping; execute raises ConfigError before any sample runs
    otherwise.
    """

    name: str = 'experiment'
    required_thresholds: Tuple[str, ...] = ('max_contamination',)

    def __init__(self, config: ExperimentConfig, store: Optional[OutputStore] = None):
        """
        Initialize experiment

        Args:
            config: Validated experiment block
            store: Where reports and per-seed outputs go (None keeps them in memory)
        """
        self.config = config
        self.store = store
        self.logger = StructuredLogger(name=f"experiment.{self.name}")

    @property
    def seeds(self) -> range:
        return range(self.config.seed_base, self.config.seed_base + self.config.n_samples)

    def initial_condition(self, seed: int) -> InitialCondition:
        """Shock data for one seed; Bernoulli data draws its sites from the seed"""
        shock = self.config.shock
        return InitialCondition.shock_family(self.config.initial_data, shock.lam, shock.rho, seed)

    def plan(self, horizon: float, center: float) -> WindowPlan:
        window = self.config.window
        return plan_window(horizon, center, window.kappa, window.margin, window.guard_fraction)

    def shock_sample(self, seed: int, horizon: float, record_log: bool = True) -> ShockSample:
        ic = self.initial_condition(seed)
        plan = self.plan(horizon, ic.shock_parameters.v_s * horizon)
        return build_shock_sample(seed, ic, horizon, plan=plan, record_log=record_log).evolve(horizon)

    def second_class_positions(self, times: Sequence[float]) -> Tuple[np.ndarray, int]:
        """
        X2nd at each time for every seed, one evolved sample per seed

        Returns:
            (positions of shape (n_used, len(times)), contaminated count)
        """
        times = sorted(float(t) for t in times)

        def one(seed: int) -> Optional[List[int]]:
            sample = self.shock_sample(seed, times[-1], record_log=False)
            trace = jump_trace(sample.system)
            if any(sample.plan.in_guard_band(int(x)) for x in trace.positions):
                self.logger.sample_contaminated(seed, 'second-class particle entered the guard band')
                return None
            return [trace.at(t) for t in times]

        results = map_seeds(one, self.seeds, self.config.workers)
        kept = [r for r in results if r is not None]
        positions = np.array(kept, dtype=np.int64).reshape(len(kept), len(times))
        return positions, len(results) - len(kept)

    def threshold(self, key: str) -> float:
        return self.config.threshold(key)

    def check_thresholds(self) -> None:
        for key in self.required_thresholds:
            self.config.threshold(key)

    def new_report(self) -> StatReport:
        return StatReport(experiment=self.name, thresholds=dict(self.config.thresholds))

    def execute(self) -> StatReport:
        """
        Run the experiment, stamp runtime and config, and persist the report

        Returns:
            Finalized StatReport
        """
        self.check_thresholds()
        start_time = time.time()

        self.logger.experiment_start(
            self.name,
            n_samples=self.config.n_samples,
            seed_base=self.config.seed_base
        )

        try:
            with performance_monitor.track_operation(f"experiment.{self.name}"):
                report = self._execute_internal()

            duration = time.time() - start_time
            report.runtime = {'seconds': round(duration, 3), 'peak_rss_mb': performance_monitor.peak_rss_mb()}
            report.config = self.config.model_dump()
            if report.status is None:
                report.finalize(self.config.n_samples, self.threshold('max_contamination'))
            if self.store is not None:
                self.store.write_json(f"{self.name}_report.json", report.to_dict())

            self.logger.experiment_complete(
                self.name,
                duration_seconds=duration,
                passed=report.passed,
                status=report.status
            )

            return report

        except Exception as e:
            self.logger.experiment_error(self.name, error=e)
            raise

    def write_rows(self, filename: str, header: Sequence[str], rows, metadata: Optional[Dict] = None) -> None:
        if self.store is not None:
            self.store.write_csv(filename, header, rows, metadata)

    @abstractmethod
    def _execute_internal(self) -> StatReport:
        """
        Internal execution logic (to be implemented by subclasses)

        Returns:
            StatReport with checks, estimates and contamination filled in
        """
        pass
