"""
Step initial data: GUE law of the rescaled height and the exact small-window oracle
"""

from typing import Optional

import numpy as np

from src.analysis.geodesics import PathVariant, build_backwards_path, path_contaminated
from src.analysis.samples import build_step_sample, map_seeds
from src.dynamics.clockwork import generate_events
from src.dynamics.ctmc import exact_ctmc_distribution
from src.dynamics.engine import CoupledSystem
from src.dynamics.lattice import Configuration
from src.experiments.base_experiment import BaseExperiment
from src.infrastructure.statistics import StatReport, ks_distance, mean_estimate
from src.limits.tracy_widom import DistributionTable, tracy_widom_table

CTMC_SEED_OFFSET = 1 << 40


def step_statistic(height: float, alpha: float, t: float) -> float:
    """-(h(alpha t, t) - (1 + alpha^2) t / 2) / ((1 - alpha^2)^(2/3) 2^(-1/3) t^(1/3))"""
    scale = (1.0 - alpha ** 2) ** (2.0 / 3.0) * 2.0 ** (-1.0 / 3.0) * t ** (1.0 / 3.0)
    return -(height - 0.5 * (1.0 + alpha ** 2) * t) / scale


def ctmc_frequencies(config0: Configuration, t: float, runs: int, seed_base: int) -> np.ndarray:
    """Empirical law of the replayed window over `runs` clock seeds, in sorted-state order"""
    exact = exact_ctmc_distribution(config0, t)
    counts = np.zeros(len(exact.states))
    index = {state: k for k, state in enumerate(exact.states)}
    for seed in range(seed_base, seed_base + runs):
        stream = generate_events(seed, config0.window, t)
        system = CoupledSystem(stream, [config0]).evolve(t)
        counts[index[tuple(int(v) for v in system.configuration(0).occupation)]] += 1
    return counts / max(runs, 1)


class StepLawExperiment(BaseExperiment):
    """
    Rescaled step-data height at (alpha t, t) against F_GUE, plus the CTMC oracle

    Thresholds:
        mean_tolerance: |empirical mean - GUE mean| allowed
        ks_max: largest accepted KS distance to F_GUE
        ctmc_sigma: binomial standard errors allowed per CTMC state
        max_contamination: contamination rate above which the run is void
    """

    name = 'step_law'
    required_thresholds = BaseExperiment.required_thresholds + ('mean_tolerance', 'ks_max', 'ctmc_sigma')

    def __init__(self, *args, gue_table: Optional[DistributionTable] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self._gue_table = gue_table

    def gue_table(self) -> DistributionTable:
        if self._gue_table is None:
            self._gue_table = tracy_widom_table('gue')
        return self._gue_table

    def _execute_internal(self) -> StatReport:
        report = self.new_report()
        self._ctmc_check(report)
        if self.config.n_samples == 0:
            return report

        alpha = self.config.alpha
        t = self.config.t_grid[-1]
        x = int(round(alpha * t))

        def one(seed: int) -> Optional[float]:
            sample = build_step_sample(seed, t, alpha=alpha, plan=self.plan(t, alpha * t))
            sample.system.evolve(t)
            for variant in PathVariant:
                if path_contaminated(build_backwards_path(sample.system, 'step', x, t, variant), sample.plan):
                    self.logger.sample_contaminated(seed, f'{variant.value} step path in guard band')
                    return None
            return step_statistic(sample.system.height_at('step', x), alpha, t)

        results = map_seeds(one, self.seeds, self.config.workers)
        values = np.array([r for r in results if r is not None], dtype=float)
        report.record_contamination(len(results) - len(values), len(results))

        table = self.gue_table()
        gue_mean, _ = table.moments()
        mean = mean_estimate(values)
        report.estimates['mean'] = mean
        report.checks['gue_mean'] = abs(mean.value - gue_mean) <= self.threshold('mean_tolerance')
        report.ks['gue'] = {**ks_distance(values, table.interpolate), 'table_mean': gue_mean}
        report.checks['gue_ks'] = report.ks['gue']['statistic'] <= self.threshold('ks_max')
        return report

    def _ctmc_check(self, report: StatReport) -> None:
        runs = self.config.ctmc_runs
        if runs == 0:
            return
        config0 = Configuration.from_text(self.config.ctmc_initial)
        exact = exact_ctmc_distribution(config0, self.config.ctmc_time)
        freq = ctmc_frequencies(config0, self.config.ctmc_time, runs, self.config.seed_base + CTMC_SEED_OFFSET)
        sigma = np.sqrt(exact.probabilities * (1.0 - exact.probabilities) / runs)
        allowed = self.threshold('ctmc_sigma') * sigma + 1e-12
        report.checks['ctmc_oracle'] = bool(np.all(np.abs(freq - exact.probabilities) <= allowed))
        deviation = np.abs(freq - exact.probabilities) / np.where(sigma > 0, sigma, 1.0)
        report.ks['ctmc'] = {'max_deviation_sigma': float(np.max(deviation)), 'n': runs}
        rows = [[''.join(map(str, s)), f"{p:.8f}", f"{f:.8f}"]
                for s, p, f in zip(exact.states, exact.probabilities, freq)]
        self.write_rows(f"{self.name}_ctmc.csv", ['state', 'exact', 'empirical'], rows,
                        {'initial': self.config.ctmc_initial, 't': self.config.ctmc_time, 'runs': runs})
