"""
Empirical law of the rescaled second-class particle against its limit
"""

from typing import Optional

import numpy as np
from scipy.stats import norm

from src.dynamics.lattice import ShockParameters
from src.experiments.base_experiment import BaseExperiment
from src.infrastructure.config import ExperimentConfig
from src.infrastructure.statistics import StatReport, empirical_cdf, ks_distance, median_estimate
from src.infrastructure.storage import OutputStore
from src.limits.shock_law import shock_limit_distribution
from src.limits.tracy_widom import DistributionTable


class LimitComparison(BaseExperiment):
    """
    KS distance of (X2nd(t) - v_s t) / t^(1/3) to the limit law at the largest t

    A centred Gaussian with the limit law's variance serves as a negative
    control. In the symmetric case chi_- = chi_+ the empirical median is
    compared with 0.

    Thresholds:
        ks_max: largest accepted KS distance to the limit law
        gaussian_ks_margin: required excess of the Gaussian control's KS distance
        median_tolerance: |median| allowed in the symmetric case
        max_contamination: contamination rate above which the run is void
    """

    name = 'limit_law'
    required_thresholds = BaseExperiment.required_thresholds + ('ks_max', 'gaussian_ks_margin', 'median_tolerance')

    def __init__(self, *args, limit_table: Optional[DistributionTable] = None, **kwargs):
        super().__init__(*args, **kwargs)
        self._limit_table = limit_table

    def limit_table(self) -> DistributionTable:
        if self._limit_table is None:
            self._limit_table = shock_limit_distribution(self.config.shock.lam, self.config.shock.rho)
        return self._limit_table

    def _execute_internal(self) -> StatReport:
        params = ShockParameters(self.config.shock.lam, self.config.shock.rho)
        t = self.config.t_grid[-1]
        positions, contaminated = self.second_class_positions([t])

        report = self.new_report()
        report.record_contamination(contaminated, self.config.n_samples)
        if self.config.n_samples == 0:
            return report

        rescaled = (positions[:, 0] - params.v_s * t) / t ** (1.0 / 3.0)
        table = self.limit_table()
        report.ks['limit'] = ks_distance(rescaled, table.interpolate)
        report.checks['limit_law'] = report.ks['limit']['statistic'] <= self.threshold('ks_max')

        _, variance = table.moments()
        gaussian = norm(loc=0.0, scale=np.sqrt(variance))
        report.ks['gaussian_control'] = ks_distance(rescaled, gaussian.cdf)
        gap = report.ks['gaussian_control']['statistic'] - report.ks['limit']['statistic']
        report.checks['gaussian_control_worse'] = gap >= self.threshold('gaussian_ks_margin')

        median = median_estimate(rescaled)
        report.estimates['median'] = median
        if abs(params.chi_minus - params.chi_plus) < 1e-12:
            report.checks['symmetric_median'] = abs(median.value) <= self.threshold('median_tolerance')

        grid = table.grid
        rows = [[f"{s:.4f}", f"{e:.6f}", f"{f:.6f}"]
                for s, e, f in zip(grid, empirical_cdf(rescaled, grid), table.cdf)]
        self.write_rows(f"{self.name}_cdf.csv", ['s', 'empirical', 'limit'], rows,
                        {'lam': params.lam, 'rho': params.rho, 't': t, 'n': len(rescaled)})
        return report


def run_limit_comparison(
    config: ExperimentConfig,
    store: Optional[OutputStore] = None,
    limit_table: Optional[DistributionTable] = None
) -> StatReport:
    return LimitComparison(config, store=store, limit_table=limit_table).execute()
