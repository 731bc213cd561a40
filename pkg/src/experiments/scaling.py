"""
Fluctuation exponent and law of large numbers of the second-class particle
"""

from typing import Optional

import numpy as np

from src.dynamics.lattice import ShockParameters
from src.experiments.base_experiment import BaseExperiment
from src.infrastructure.config import ExperimentConfig
from src.infrastructure.statistics import StatReport, mean_estimate, power_law_fit, variance_estimate
from src.infrastructure.storage import OutputStore


class ScalingExperiment(BaseExperiment):
    """
    Var(X2nd(t) - v_s t) on the t grid, its log-log slope, and X2nd(t) / t against v_s

    Thresholds:
        slope_tolerance: |slope - 2/3| allowed
        lln_tolerance: |mean X2nd(t)/t - v_s| allowed at the largest t
        min_samples: fewer usable samples flags the variance as unstable
        max_contamination: contamination rate above which the run is void
    """

    name = 'scaling'
    required_thresholds = BaseExperiment.required_thresholds + ('slope_tolerance', 'lln_tolerance', 'min_samples')

    def _execute_internal(self) -> StatReport:
        params = ShockParameters(self.config.shock.lam, self.config.shock.rho)
        times = np.array(self.config.t_grid, dtype=float)
        positions, contaminated = self.second_class_positions(times)

        report = self.new_report()
        report.record_contamination(contaminated, self.config.n_samples)
        if self.config.n_samples == 0:
            return report

        centred = positions - params.v_s * times[None, :]
        variances = [variance_estimate(centred[:, k]) for k in range(len(times))]
        for t, estimate in zip(times, variances):
            report.estimates[f"variance_t{t:g}"] = estimate

        rows = [[f"{t:g}", f"{v.value:.6e}", f"{v.ci_low:.6e}", f"{v.ci_high:.6e}", v.n]
                for t, v in zip(times, variances)]
        self.write_rows(f"{self.name}_variance.csv", ['t', 'variance', 'ci_low', 'ci_high', 'n'], rows,
                        {'lam': params.lam, 'rho': params.rho})

        report.checks['sufficient_samples'] = len(positions) >= self.threshold('min_samples')
        if len(times) >= 2 and len(positions) >= 2:
            slope = power_law_fit(times, [v.value for v in variances])
            report.estimates['slope'] = slope
            report.checks['fluctuation_exponent'] = \
                abs(slope.value - 2.0 / 3.0) <= self.threshold('slope_tolerance')

        t_max = times[-1]
        velocity = mean_estimate(positions[:, -1] / t_max)
        report.estimates['velocity'] = velocity
        report.estimates['recentred_mean_over_t'] = mean_estimate(centred[:, -1] / t_max)
        report.checks['law_of_large_numbers'] = \
            abs(velocity.value - params.v_s) <= self.threshold('lln_tolerance')
        return report


def run_scaling_experiment(config: ExperimentConfig, store: Optional[OutputStore] = None) -> StatReport:
    return ScalingExperiment(config, store=store).execute()
