"""
Independence of the two shock sides and slow decorrelation along their characteristics
"""

from collections import defaultdict
from itertools import product
from typing import Dict, List, Optional, Tuple

import numpy as np

from src.analysis.observables import (
    ObservationPoints,
    audit_points,
    fluctuation,
    height_increment,
    path_confined,
    side_path,
)
from src.analysis.samples import map_seeds
from src.dynamics.lattice import ShockParameters
from src.errors import ContaminationError
from src.experiments.base_experiment import BaseExperiment
from src.infrastructure.config import ExperimentConfig
from src.infrastructure.statistics import (
    Estimate,
    StatReport,
    correlation_estimate,
    is_decreasing,
    proportion_estimate,
    variance_estimate,
)
from src.infrastructure.storage import OutputStore

SIDES = ('minus', 'plus')

GridPoint = Tuple[float, float]


def point_label(tau: float, s: float) -> str:
    return f"tau{tau:g}_s{s:g}"


class _PointsExperiment(BaseExperiment):
    """
    Shared loop over the t grid and the (tau, s) grid

    Each seed is evolved once per t, far enough for every (tau, s) point;
    contamination is audited point by point.
    """

    def grid(self, t: float) -> Dict[GridPoint, ObservationPoints]:
        params = ShockParameters(self.config.shock.lam, self.config.shock.rho)
        return {
            (tau, s): ObservationPoints(params, t, tau, s, self.config.nu)
            for tau, s in product(self.config.tau_grid, self.config.s_grid)
        }

    def collect(self, t: float, include_late: bool, measure) -> Dict[GridPoint, List[Optional[Dict[str, float]]]]:
        grid = self.grid(t)
        horizon = max(p.horizon if include_late else p.early_time for p in grid.values())

        def one(seed: int) -> Dict[GridPoint, Optional[Dict[str, float]]]:
            sample = self.shock_sample(seed, horizon)
            measured = {}
            for key, points in grid.items():
                try:
                    audit_points(sample, points, include_late=include_late)
                except ContaminationError:
                    measured[key] = None
                    continue
                measured[key] = measure(sample, points)
            return measured

        per_seed = map_seeds(one, self.seeds, self.config.workers)
        return {key: [r[key] for r in per_seed] for key in grid}


class IndependenceCheck(_PointsExperiment):
    """
    Correlation of Z-(B-) and Z+(B+), with a nearby-point control and path confinement

    Estimates and checks carry the (tau, s) point as tau<tau>_s<s>.

    Thresholds:
        band_width: the null band is +-band_width / sqrt(N)
        confinement_slack: allowed decrease of the confinement fraction between grid times
        max_contamination: contamination rate above which the run is void
    """

    name = 'independence'
    required_thresholds = BaseExperiment.required_thresholds + ('band_width', 'confinement_slack')

    @staticmethod
    def _measure(sample, points: ObservationPoints) -> Dict[str, float]:
        v_s = sample.params.v_s
        return {
            'z_minus': fluctuation(sample, points, 'minus'),
            'z_plus': fluctuation(sample, points, 'plus'),
            'z_minus_nearby': fluctuation(sample, points, 'minus', x_shift=1),
            'confined': float(path_confined(side_path(sample, points, 'minus'), v_s, 'minus')
                              and path_confined(side_path(sample, points, 'plus'), v_s, 'plus')),
        }

    def _execute_internal(self) -> StatReport:
        report = self.new_report()
        if self.config.n_samples == 0:
            return report
        band_width = self.threshold('band_width')
        fractions: Dict[GridPoint, List[float]] = defaultdict(list)
        last: Dict[GridPoint, Tuple[Estimate, Estimate]] = {}
        contaminated = 0
        rows = []

        for t in self.config.t_grid:
            for (tau, s), results in self.collect(t, include_late=False, measure=self._measure).items():
                label = point_label(tau, s)
                kept = [r for r in results if r is not None]
                contaminated = max(contaminated, len(results) - len(kept))
                z_minus = [r['z_minus'] for r in kept]

                corr = correlation_estimate(z_minus, [r['z_plus'] for r in kept], band_width)
                control = correlation_estimate(z_minus, [r['z_minus_nearby'] for r in kept], band_width)
                confined = proportion_estimate(int(sum(r['confined'] for r in kept)), len(kept))
                report.estimates[f"correlation_{label}_t{t:g}"] = corr
                report.estimates[f"nearby_correlation_{label}_t{t:g}"] = control
                report.estimates[f"confinement_{label}_t{t:g}"] = confined
                fractions[(tau, s)].append(confined.value)
                last[(tau, s)] = (corr, control)
                rows.append([f"{tau:g}", f"{s:g}", f"{t:g}", f"{corr.value:.6f}", f"{control.value:.6f}",
                             f"{confined.value:.6f}", len(kept)])

        report.record_contamination(contaminated, self.config.n_samples)
        slack = self.threshold('confinement_slack')
        for (tau, s), (corr, control) in last.items():
            label = point_label(tau, s)
            report.checks[f"independent_sides_{label}"] = bool(abs(corr.value) <= corr.ci_high)
            report.checks[f"nearby_control_detected_{label}"] = bool(abs(control.value) > control.ci_high)
            report.checks[f"confinement_increasing_{label}"] = is_decreasing(
                [-f for f in fractions[(tau, s)]], slack=slack)
        self.write_rows(f"{self.name}.csv",
                        ['tau', 's', 't', 'correlation', 'nearby_correlation', 'confinement', 'n'], rows)
        return report


class SlowDecorrelation(_PointsExperiment):
    """
    P(|h(A) - h(B) - drift| >= eps t^(1/3)) on both sides for each eps and (tau, s), against t

    Thresholds:
        monotone_slack: allowed increase of an exceedance probability between grid times
        max_contamination: contamination rate above which the run is void
    """

    name = 'slow_decorrelation'
    required_thresholds = BaseExperiment.required_thresholds + ('monotone_slack',)

    @staticmethod
    def _measure(sample, points: ObservationPoints) -> Dict[str, float]:
        return {side: height_increment(sample, points, side) for side in SIDES}

    def _execute_internal(self) -> StatReport:
        report = self.new_report()
        if self.config.n_samples == 0:
            return report
        epsilons = list(self.config.epsilons)
        curves: Dict[Tuple[str, str, float], List[float]] = defaultdict(list)
        contaminated = 0
        rows = []

        for t in self.config.t_grid:
            for (tau, s), results in self.collect(t, include_late=True, measure=self._measure).items():
                label = point_label(tau, s)
                kept = [r for r in results if r is not None]
                contaminated = max(contaminated, len(results) - len(kept))
                for side in SIDES:
                    increments = np.array([r[side] for r in kept], dtype=float)
                    spread = variance_estimate(increments / t ** (self.config.nu / 3.0))
                    report.estimates[f"{side}_spread_{label}_t{t:g}"] = spread
                    for eps in epsilons:
                        hits = int(np.sum(np.abs(increments) >= eps * t ** (1.0 / 3.0)))
                        estimate = proportion_estimate(hits, len(kept))
                        report.estimates[f"{side}_exceed_eps{eps:g}_{label}_t{t:g}"] = estimate
                        curves[(label, side, eps)].append(estimate.value)
                        rows.append([f"{tau:g}", f"{s:g}", side, f"{eps:g}", f"{t:g}",
                                     f"{estimate.value:.6f}", len(kept)])

        report.record_contamination(contaminated, self.config.n_samples)
        slack = self.threshold('monotone_slack')
        for (label, side, eps), values in curves.items():
            report.checks[f"{side}_decreasing_eps{eps:g}_{label}"] = is_decreasing(values, slack)
        self.write_rows(f"{self.name}.csv", ['tau', 's', 'side', 'eps', 't', 'probability', 'n'], rows)
        return report


def run_independence_check(config: ExperimentConfig, store: Optional[OutputStore] = None) -> StatReport:
    return IndependenceCheck(config, store=store).execute()


def run_slow_decorrelation(config: ExperimentConfig, store: Optional[OutputStore] = None) -> StatReport:
    return SlowDecorrelation(config, store=store).execute()
