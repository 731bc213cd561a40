"""
Backwards geodesics: exact pathwise properties, localization and endpoint control
"""

from typing import Dict, List, Optional

import numpy as np

from src.analysis.geodesics import (
    build_backwards_path,
    check_path_ordering,
    check_step_domination,
    endpoint_control_statistics,
    localization_statistics,
    path_contaminated,
    paths_coalesce,
    verify_geodesic_property,
)
from src.analysis.samples import map_seeds
from src.dynamics.engine import CoupledSystem, step_configuration
from src.dynamics.lattice import ShockParameters
from src.errors import ContaminationError
from src.experiments.base_experiment import BaseExperiment
from src.infrastructure.statistics import Estimate, StatReport, is_decreasing, proportion_estimate

PATHWISE_CHECKS = ('geodesic_property', 'path_ordering', 'coalescence', 'restriction', 'step_domination')


def restriction_holds(system: CoupledSystem, member: str, path, t_new: float) -> bool:
    """A path cut at t_new coincides with the path rebuilt from (x(t_new), t_new)"""
    cut = path.restrict(t_new)
    rebuilt = build_backwards_path(system, member, cut.x, cut.t, path.variant)
    return bool(np.array_equal(cut.move_times, rebuilt.move_times)
                and np.array_equal(cut.positions, rebuilt.positions))


class GeodesicSuite(BaseExperiment):
    """
    Pathwise checks at the first grid time, localization at the last,
    endpoint control across the grid

    Thresholds:
        localization_u: level u of the reported localization tail
        localization_tail_max: largest accepted tail at localization_u
        endpoint_min: smallest accepted endpoint-control fraction at the largest t
        endpoint_slack: allowed decrease of the endpoint fraction between grid times
        max_contamination: contamination rate above which the run is void
    """

    name = 'geodesics'
    required_thresholds = BaseExperiment.required_thresholds + (
        'localization_u', 'localization_tail_max', 'endpoint_min', 'endpoint_slack')

    def _pathwise(self, seed: int, t: float) -> Optional[Dict]:
        sample = self.shock_sample(seed, t)
        system = sample.system
        x = int(round(sample.params.v_s * t))
        path = build_backwards_path(system, 'eta', x, t)
        if path_contaminated(path, sample.plan):
            self.logger.sample_contaminated(seed, 'geodesic path in guard band')
            return None

        tau = float(np.random.default_rng(seed).uniform(0.0, t))
        try:
            geodesic = verify_geodesic_property(path, system, [t, tau, 0.0], sample.plan)
        except ContaminationError:
            return None

        neighbour = build_backwards_path(system, 'eta', x + 1, t)
        dominated = CoupledSystem(
            sample.stream,
            [system.initial_configuration('minus'), step_configuration(0, sample.plan.window)],
            labels=('minus', 'step'),
        ).evolve(t)

        return {
            'checks': {
                'geodesic_property': geodesic,
                'path_ordering': check_path_ordering(system, 'eta', x, x + 1, t),
                'coalescence': paths_coalesce(path, neighbour),
                'restriction': restriction_holds(system, 'eta', path, tau),
                'step_domination': check_step_domination(dominated, 'minus', 'step', x, t),
            },
            'rows': [[f"{s:.9g}", p] for s, p in path.breakpoints],
        }

    def _execute_internal(self) -> StatReport:
        report = self.new_report()
        if self.config.n_samples == 0:
            return report
        t_grid = list(self.config.t_grid)
        t = t_grid[0]

        results = map_seeds(lambda seed: self._pathwise(seed, t), self.seeds, self.config.workers)
        kept = [r for r in results if r is not None]
        report.record_contamination(len(results) - len(kept), len(results))
        for name in PATHWISE_CHECKS:
            failures = sum(1 for r in kept if not r['checks'][name])
            report.checks[name] = failures == 0
            report.estimates[f"{name}_failure_rate"] = proportion_estimate(failures, len(kept))
            if failures:
                self.logger.warning("Geodesic check failed on some seeds", check=name, failures=failures)
        if kept:
            self.write_rows(f"{self.name}_path.csv", ['tau', 'x'], kept[0]['rows'],
                            {'t': t, 'member': 'eta', 'variant': 'rightmost'})

        localized = self._localization(report, t_grid[-1])
        endpoints = self._endpoint_control(report, t_grid)
        # each stage runs the same seeds; the worst stage decides
        report.record_contamination(
            max(report.contamination['count'], localized, endpoints), self.config.n_samples)
        return report

    def _localization(self, report: StatReport, t: float) -> int:
        alpha = self.config.alpha
        result = localization_statistics(
            alpha, t, self.config.n_samples,
            u_grid=self.config.u_grid, seed_base=self.config.seed_base, workers=self.config.workers,
            plan=self.plan(t, alpha * t),
        )
        for u, value, low, high in zip(result.u, result.tail, result.ci_low, result.ci_high):
            report.estimates[f"localization_tail_u{u:g}"] = Estimate(float(value), float(low), float(high), result.n_used)
        report.checks['localization_monotone'] = is_decreasing(result.tail)

        level = self.threshold('localization_u')
        if level in result.u:
            tail = float(result.tail[list(result.u).index(level)])
            report.checks['localization_tail'] = tail <= self.threshold('localization_tail_max')

        rows = [[f"{u:g}", f"{v:.6f}", f"{lo:.6f}", f"{hi:.6f}"]
                for u, v, lo, hi in zip(result.u, result.tail, result.ci_low, result.ci_high)]
        self.write_rows(f"{self.name}_localization.csv", ['u', 'tail', 'ci_low', 'ci_high'], rows,
                        {'alpha': alpha, 't': t, 'n': result.n_used})
        return result.n_contaminated

    def _endpoint_control(self, report: StatReport, t_grid: List[float]) -> int:
        shock = self.config.shock
        v_s = ShockParameters(shock.lam, shock.rho).v_s
        fractions = []
        contaminated = 0
        for t in t_grid:
            result = endpoint_control_statistics(
                shock.lam, shock.rho, t, self.config.n_samples,
                seed_base=self.config.seed_base, workers=self.config.workers,
                plan=self.plan(t, v_s * t), initial_data=self.config.initial_data,
            )
            report.estimates[f"endpoint_control_t{t:g}"] = Estimate(
                result.fraction, result.ci_low, result.ci_high, result.n_used)
            fractions.append(result.fraction)
            contaminated = max(contaminated, result.n_contaminated)

        report.checks['endpoint_increasing'] = is_decreasing(
            [-f for f in fractions], slack=self.threshold('endpoint_slack'))
        report.checks['endpoint_control'] = fractions[-1] >= self.threshold('endpoint_min')
        return contaminated
