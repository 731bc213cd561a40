"""
Pathwise coupling identities over many seeds
"""

from typing import Optional

from src.analysis.tracker import verdict_for_seed
from src.analysis.samples import map_seeds
from src.experiments.base_experiment import BaseExperiment
from src.infrastructure.config import ExperimentConfig
from src.infrastructure.statistics import StatReport, proportion_estimate
from src.infrastructure.storage import OutputStore


class IdentitySuite(BaseExperiment):
    """Runs every tracker verification on each seed and counts failures"""

    name = 'identity'

    def _execute_internal(self) -> StatReport:
        xs = list(self.config.x_grid)
        ts = list(self.config.t_grid)

        verdicts = map_seeds(
            lambda seed: verdict_for_seed(seed, self.initial_condition(seed), xs, ts),
            self.seeds,
            self.config.workers
        )
        if self.store is not None:
            self.store.write_jsonl(f"{self.name}_verdicts.jsonl", (v.to_record() for v in verdicts))

        report = self.new_report()
        clean = [v for v in verdicts if not v.contaminated]
        report.record_contamination(len(verdicts) - len(clean), len(verdicts))

        names = sorted({name for v in clean for name in v.checks})
        for name in names:
            failures = sum(1 for v in clean if not v.checks.get(name, True))
            report.checks[name] = failures == 0
            report.estimates[f"{name}_failure_rate"] = proportion_estimate(failures, len(clean))
            if failures:
                self.logger.warning("Identity check failed on some seeds", check=name, failures=failures)
        return report


def run_identity_suite(config: ExperimentConfig, store: Optional[OutputStore] = None) -> StatReport:
    return IdentitySuite(config, store=store).execute()
