"""
Synchronous workflow orchestrator for the CLI subcommands
"""

from typing import Any, Dict, List, Optional, Tuple, Type

from src.errors import ConfigError
from src.experiments import (
    BaseExperiment,
    GeodesicSuite,
    IdentitySuite,
    IndependenceCheck,
    LimitComparison,
    ScalingExperiment,
    SlowDecorrelation,
    StepLawExperiment,
)
from src.infrastructure.config import ExperimentConfig, RunConfig
from src.infrastructure.statistics import summarize_reports
from src.infrastructure.storage import OutputStore
from src.limits.airy21 import airy21_table
from src.limits.shock_law import shock_limit_distribution
from src.limits.tracy_widom import DistributionTable, table_grid, tracy_widom_table
from src.monitoring import StructuredLogger

EXPERIMENTS: Dict[str, List[Tuple[str, Type[BaseExperiment]]]] = {
    'simulate': [('step_law', StepLawExperiment)],
    'verify-identity': [('identity', IdentitySuite)],
    'geodesics': [('geodesics', GeodesicSuite)],
    'scaling': [
        ('scaling', ScalingExperiment),
        ('independence', IndependenceCheck),
        ('slow_decorrelation', SlowDecorrelation),
    ],
    'limit-law': [('limit_law', LimitComparison)],
}
TABLE_LAWS = ('gue', 'goe', 'airy21', 'shock')
TABLES_BLOCK = 'fredholm_tables'
SUMMARY_FILE = 'summary.json'


class ExperimentWorkflow:
    """Runs the experiments behind each subcommand and writes their outputs"""

    def __init__(self, config: RunConfig, store: Optional[OutputStore] = None):
        """
        Initialize workflow components

        Args:
            config: Validated run configuration
            store: Output location (default: the config's resolved output dir)
        """
        self.logger = StructuredLogger(name='workflow')
        self.config = config
        self.store = store or OutputStore(config.resolved_output_dir())

    def run(self, command: str, seeds: Optional[int] = None, law: Optional[str] = None) -> Dict[str, Any]:
        """
        Dispatch one subcommand

        Returns:
            {'command', 'passed', ...}; passed decides the exit status
        """
        if command in EXPERIMENTS:
            return self.run_experiments(command, seeds)
        if command == 'fredholm-tables':
            return self.fredholm_tables(law or 'gue')
        if command == 'report':
            return self.report()
        raise ConfigError(f"unknown command {command!r}")

    def experiment_config(self, key: str, seeds: Optional[int] = None) -> ExperimentConfig:
        block = self.config.experiment(key)
        if seeds is not None:
            block = block.model_copy(update={'n_samples': int(seeds)})
        return block

    def run_experiments(self, command: str, seeds: Optional[int] = None) -> Dict[str, Any]:
        """
        Run every enabled experiment of a subcommand

        A failing experiment does not stop the others; reports already
        written stay in the output directory.
        """
        reports: List[Dict[str, Any]] = []

        for key, experiment_class in EXPERIMENTS[command]:
            block = self.experiment_config(key, seeds)
            if not block.enabled:
                self.logger.info("Experiment disabled, skipping", experiment=key)
                continue

            try:
                report = experiment_class(block, store=self.store).execute()
                reports.append(report.to_dict())
            except ConfigError:
                raise
            except Exception as e:
                self.logger.error("Experiment failed", experiment=key, error=str(e))
                reports.append({'experiment': key, 'status': 'error', 'passed': False, 'error': str(e)})

        return {
            'command': command,
            'passed': all(r['passed'] for r in reports),
            'reports': reports,
        }

    def _tables_config(self) -> ExperimentConfig:
        if TABLES_BLOCK in self.config.experiments:
            return self.config.experiments[TABLES_BLOCK]
        return ExperimentConfig(name=TABLES_BLOCK)

    def build_tables(self, law: str) -> Dict[str, DistributionTable]:
        """Distribution tables for `law`, keyed by output file name"""
        if law not in TABLE_LAWS:
            raise ConfigError(f"unknown law {law!r}; expected one of {list(TABLE_LAWS)}")
        block = self._tables_config()
        grid = table_grid(*block.s_range)

        if law in ('gue', 'goe'):
            return {f"{law}_table.csv": tracy_widom_table(law, grid, block.order, block.workers)}
        if law == 'airy21':
            return {
                f"airy21_xi{xi:g}_table.csv": airy21_table(xi, grid, block.order, block.workers)
                for xi in block.xi_grid
            }
        return {'shock_table.csv': shock_limit_distribution(block.shock.lam, block.shock.rho, grid)}

    def fredholm_tables(self, law: str) -> Dict[str, Any]:
        self.logger.info("Building distribution tables", law=law)
        files = []
        for filename, table in self.build_tables(law).items():
            path = self.store.path_for(filename)
            table.to_csv(path)
            files.append(str(path))
            self.logger.info("Table written", law=law, path=str(path), points=len(table.grid))
        return {'command': 'fredholm-tables', 'passed': True, 'files': files}

    def report(self) -> Dict[str, Any]:
        """Aggregate every *_report.json of the output directory into summary.json"""
        reports = [self.store.read_json(path) for path in self.store.list_files('*_report.json')]
        summary = summarize_reports(reports)
        self.store.write_json(SUMMARY_FILE, summary)
        if not reports:
            self.logger.warning("No reports found", output_dir=str(self.store.base_dir))
        return {'command': 'report', **summary}
