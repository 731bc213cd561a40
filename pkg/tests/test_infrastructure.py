"""
Unit tests for configuration, statistics, output storage and monitoring
"""

import json
import logging
from pathlib import Path

import numpy as np
import pytest

from src.errors import ConfigError
from src.infrastructure.config import load_config, parse_config
from src.infrastructure.statistics import (
    Estimate,
    StatReport,
    correlation_estimate,
    empirical_cdf,
    is_decreasing,
    ks_distance,
    mean_estimate,
    median_estimate,
    power_law_fit,
    proportion_estimate,
    summarize_reports,
    variance_estimate,
)
from src.infrastructure.storage import OutputStore
from src.monitoring.logger import StructuredLogger, set_log_level
from src.monitoring.performance_monitor import PerformanceMonitor

SHIPPED_CONFIG = Path(__file__).resolve().parents[1] / 'config' / 'experiment_config.yaml'


class TestConfig:
    """Tests for load_config and parse_config"""

    def test_shipped_config_loads(self):
        """The repository configuration validates and names every block"""
        config = load_config(SHIPPED_CONFIG)

        assert {'identity', 'step_law', 'geodesics', 'scaling', 'limit_law', 'fredholm_tables'} <= set(config.experiments)
        assert config.experiment('identity').name == 'identity'
        assert config.experiment('step_law').ctmc_runs == 100000

    def test_missing_file(self, tmp_path):
        """A missing file is a configuration error"""
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / 'absent.yaml')

    def test_malformed_yaml(self, tmp_path):
        """Broken YAML is reported as such"""
        path = tmp_path / 'broken.yaml'
        path.write_text("experiments: [\n")

        with pytest.raises(ConfigError, match="malformed"):
            load_config(path)

    def test_root_must_be_mapping(self, tmp_path):
        """A YAML list at the root is rejected"""
        path = tmp_path / 'list.yaml'
        path.write_text("- 1\n- 2\n")

        with pytest.raises(ConfigError, match="mapping"):
            load_config(path)

    def test_empty_file_gives_defaults(self, tmp_path):
        """An empty file is an empty run configuration"""
        path = tmp_path / 'empty.yaml'
        path.write_text("")

        config = load_config(path)
        assert config.experiments == {}
        assert config.output_dir == 'output'

    def test_unknown_keys_rejected(self):
        """Typos in a block fail validation"""
        with pytest.raises(ConfigError, match="invalid configuration"):
            parse_config({'experiments': {'identity': {'n_sample': 10}}})

    def test_t_grid_sorted(self):
        """t_grid comes back in increasing order"""
        config = parse_config({'experiments': {'scaling': {'t_grid': [500, 100, 250]}}})

        assert config.experiment('scaling').t_grid == [100.0, 250.0, 500.0]

    @pytest.mark.parametrize('block', [
        {'t_grid': [0, 10]},
        {'t_grid': []},
        {'shock': {'lam': 0.75, 'rho': 0.25}},
        {'nu': 0.5},
        {'alpha': 1.0},
        {'n_samples': -1},
        {'s_range': [1.0, -1.0, 0.1]},
    ])
    def test_invalid_blocks(self, block):
        """Out-of-range parameters fail validation"""
        with pytest.raises(ConfigError):
            parse_config({'experiments': {'x': block}})

    def test_empty_block_takes_defaults(self):
        """A bare key is a block of defaults"""
        block = parse_config({'experiments': {'identity': None}}).experiment('identity')

        assert block.name == 'identity'
        assert block.shock.lam == 0.25 and block.shock.rho == 0.75
        assert block.enabled

    def test_missing_block_and_threshold(self):
        """Looking up absent blocks or thresholds raises ConfigError"""
        config = parse_config({'experiments': {'identity': {}}})

        with pytest.raises(ConfigError, match="no experiment block"):
            config.experiment('scaling')
        with pytest.raises(ConfigError, match="no threshold"):
            config.experiment('identity').threshold('ks_max')

    def test_output_dir_override(self, monkeypatch):
        """The environment variable wins over the file"""
        config = parse_config({'output_dir': 'from_file'})

        monkeypatch.delenv('SHOCK_TASEP_OUTPUT_DIR', raising=False)
        assert config.resolved_output_dir() == Path('from_file')
        monkeypatch.setenv('SHOCK_TASEP_OUTPUT_DIR', '/tmp/elsewhere')
        assert config.resolved_output_dir() == Path('/tmp/elsewhere')


class TestEstimators:
    """Tests for the estimators with confidence intervals"""

    def test_mean(self):
        estimate = mean_estimate([1.0, 2.0, 3.0, 4.0])

        assert estimate.value == pytest.approx(2.5)
        assert estimate.ci_low < 2.5 < estimate.ci_high
        assert estimate.n == 4

    def test_mean_of_constant(self):
        """Zero spread gives a degenerate interval"""
        estimate = mean_estimate([2.0, 2.0, 2.0])

        assert (estimate.ci_low, estimate.ci_high) == (2.0, 2.0)

    def test_empty_inputs(self):
        """Empty samples give NaN estimates with n = 0"""
        for estimate in (mean_estimate([]), variance_estimate([]), proportion_estimate(0, 0), median_estimate([])):
            assert np.isnan(estimate.value)
            assert estimate.n == 0

    def test_variance(self):
        estimate = variance_estimate([1.0, 2.0, 3.0, 4.0])

        assert estimate.value == pytest.approx(5.0 / 3.0)
        assert estimate.ci_low < estimate.value < estimate.ci_high

    def test_wilson_interval(self):
        """Wilson interval is symmetric at p = 1/2 and stays inside [0, 1]"""
        half = proportion_estimate(50, 100)
        zero = proportion_estimate(0, 20)

        assert half.value == 0.5
        assert 0.5 - half.ci_low == pytest.approx(half.ci_high - 0.5)
        assert zero.ci_low == pytest.approx(0.0, abs=1e-12)
        assert 0.0 < zero.ci_high < 0.2

    def test_median(self):
        estimate = median_estimate(list(range(1, 10)))

        assert estimate.value == 5.0
        assert estimate.ci_low <= 5.0 <= estimate.ci_high

    def test_power_law_fit(self):
        """Exact power laws recover their exponent"""
        xs = np.array([100.0, 200.0, 400.0, 800.0])

        estimate = power_law_fit(xs, 3.0 * xs ** (2.0 / 3.0))
        assert estimate.value == pytest.approx(2.0 / 3.0)

    def test_correlation_band(self):
        """The null band is +-3/sqrt(n)"""
        rng = np.random.default_rng(0)
        x = rng.normal(size=400)

        estimate = correlation_estimate(x, x + 0.1 * rng.normal(size=400))
        assert estimate.value > 0.9
        assert estimate.ci_high == pytest.approx(3.0 / 20.0)
        assert estimate.ci_low == pytest.approx(-3.0 / 20.0)

    def test_ks_distance(self):
        """A uniform sample is close to the uniform CDF"""
        values = (np.arange(200) + 0.5) / 200

        result = ks_distance(values, lambda s: np.clip(s, 0.0, 1.0))
        assert result['statistic'] == pytest.approx(0.0025)
        assert result['n'] == 200
        assert ks_distance([], lambda s: s)['n'] == 0

    def test_empirical_cdf(self):
        assert list(empirical_cdf([1.0, 2.0, 3.0], [0.0, 1.5, 3.0])) == pytest.approx([0.0, 1.0 / 3.0, 1.0])

    def test_is_decreasing(self):
        assert is_decreasing([3.0, 2.0, 2.0, 1.0])
        assert not is_decreasing([1.0, 2.0])
        assert is_decreasing([1.0, 1.01], slack=0.02)


class TestStatReport:
    """Tests for StatReport status derivation and summaries"""

    def test_vacuous(self):
        """No samples is vacuous and counts as passed"""
        report = StatReport('x', checks={'a': False}).finalize(0)

        assert report.status == 'vacuous'
        assert report.passed

    def test_passed_and_failed(self):
        assert StatReport('x', checks={'a': True, 'b': True}).finalize(10).status == 'passed'
        assert StatReport('x', checks={'a': True, 'b': False}).finalize(10).status == 'failed'

    def test_contaminated(self):
        """A contamination rate above the limit voids the run"""
        report = StatReport('x', checks={'a': True})
        report.record_contamination(3, 10)
        report.finalize(10, max_contamination=0.1)

        assert report.contamination == {'count': 3, 'rate': 0.3}
        assert report.status == 'contaminated'
        assert not report.passed

    def test_to_dict(self):
        """Estimates serialize as plain dictionaries"""
        report = StatReport('x', estimates={'m': Estimate(1.0, 0.5, 1.5, 8)}).finalize(8)
        data = report.to_dict()

        assert data['estimates']['m'] == {'value': 1.0, 'ci_low': 0.5, 'ci_high': 1.5, 'n': 8}
        assert data['passed'] is True
        assert json.loads(json.dumps(data)) == data

    def test_summarize_reports(self):
        summary = summarize_reports([
            {'experiment': 'b', 'status': 'failed', 'passed': False},
            {'experiment': 'a', 'status': 'passed', 'passed': True},
        ])

        assert list(summary['experiments']) == ['a', 'b']
        assert summary['count'] == 2
        assert not summary['passed']
        assert summarize_reports([]) == {'experiments': {}, 'passed': True, 'count': 0}


class TestOutputStore:
    """Tests for OutputStore"""

    def test_json_with_numpy_values(self, tmp_path):
        store = OutputStore(tmp_path / 'out')
        path = store.write_json('r.json', {'n': np.int64(3), 'x': np.float64(0.5), 'v': np.arange(3)})

        assert store.read_json(path) == {'n': 3, 'x': 0.5, 'v': [0, 1, 2]}

    def test_jsonl_keeps_order(self, tmp_path):
        store = OutputStore(tmp_path)
        store.write_jsonl('v.jsonl', ({'seed': s} for s in (2, 0, 1)))

        assert [r['seed'] for r in store.read_jsonl('v.jsonl')] == [2, 0, 1]

    def test_csv_metadata_precedes_header(self, tmp_path):
        store = OutputStore(tmp_path)
        path = store.write_csv('t.csv', ['t', 'v'], [[1, 2.5]], {'rho': 0.75, 'lam': 0.25})

        assert path.read_text().splitlines() == ['# lam: 0.25', '# rho: 0.75', 't,v', '1,2.5']

    def test_list_files(self, tmp_path):
        store = OutputStore(tmp_path / 'not_yet')
        assert store.list_files('*.json') == []

        store.write_json('b_report.json', {})
        store.write_json('a_report.json', {})
        store.write_json('summary.json', {})
        assert [p.name for p in store.list_files('*_report.json')] == ['a_report.json', 'b_report.json']


class TestMonitoring:
    """Tests for the structured logger and the performance monitor"""

    def test_log_lines_are_json(self, capsys, monkeypatch):
        monkeypatch.delenv('LOG_LEVEL', raising=False)
        logger = StructuredLogger(name='tests.json_lines', use_cloud_logging=False)

        logger.check_failed('restriction', seed=7, t=20.0)
        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])

        assert record['event'] == 'check_failed'
        assert record['seed'] == 7
        assert record['level'] == 'WARNING'

    def test_set_log_level(self):
        StructuredLogger(name='tests.levels', use_cloud_logging=False)
        try:
            set_log_level('debug')
            assert logging.getLogger('tests.levels').level == logging.DEBUG
        finally:
            set_log_level('INFO')
        assert logging.getLogger('tests.levels').level == logging.INFO

    def test_track_operation(self):
        monitor = PerformanceMonitor()

        with monitor.track_operation('replay'):
            pass
        with pytest.raises(ValueError):
            with monitor.track_operation('replay'):
                raise ValueError("boom")

        metrics = monitor.get_metrics('replay')
        assert metrics['count'] == 2
        assert metrics['errors'] == 1
        assert monitor.get_metrics('absent') == {}
        assert monitor.peak_rss_mb() > 0
