"""
Estimators with confidence intervals and the StatReport written by every experiment
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence

import numpy as np
from scipy import stats

STATUSES = ('passed', 'failed', 'contaminated', 'vacuous')


@dataclass
class Estimate:
    """Point estimate with a confidence interval and the sample size behind it"""

    value: float
    ci_low: float
    ci_high: float
    n: int

    def contains(self, target: float) -> bool:
        return self.ci_low <= target <= self.ci_high


def _empty(n: int = 0) -> Estimate:
    return Estimate(float('nan'), float('nan'), float('nan'), n)


def mean_estimate(values: Sequence[float], confidence: float = 0.95) -> Estimate:
    """Sample mean with a Student-t interval"""
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        return _empty(len(x)) if len(x) == 0 else Estimate(float(x[0]), float('nan'), float('nan'), 1)
    mean = float(np.mean(x))
    sem = float(stats.sem(x))
    if sem == 0.0:
        return Estimate(mean, mean, mean, len(x))
    low, high = stats.t.interval(confidence, len(x) - 1, loc=mean, scale=sem)
    return Estimate(mean, float(low), float(high), len(x))


def variance_estimate(values: Sequence[float], confidence: float = 0.95) -> Estimate:
    """Unbiased sample variance with the chi-square interval"""
    x = np.asarray(values, dtype=float)
    if len(x) < 2:
        return _empty(len(x))
    var = float(np.var(x, ddof=1))
    dof = len(x) - 1
    alpha = 1.0 - confidence
    low = dof * var / stats.chi2.ppf(1.0 - alpha / 2.0, dof)
    high = dof * var / stats.chi2.ppf(alpha / 2.0, dof)
    return Estimate(var, float(low), float(high), len(x))


def proportion_estimate(successes: int, trials: int, confidence: float = 0.95) -> Estimate:
    """Binomial proportion with the Wilson interval"""
    if trials == 0:
        return _empty()
    ci = stats.binomtest(successes, trials).proportion_ci(confidence_level=confidence, method='wilson')
    return Estimate(successes / trials, float(ci.low), float(ci.high), trials)


def median_estimate(values: Sequence[float], confidence: float = 0.95) -> Estimate:
    """Sample median with the distribution-free order-statistic interval"""
    x = np.sort(np.asarray(values, dtype=float))
    n = len(x)
    if n == 0:
        return _empty()
    low_rank, high_rank = stats.binom.interval(confidence, n, 0.5)
    low = x[max(int(low_rank) - 1, 0)]
    high = x[min(int(high_rank), n - 1)]
    return Estimate(float(np.median(x)), float(low), float(high), n)


def ks_distance(values: Sequence[float], cdf: Callable[[np.ndarray], np.ndarray]) -> Dict[str, float]:
    """One-sample Kolmogorov-Smirnov distance and p-value against a vectorized CDF"""
    x = np.asarray(values, dtype=float)
    if len(x) == 0:
        return {'statistic': float('nan'), 'pvalue': float('nan'), 'n': 0}
    result = stats.kstest(x, cdf)
    return {'statistic': float(result.statistic), 'pvalue': float(result.pvalue), 'n': len(x)}


def empirical_cdf(values: Sequence[float], grid: Sequence[float]) -> np.ndarray:
    x = np.sort(np.asarray(values, dtype=float))
    return np.searchsorted(x, np.asarray(grid, dtype=float), side='right') / max(len(x), 1)


def power_law_fit(xs: Sequence[float], ys: Sequence[float], confidence: float = 0.95) -> Estimate:
    """Slope of log y against log x with a t interval on the regression slope"""
    lx, ly = np.log(np.asarray(xs, dtype=float)), np.log(np.asarray(ys, dtype=float))
    if len(lx) < 2:
        return _empty(len(lx))
    fit = stats.linregress(lx, ly)
    if len(lx) == 2:
        return Estimate(float(fit.slope), float('nan'), float('nan'), 2)
    half = stats.t.ppf(0.5 + confidence / 2.0, len(lx) - 2) * fit.stderr
    return Estimate(float(fit.slope), float(fit.slope - half), float(fit.slope + half), len(lx))


def correlation_estimate(x: Sequence[float], y: Sequence[float], band_width: float = 3.0) -> Estimate:
    """Pearson correlation with the null band +-band_width / sqrt(n)"""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    n = len(x)
    if n < 3:
        return _empty(n)
    r = float(stats.pearsonr(x, y)[0])
    band = band_width / np.sqrt(n)
    return Estimate(r, -band, band, n)


def is_decreasing(values: Sequence[float], slack: float = 0.0) -> bool:
    v = np.asarray(values, dtype=float)
    return bool(np.all(np.diff(v) <= slack))


@dataclass
class StatReport:
    """Machine-readable outcome of one experiment"""

    experiment: str
    checks: Dict[str, bool] = field(default_factory=dict)
    estimates: Dict[str, Estimate] = field(default_factory=dict)
    ks: Dict[str, Dict[str, float]] = field(default_factory=dict)
    contamination: Dict[str, float] = field(default_factory=lambda: {'count': 0, 'rate': 0.0})
    thresholds: Dict[str, float] = field(default_factory=dict)
    runtime: Dict[str, float] = field(default_factory=dict)
    config: Dict[str, Any] = field(default_factory=dict)
    status: Optional[str] = None

    def record_contamination(self, count: int, total: int) -> None:
        self.contamination = {'count': int(count), 'rate': count / total if total else 0.0}

    def finalize(self, n_samples: int, max_contamination: Optional[float] = None) -> 'StatReport':
        """Derive the status from checks, sample count and contamination rate"""
        if n_samples == 0:
            self.status = 'vacuous'
        elif max_contamination is not None and self.contamination['rate'] > max_contamination:
            self.status = 'contaminated'
        else:
            self.status = 'passed' if all(self.checks.values()) else 'failed'
        return self

    @property
    def passed(self) -> bool:
        return self.status in ('passed', 'vacuous')

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['passed'] = self.passed
        return data


def summarize_reports(reports: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """Aggregate report dictionaries into a summary keyed by experiment"""
    by_name = {r['experiment']: {'status': r.get('status'), 'passed': bool(r.get('passed'))} for r in reports}
    return {
        'experiments': dict(sorted(by_name.items())),
        'passed': all(v['passed'] for v in by_name.values()),
        'count': len(by_name),
    }
