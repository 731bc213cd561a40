"""
Unit tests for the observation points around the shock
"""

import numpy as np
import pytest

from src.analysis.geodesics import BackwardsPath, PathVariant
from src.analysis.observables import (
    ObservationPoints,
    audit_points,
    fluctuation,
    height_increment,
    path_confined,
    side_path,
)
from src.analysis.samples import build_shock_sample
from src.dynamics.engine import WindowPlan
from src.dynamics.lattice import ShockParameters
from src.errors import ConfigError, ContaminationError


@pytest.fixture
def params():
    return ShockParameters(0.25, 0.75)


class TestObservationPoints:
    """Tests for ObservationPoints"""

    def test_symmetric_geometry(self, params):
        """t=1000, nu=0.8: B- and B+ sit 126 sites either side of the shock"""
        points = ObservationPoints(params, t=1000.0, tau=0.0, s=0.0, nu=0.8)

        assert points.A == (0, 1000.0)
        assert points.B('minus')[0] == -126
        assert points.B('plus')[0] == 126
        assert points.early_time == pytest.approx(1000.0 - 1000.0 ** 0.8)
        assert points.lag == pytest.approx(1000.0 ** 0.8)

    def test_shifted_point(self, params):
        """tau and s move A in time and space"""
        points = ObservationPoints(params, t=1000.0, tau=1.0, s=2.0, nu=0.8)

        assert points.late_time == pytest.approx(1100.0)
        assert points.A[0] == 20
        assert points.horizon == pytest.approx(1100.0)

    def test_drift(self, params):
        """Drift is (1 - 2 chi) times the lag when s = 0"""
        points = ObservationPoints(params, t=1000.0, tau=0.0, s=0.0, nu=0.8)

        assert points.drift('minus') == pytest.approx(0.625 * 1000.0 ** 0.8)
        assert points.drift('plus') == pytest.approx(points.drift('minus'))

    @pytest.mark.parametrize('nu', [0.5, 2.0 / 3.0, 1.0])
    def test_nu_range(self, params, nu):
        """nu must lie strictly between 2/3 and 1"""
        with pytest.raises(ConfigError, match="nu must lie"):
            ObservationPoints(params, t=1000.0, tau=0.0, s=0.0, nu=nu)

    def test_unknown_side(self, params):
        """Sides other than minus and plus are rejected"""
        points = ObservationPoints(params, t=100.0, tau=0.0, s=0.0, nu=0.8)

        with pytest.raises(ConfigError, match="side"):
            points.B('middle')


class TestPathConfined:
    """Tests for path_confined"""

    @pytest.fixture
    def path(self):
        return BackwardsPath(
            x=-3, t=10.0, variant=PathVariant.RIGHTMOST, member=0,
            move_times=np.array([5.0]), positions=np.array([-3, -2]),
        )

    def test_left_of_line(self, path):
        """A path left of the shock line is confined on the minus side"""
        assert path_confined(path, 0.0, 'minus')
        assert path_confined(path, 0.5, 'minus')
        assert not path_confined(path, 0.0, 'plus')

    def test_crossing_line_is_not_confined(self, path):
        """A path that crosses the line at its late end fails"""
        assert not path_confined(path, -0.4, 'minus')


class TestFluctuations:
    """Fluctuation fields on a replayed sample"""

    @pytest.fixture
    def sample_and_points(self, shock_ic):
        points = ObservationPoints(shock_ic.shock_parameters, t=60.0, tau=0.0, s=0.0, nu=0.8)
        sample = build_shock_sample(3, shock_ic, points.horizon).evolve(points.horizon)
        return sample, points

    def test_fluctuation_is_finite(self, sample_and_points):
        """Z at B- and B+ are finite numbers of order one"""
        sample, points = sample_and_points

        for side in ('minus', 'plus'):
            value = fluctuation(sample, points, side)
            assert np.isfinite(value)
            assert abs(value) < 20

    def test_increment_is_small_relative_to_lag(self, sample_and_points):
        """h(A) - h(B) minus drift is small against the lag"""
        sample, points = sample_and_points

        for side in ('minus', 'plus'):
            assert abs(height_increment(sample, points, side)) < points.lag

    def test_side_path_starts_at_b(self, sample_and_points):
        """side_path starts from B on the right member and variant"""
        sample, points = sample_and_points
        path = side_path(sample, points, 'plus')

        assert path.anchor == points.B('plus')
        assert path.variant == PathVariant.LEFTMOST

    def test_audit_raises_in_guard_band(self, shock_ic):
        """Paths from B hitting the guard band void the sample"""
        points = ObservationPoints(shock_ic.shock_parameters, t=30.0, tau=0.0, s=0.0, nu=0.8)
        plan = WindowPlan(-150, 150, guard_width=1000)
        sample = build_shock_sample(1, shock_ic, points.horizon, plan=plan).evolve(points.horizon)

        with pytest.raises(ContaminationError):
            audit_points(sample, points)
