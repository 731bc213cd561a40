"""
Unit tests for backwards paths and their geodesic properties
"""

import numpy as np
import pytest

import src.analysis.geodesics as geodesics
from src.analysis.geodesics import (
    BackwardsPath,
    PathVariant,
    build_backwards_path,
    check_path_ordering,
    check_step_domination,
    endpoint_control_statistics,
    height_history,
    localization_statistics,
    paths_coalesce,
    verify_geodesic_property,
)
from src.analysis.samples import build_shock_sample
from src.dynamics.engine import CoupledSystem, WindowPlan, plan_window, step_configuration
from src.dynamics.lattice import Configuration, ICVariant
from src.errors import ConfigError, ContaminationError, PreconditionError
from src.experiments.geodesics import restriction_holds
from tests.helpers import make_stream


def _shock_system(seed, ic, t):
    sample = build_shock_sample(seed, ic, t).evolve(t)
    return sample, sample.system


class TestBuildBackwardsPath:
    """Hand-built streams with known paths"""

    def test_no_events_gives_constant_path(self):
        """Without rings the path never moves"""
        system = CoupledSystem(make_stream((-3, 3), {}), [Configuration.empty((-3, 3))]).evolve(1.0)
        path = build_backwards_path(system, 0, 0, 1.0)

        assert path.endpoint == 0
        assert path.breakpoints == [(1.0, 0), (0.0, 0)]
        assert path.to_rows() == [{'tau': 1.0, 'x': 0}, {'tau': 0.0, 'x': 0}]

    def test_executed_ring_keeps_position(self):
        """A ring at x-1 that moved a particle into x leaves the path in place"""
        stream = make_stream((-3, 3), {-1: [0.5]})
        system = CoupledSystem(stream, [Configuration.from_sites((-3, 3), [-1])]).evolve(1.0)
        path = build_backwards_path(system, 0, 0, 1.0)

        assert path.endpoint == 0
        assert len(path.move_times) == 0

    def test_idle_ring_steps_down(self):
        """A ring at an empty x-1 on step data moves the path to the lower neighbour"""
        stream = make_stream((-3, 3), {0: [0.5]})
        system = CoupledSystem(stream, [step_configuration(0, (-3, 3))]).evolve(1.0)
        path = build_backwards_path(system, 0, 1, 1.0)

        assert list(path.move_times) == [0.5]
        assert list(path.positions) == [1, 0]
        assert path.position_at(0.75) == 1
        assert path.position_at(0.25) == 0

    def test_local_maximum_variants(self):
        """At a local maximum the rightmost path goes right and the leftmost goes left"""
        stream = make_stream((-3, 3), {-1: [0.5]})
        config = Configuration.from_sites((-3, 3), [0])
        system = CoupledSystem(stream, [config]).evolve(1.0)

        right = build_backwards_path(system, 0, 0, 1.0, PathVariant.RIGHTMOST)
        left = build_backwards_path(system, 0, 0, 1.0, PathVariant.LEFTMOST)

        assert right.endpoint == 1
        assert left.endpoint == -1

    def test_needs_event_log(self):
        """Systems replayed without the log cannot build paths"""
        system = CoupledSystem(make_stream((-2, 2), {}), [Configuration.empty((-2, 2))], record_log=False)
        system.evolve(1.0)

        with pytest.raises(PreconditionError, match="event log"):
            build_backwards_path(system, 0, 0, 1.0)

    def test_start_must_be_replayed(self):
        """Paths cannot start after the current replay time"""
        system = CoupledSystem(make_stream((-2, 2), {}), [Configuration.empty((-2, 2))]).evolve(1.0)

        with pytest.raises(PreconditionError, match="log covers"):
            build_backwards_path(system, 0, 0, 2.0)


class TestBackwardsPath:
    """Tests for BackwardsPath helpers"""

    @pytest.fixture
    def path(self):
        return BackwardsPath(
            x=3, t=10.0, variant=PathVariant.RIGHTMOST, member=0,
            move_times=np.array([8.0, 5.0, 2.0]), positions=np.array([3, 2, 1, 2]),
        )

    def test_breakpoints(self, path):
        """Breakpoints list every segment start down to time 0"""
        assert path.breakpoints == [(10.0, 3), (8.0, 2), (5.0, 1), (2.0, 2), (0.0, 2)]

    def test_restrict(self, path):
        """Restriction to t_new keeps the tail of the path"""
        restricted = path.restrict(6.0)

        assert restricted.anchor == (2, 6.0)
        assert list(restricted.positions) == [2, 1, 2]
        assert restricted.position_at(3.0) == path.position_at(3.0)

    def test_sup_deviation(self, path):
        """alpha = 0 gives the largest |x(tau)|"""
        assert path.sup_deviation(0.0) == 3.0
        assert path.sup_deviation(0.5) == pytest.approx(2.0)

    def test_position_outside_span(self, path):
        """tau outside [0, t] is rejected"""
        with pytest.raises(PreconditionError):
            path.position_at(11.0)


class TestGeodesicProperties:
    """Pathwise properties on replayed shock samples"""

    @pytest.mark.parametrize('seed', [0, 1, 2])
    def test_geodesic_property(self, shock_ic, seed):
        """The rightmost path realises the variational minimum at sampled times"""
        sample, system = _shock_system(seed, shock_ic, 20.0)
        path = build_backwards_path(system, 'eta', 0, 20.0)

        assert verify_geodesic_property(path, system, [20.0, 13.5, 7.0, 0.0], sample.plan)

    def test_height_drops_by_one_at_each_move(self, shock_ic):
        """Each move of the path goes to a neighbour one unit lower"""
        _, system = _shock_system(4, shock_ic, 15.0)
        path = build_backwards_path(system, 'eta', 2, 15.0)
        history = height_history(system, 'eta')

        for s, before, after in zip(path.move_times, path.positions[:-1], path.positions[1:]):
            assert abs(after - before) == 1
            assert history.height(after, s) == history.height(before, s) - 1

    def test_ordering(self, shock_ic):
        """Paths from x and x+1 never cross"""
        _, system = _shock_system(5, shock_ic, 20.0)

        assert check_path_ordering(system, 'eta', 0, 1, 20.0)
        assert check_path_ordering(system, 'eta', -3, 4, 20.0, PathVariant.LEFTMOST)

    def test_ordering_needs_increasing_starts(self, shock_ic):
        """x1 >= x2 is rejected"""
        _, system = _shock_system(5, shock_ic, 5.0)

        with pytest.raises(PreconditionError, match="x1 < x2"):
            check_path_ordering(system, 'eta', 1, 1, 5.0)

    def test_coalescence(self, shock_ic):
        """Neighbouring paths stay together once they meet"""
        _, system = _shock_system(6, shock_ic, 20.0)

        first = build_backwards_path(system, 'eta', 0, 20.0)
        second = build_backwards_path(system, 'eta', 1, 20.0)
        assert paths_coalesce(first, second)

    def test_restriction(self, shock_ic):
        """The path rebuilt from a point on it agrees with its restriction"""
        _, system = _shock_system(7, shock_ic, 20.0)
        path = build_backwards_path(system, 'eta', 0, 20.0)

        assert restriction_holds(system, 'eta', path, 11.0)

    def test_step_domination(self, shock_ic):
        """The h- path stays left of the step path on the same stream"""
        sample, _ = _shock_system(8, shock_ic, 20.0)
        stream = sample.stream
        system = CoupledSystem(
            stream,
            [sample.system.initial_configuration('minus'), step_configuration(0, stream.window)],
            labels=('minus', 'step'),
        ).evolve(20.0)

        for x in (-5, 0, 5):
            assert check_step_domination(system, 'minus', 'step', x, 20.0)

    def test_step_domination_precondition(self, shock_ic):
        """Members occupied on x >= 0 are rejected"""
        _, system = _shock_system(8, shock_ic, 5.0)

        with pytest.raises(PreconditionError, match="empty on x >= 0"):
            check_step_domination(system, 'eta', 'plus', 0, 5.0)

    def test_contaminated_path_raises(self, shock_ic):
        """A guard band covering the path voids the geodesic check"""
        sample, system = _shock_system(0, shock_ic, 5.0)
        path = build_backwards_path(system, 'eta', 0, 5.0)
        plan = WindowPlan(*sample.plan.window, guard_width=10_000)

        with pytest.raises(ContaminationError):
            verify_geodesic_property(path, system, [0.0], plan)


class TestLocalization:
    """Small runs of the localization and endpoint statistics"""

    def test_localization_tail_is_monotone(self):
        """Tail probabilities fall as u grows"""
        result = localization_statistics(0.0, 40.0, 12, u_grid=(0.5, 1.0, 3.0), seed_base=0)

        assert result.n_used + result.n_contaminated == 12
        assert np.all(np.diff(result.tail) <= 0)
        assert np.all((result.ci_low - 1e-12 <= result.tail) & (result.tail <= result.ci_high + 1e-12))

    def test_alpha_range(self):
        """alpha outside (-1, 1) is rejected"""
        with pytest.raises(PreconditionError, match="alpha"):
            localization_statistics(1.0, 10.0, 1)

    def test_endpoint_control_small_run(self):
        """Fraction and interval are consistent on a handful of seeds"""
        result = endpoint_control_statistics(0.25, 0.75, 40.0, 8, workers=2)

        assert result.delta == pytest.approx(0.25)
        assert result.n_used + result.n_contaminated == 8
        assert result.ci_low - 1e-12 <= result.fraction <= result.ci_high + 1e-12

    def test_plan_sets_the_guard_band(self):
        """A guard band covering the window voids every seed of both statistics"""
        plan = plan_window(10.0, 0.0, kappa=0.5, margin=5, guard_fraction=3.0)

        localized = localization_statistics(0.0, 10.0, 3, plan=plan)
        endpoints = endpoint_control_statistics(0.25, 0.75, 10.0, 3, plan=plan)

        assert (localized.n_used, localized.n_contaminated) == (0, 3)
        assert (endpoints.n_used, endpoints.n_contaminated) == (0, 3)

    def test_endpoint_control_bernoulli_data(self, monkeypatch):
        """Bernoulli data draws a fresh configuration from each seed"""
        seen = []
        build = geodesics.build_shock_sample

        def recording(seed, ic, *args, **kwargs):
            seen.append((seed, ic.variant, ic.ic_seed))
            return build(seed, ic, *args, **kwargs)

        monkeypatch.setattr(geodesics, 'build_shock_sample', recording)
        result = endpoint_control_statistics(0.25, 0.75, 20.0, 3, seed_base=7, initial_data='bernoulli')

        assert sorted(seen) == [(seed, ICVariant.BERNOULLI, seed) for seed in (7, 8, 9)]
        assert result.n_used + result.n_contaminated == 3

    def test_endpoint_control_unknown_data(self):
        with pytest.raises(ConfigError, match="'shock' or 'bernoulli'"):
            endpoint_control_statistics(0.25, 0.75, 10.0, 1, initial_data='flat')

    @pytest.mark.slow
    def test_localization_at_scale(self):
        """P(sup deviation > 3 t^(2/3)) stays below 5% at t=500"""
        result = localization_statistics(0.0, 500.0, 1000, u_grid=(3.0,), workers=4)

        assert result.tail[0] <= 0.05

    @pytest.mark.slow
    def test_endpoint_control_grows_with_t(self):
        """Endpoint control improves with t and is near 1 at t=800"""
        small = endpoint_control_statistics(0.25, 0.75, 100.0, 400, workers=4)
        large = endpoint_control_statistics(0.25, 0.75, 800.0, 400, workers=4)

        assert large.fraction >= small.fraction - 0.05
        assert large.fraction >= 0.9
