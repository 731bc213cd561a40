"""
Unit tests for second-class particle tracking and the coupling identities
"""

import numpy as np
import pytest

from src.analysis.samples import build_shock_sample, map_seeds
from src.analysis.tracker import (
    DiscrepancyTrace,
    audit_sample,
    jump_trace,
    track_second_class,
    verdict_for_seed,
    verify_distribution_identity,
    verify_height_matching,
    verify_min_property,
    verify_multiclass_projection,
    verify_shift_relation,
    verify_y_equals_x,
)
from src.dynamics.clockwork import generate_events
from src.dynamics.engine import CoupledSystem, WindowPlan
from src.dynamics.lattice import Configuration, InitialCondition, height_of
from src.errors import ContaminationError, PreconditionError
from tests.helpers import make_stream


class TestDiscrepancyTrace:
    """Tests for DiscrepancyTrace"""

    def test_piecewise_constant_lookup(self):
        """at() returns the last recorded position"""
        trace = DiscrepancyTrace(np.array([1.0, 2.0]), np.array([0, 1]), 'coupling')

        assert trace.at(1.5) == 0
        assert trace.at(2.0) == 1
        assert trace.is_nearest_neighbour()

    def test_before_start(self):
        """Times before the first entry are rejected"""
        trace = DiscrepancyTrace(np.array([1.0, 2.0]), np.array([0, 1]), 'coupling')

        with pytest.raises(PreconditionError, match="trace starts"):
            trace.at(0.5)

    def test_jump_trace_follows_single_move(self):
        """A particle at -1 jumping onto the empty origin moves the discrepancy left"""
        stream = make_stream((-3, 3), {-1: [0.5]})
        eta = Configuration.from_sites((-3, 3), [-1])
        system = CoupledSystem(stream, [eta, eta.with_site(0, 1)], track_pair=(0, 1)).evolve(1.0)
        trace = jump_trace(system)

        assert list(trace.times) == [0.0, 0.5]
        assert list(trace.positions) == [0, -1]

    def test_track_needs_pair(self):
        """Systems without a tracked pair cannot be tracked"""
        system = CoupledSystem(make_stream((-1, 1), {}), [Configuration.empty((-1, 1))])

        with pytest.raises(PreconditionError, match="no tracked discrepancy pair"):
            track_second_class(system, [0.5])


class TestShiftRelation:
    """Tests for verify_shift_relation"""

    def test_single_added_particle(self):
        """Adding a particle at 2 lowers the height by 2 right of 2 only"""
        config = Configuration.from_sites((-5, 5), [-3, 0])
        h = height_of(config)
        h_tilde = height_of(config.with_site(2, 1))

        assert verify_shift_relation(h, h_tilde, 2)
        assert not verify_shift_relation(h, h_tilde, 1)

    def test_domains_must_match(self):
        """Heights on different domains are rejected"""
        with pytest.raises(PreconditionError, match="share a domain"):
            verify_shift_relation(height_of(Configuration.empty((-2, 2))),
                                  height_of(Configuration.empty((-3, 2)), anchor_site=0), 0)


class TestCouplingIdentities:
    """The exact identities on clean replayed samples"""

    @pytest.mark.parametrize('seed', [0, 1, 2])
    def test_verdict_passes_for_shock_data(self, shock_ic, seed):
        """Every check holds on deterministic shock data"""
        verdict = verdict_for_seed(seed, shock_ic, xs=[-4, 0, 4], ts=[5.0, 15.0, 30.0])

        assert not verdict.contaminated
        assert verdict.checks and all(verdict.checks.values()), verdict.checks
        assert verdict.passed

    def test_verdict_passes_for_bernoulli_data(self):
        """Every check holds on Bernoulli shock data"""
        ic = InitialCondition.bernoulli(0.25, 0.75, ic_seed=9)
        verdict = verdict_for_seed(4, ic, xs=[-4, 0, 4], ts=[10.0, 25.0])

        assert all(verdict.checks.values()), verdict.checks
        assert verdict.to_record()['seed'] == 4

    def test_individual_checks(self, shock_ic):
        """Distribution identity, projection, height matching and min property on one sample"""
        sample = build_shock_sample(6, shock_ic, 20.0).evolve(20.0)
        pairs = [(x, t) for t in (5.0, 20.0) for x in range(-6, 7, 3)]

        assert verify_distribution_identity(sample, pairs)
        assert verify_multiclass_projection(sample, 20.0)
        assert verify_height_matching(sample, [1.0, 10.0, 20.0])
        assert verify_min_property(sample, 0, 20.0)

    def test_tracked_positions_are_sampled(self, shock_ic):
        """track_second_class agrees with the final discrepancy"""
        sample = build_shock_sample(3, shock_ic, 12.0)
        trace = track_second_class(sample.system, [4.0, 12.0])

        assert trace.at(12.0) == sample.system.discrepancy_position()

    def test_y_equals_x_on_own_stream(self, shock_ic):
        """The tagged multiclass particle retraces X2nd"""
        sample = build_shock_sample(11, shock_ic, 20.0)

        assert verify_y_equals_x(sample, 20.0)

    def test_y_equals_x_negative_control(self, shock_ic):
        """Feeding the multiclass run another stream breaks the identity"""
        sample = build_shock_sample(11, shock_ic, 20.0)
        other = generate_events(10_011, sample.plan.window, 20.0)

        assert not verify_y_equals_x(sample, 20.0, stream=other)

    def test_observation_times_must_be_ordered(self, shock_ic):
        """Pairs with decreasing times are rejected"""
        sample = build_shock_sample(0, shock_ic, 5.0)

        with pytest.raises(PreconditionError, match="non-decreasing"):
            verify_distribution_identity(sample, [(0, 5.0), (0, 1.0)])

    def test_map_seeds_keeps_order(self, shock_ic):
        """Parallel and serial runs return the same verdicts in seed order"""
        run = lambda seed: verdict_for_seed(seed, shock_ic, xs=[0], ts=[5.0]).to_record()

        assert map_seeds(run, range(4), workers=2) == map_seeds(run, range(4), workers=1)


class TestAudit:
    """Tests for the guard-band audit"""

    def test_guard_band_hit_raises(self, shock_ic):
        """A plan whose guard band covers everything voids the sample"""
        plan = WindowPlan(-40, 40, guard_width=100)
        sample = build_shock_sample(2, shock_ic, 5.0, plan=plan).evolve(5.0)

        with pytest.raises(ContaminationError) as excinfo:
            audit_sample(sample, [])
        assert excinfo.value.seed == 2

    def test_contaminated_verdict_has_no_checks(self, shock_ic, monkeypatch):
        """verdict_for_seed marks contamination instead of failing"""
        def guarded_sample(seed, ic, horizon, record_log=True):
            return build_shock_sample(seed, ic, horizon, plan=WindowPlan(-40, 40, guard_width=100),
                                      record_log=record_log)

        monkeypatch.setattr('src.analysis.tracker.build_shock_sample', guarded_sample)
        verdict = verdict_for_seed(0, shock_ic, xs=[0], ts=[5.0])

        assert verdict.contaminated
        assert verdict.checks == {}
        assert verdict.passed
