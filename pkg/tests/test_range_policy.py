import numpy as np
import pytest

import rangesim as rs
from rangesim.dynamics import ControlInput, bounded_control
from rangesim.graph import incoming_neighbors, outgoing_neighbors
from rangesim.range_policy import (
    REASON_COMPLETE,
    REASON_FIXED,
    REASON_IDLE,
    REASON_PRESERVE,
    RangeDecision,
    RangePolicy,
    fixed_range,
    intermittent_range,
    modified_range,
    preserving_range,
)

GAMMA = 1.0
T = 0.1


def _control(i, positions, radii):
    return bounded_control(i, positions, incoming_neighbors(positions, radii, i), GAMMA)


class TestPolicyValidation:
    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown policy kind"):
            RangePolicy(kind="adaptive")

    def test_delta_requires_fixed(self):
        with pytest.raises(ValueError):
            RangePolicy(kind="modified", fixed_delta=1.0)

    def test_delta_must_be_positive(self):
        with pytest.raises(ValueError):
            RangePolicy(kind="fixed", fixed_delta=0.0)

    def test_schedule_requires_intermittent(self):
        with pytest.raises(ValueError):
            RangePolicy(kind="preserving", schedule=2)

    def test_period_at_least_one(self):
        with pytest.raises(ValueError):
            RangePolicy(kind="intermittent", schedule=0)
        with pytest.raises(ValueError):
            RangePolicy(kind="intermittent", schedule=((0, 0), (1, 0)))

    def test_schedule_resolution(self):
        policy = RangePolicy(kind="intermittent", schedule=3)
        assert policy.resolve_schedule(2) == ((3, 0), (3, 0))
        policy = RangePolicy(kind="intermittent")
        assert policy.resolve_schedule(2) == ((1, 0), (1, 0))
        policy = RangePolicy(kind="intermittent", schedule=((2, 1), (3, 0)))
        assert policy.resolve_schedule(2) == ((2, 1), (3, 0))
        with pytest.raises(ValueError):
            policy.resolve_schedule(3)

    def test_negative_decision_radius_rejected(self):
        with pytest.raises(ValueError):
            RangeDecision(radius=-0.1, reason=REASON_FIXED)


class TestPreservingRange:
    def test_benchmark_agent0(self, four_positions, four_radii):
        u0 = _control(0, four_positions, four_radii)
        out = outgoing_neighbors(four_positions, four_radii, 0)
        decision = preserving_range(0, four_positions, out, u0, GAMMA, T)
        # farthest covered agent is 3.397... away; motion budget adds 0.2
        assert decision.radius == pytest.approx(3.5970575502926057, abs=1e-15)
        assert decision.reason == REASON_PRESERVE

    def test_coincident_team_floor(self):
        # everyone coincident with zero control: the radius floors at gamma*T
        positions = np.array([[1.0, 1.0]] * 3)
        u = ControlInput(vector=np.zeros(2), saturated=False)
        decision = preserving_range(0, positions, {1, 2}, u, GAMMA, T)
        assert decision.radius == GAMMA * T

    def test_empty_outgoing_idles(self, four_positions):
        u = ControlInput(vector=np.zeros(2), saturated=False)
        decision = preserving_range(0, four_positions, set(), u, GAMMA, T)
        assert decision.radius == 0.0
        assert decision.reason == REASON_IDLE

    def test_idle_beacon_radius(self, four_positions):
        u = ControlInput(vector=np.zeros(2), saturated=False)
        decision = preserving_range(
            0, four_positions, set(), u, GAMMA, T, idle_beacon_radius=0.75
        )
        assert decision.radius == 0.75


class TestModifiedRange:
    def test_branch_matches_preserving_when_not_covering_all(
        self, four_positions, four_radii
    ):
        u0 = _control(0, four_positions, four_radii)
        out = outgoing_neighbors(four_positions, four_radii, 0)
        assert out | {0} != set(range(4))
        a = modified_range(0, four_positions, out, u0, GAMMA, T, n_agents=4)
        b = preserving_range(0, four_positions, out, u0, GAMMA, T)
        assert a.radius == b.radius
        assert a.reason == REASON_PRESERVE

    def test_complete_coverage_doubles_max_distance(self):
        positions = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]])
        u = ControlInput(vector=np.zeros(2), saturated=False)
        decision = modified_range(0, positions, {1, 2}, u, GAMMA, T, n_agents=3)
        assert decision.radius == 4.0
        assert decision.reason == REASON_COMPLETE

    def test_all_coincident_complete_is_zero(self):
        positions = np.array([[5.0, 5.0]] * 4)
        u = ControlInput(vector=np.zeros(2), saturated=False)
        decision = modified_range(0, positions, {1, 2, 3}, u, GAMMA, T, n_agents=4)
        assert decision.radius == 0.0
        assert decision.reason == REASON_COMPLETE

    def test_single_agent_zero(self):
        decision = modified_range(
            0,
            np.array([[1.0, 1.0]]),
            set(),
            ControlInput(vector=np.zeros(2), saturated=False),
            GAMMA,
            T,
            n_agents=1,
        )
        assert decision.radius == 0.0


class TestIntermittentRange:
    def test_gap_one_equals_preserving_bitwise(self, four_positions, four_radii):
        u0 = _control(0, four_positions, four_radii)
        out = outgoing_neighbors(four_positions, four_radii, 0)
        a = intermittent_range(0, four_positions, out, u0, GAMMA, T, steps_until_next=1)
        b = preserving_range(0, four_positions, out, u0, GAMMA, T)
        assert a.radius == b.radius
        assert a.reason == b.reason

    def test_gap_three_benchmark(self, four_positions, four_radii):
        u0 = _control(0, four_positions, four_radii)
        out = outgoing_neighbors(four_positions, four_radii, 0)
        decision = intermittent_range(
            0, four_positions, out, u0, GAMMA, T, steps_until_next=3
        )
        assert decision.radius == pytest.approx(3.9970575502926056, abs=1e-15)

    def test_empty_outgoing(self, four_positions):
        u = ControlInput(vector=np.zeros(2), saturated=False)
        decision = intermittent_range(
            0, four_positions, set(), u, GAMMA, T, steps_until_next=5
        )
        assert decision.radius == 0.0
        assert decision.reason == REASON_IDLE

    def test_gap_must_be_positive(self, four_positions):
        u = ControlInput(vector=np.zeros(2), saturated=False)
        with pytest.raises(ValueError):
            intermittent_range(0, four_positions, {1}, u, GAMMA, T, steps_until_next=0)


class TestFixedRange:
    def test_common_delta(self):
        policy = RangePolicy(kind="fixed", fixed_delta=3.5)
        assert fixed_range(policy).radius == 3.5
        assert fixed_range(policy).reason == REASON_FIXED

    def test_per_agent_initial_radius(self):
        policy = RangePolicy(kind="fixed")
        assert fixed_range(policy, initial_radius=1.4).radius == 1.4

    def test_per_agent_requires_initial_radius(self):
        with pytest.raises(ValueError):
            fixed_range(RangePolicy(kind="fixed"))

    def test_wrong_kind_rejected(self):
        with pytest.raises(ValueError):
            fixed_range(RangePolicy(kind="modified"))


class TestPolicyRunProperties:
    def test_preserving_radius_covers_next_step_distances(self, bench_scenario):
        trace = rs.run(bench_scenario.with_policy(RangePolicy(kind="preserving")))
        for k in range(trace.steps_executed):
            for i in range(bench_scenario.n_agents):
                for j in trace.topologies[k].outgoing_of(i):
                    d_next = float(
                        np.hypot(*(trace.positions[k + 1, i] - trace.positions[k + 1, j]))
                    )
                    assert d_next <= trace.radii[k + 1, i] + 1e-9

    def test_edge_monotonicity_small_batch(self):
        for seed in range(8):
            scenario = rs.generate_scenario(3 + seed % 4, seed)
            for kind in ("preserving", "modified"):
                trace = rs.run(scenario.with_policy(RangePolicy(kind=kind)))
                for k in range(trace.steps_executed - 1):
                    assert trace.topologies[k].edges <= trace.topologies[k + 1].edges

    def test_modified_complete_phase_radii_shrink_to_zero(self, bench_trace):
        reasons = bench_trace.decision_reasons
        complete = [
            k for k, rr in enumerate(reasons) if all(r == REASON_COMPLETE for r in rr)
        ]
        assert complete, "run never reached the all-covering phase"
        k0 = complete[0]
        # once every agent covers the team, the branch never flips back
        for k in range(k0, len(reasons)):
            assert all(r == REASON_COMPLETE for r in reasons[k])
        tail = bench_trace.radii[k0 + 1 :]
        assert np.all(np.diff(tail, axis=0) <= 1e-12)
        assert np.all(bench_trace.radii[-1] < 1e-3)

    def test_intermittent_gap1_trace_equals_preserving(self, bench_scenario):
        a = rs.run(bench_scenario.with_policy(RangePolicy(kind="preserving")))
        b = rs.run(bench_scenario.with_policy(RangePolicy(kind="intermittent", schedule=1)))
        assert a.steps_executed == b.steps_executed
        assert np.array_equal(a.positions, b.positions)
        assert np.array_equal(a.radii, b.radii)
        assert np.array_equal(a.controls, b.controls)
        assert np.array_equal(a.step_energies, b.step_energies)

    def test_intermittent_broadcast_time_preservation(self, bench_scenario):
        # with a gap of 3, the coverage present at one broadcast still holds
        # at the next broadcast of the same agent
        period = 3
        trace = rs.run(
            bench_scenario.with_policy(RangePolicy(kind="intermittent", schedule=period))
        )
        n = bench_scenario.n_agents
        broadcasts = range(0, trace.steps_executed - period, period)
        for k in broadcasts:
            for i in range(n):
                for j in trace.topologies[k].outgoing_of(i):
                    assert (i, j) in trace.topologies[k + period].edges
