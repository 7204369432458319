import numpy as np
import pytest

from rangesim.graph import (
    TopologySnapshot,
    has_directed_spanning_tree,
    incoming_neighbors,
    outgoing_neighbors,
    snapshot,
    update_matrix,
)
from rangesim.oracle import reachable_set

from conftest import FOUR_EDGES


def edges_via_outgoing(positions, radii):
    n = len(radii)
    return {(i, j) for i in range(n) for j in outgoing_neighbors(positions, radii, i)}


def edges_via_incoming(positions, radii):
    n = len(radii)
    return {(j, i) for i in range(n) for j in incoming_neighbors(positions, radii, i)}


class TestNeighborSets:
    def test_outgoing_benchmark_agent0(self, four_positions, four_radii):
        assert outgoing_neighbors(four_positions, four_radii, 0) == {1, 3}

    def test_incoming_benchmark_agent0(self, four_positions, four_radii):
        # only agent 1's radius (2.5) covers the 1.342 m gap to agent 0
        assert incoming_neighbors(four_positions, four_radii, 0) == {1}

    def test_zero_radii_distinct_positions(self):
        positions = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        radii = np.zeros(3)
        for i in range(3):
            assert outgoing_neighbors(positions, radii, i) == set()

    def test_zero_radius_coincident_positions(self):
        # closed ball: zero distance is inside a zero radius
        positions = np.array([[1.0, 1.0], [1.0, 1.0]])
        radii = np.zeros(2)
        assert outgoing_neighbors(positions, radii, 0) == {1}

    def test_single_agent(self):
        assert outgoing_neighbors(np.zeros((1, 2)), np.zeros(1), 0) == set()
        assert incoming_neighbors(np.zeros((1, 2)), np.zeros(1), 0) == set()

    def test_asymmetric_pair(self):
        # one disk covers the other agent but not vice versa
        positions = np.array([[0.0, 0.0], [1.0, 0.0]])
        radii = np.array([2.0, 0.5])
        assert incoming_neighbors(positions, radii, 0) == set()
        assert incoming_neighbors(positions, radii, 1) == {0}
        assert outgoing_neighbors(positions, radii, 0) == {1}
        assert outgoing_neighbors(positions, radii, 1) == set()

    def test_large_radii_complete(self):
        rng = np.random.default_rng(0)
        positions = rng.uniform(0, 5, (5, 2))
        radii = np.full(5, 100.0)
        for i in range(5):
            assert incoming_neighbors(positions, radii, i) == set(range(5)) - {i}

    def test_index_out_of_range(self, four_positions, four_radii):
        with pytest.raises(IndexError):
            outgoing_neighbors(four_positions, four_radii, 4)
        with pytest.raises(IndexError):
            incoming_neighbors(four_positions, four_radii, -1)

    def test_mismatched_lengths(self, four_positions):
        with pytest.raises(ValueError):
            outgoing_neighbors(four_positions, np.zeros(3), 0)


class TestSnapshot:
    def test_benchmark_edges(self, four_positions, four_radii):
        topo = snapshot(four_positions, four_radii)
        assert topo.edges == FOUR_EDGES

    def test_coincident_zero_radius_pair(self):
        topo = snapshot(np.array([[2.0, 3.0], [2.0, 3.0]]), np.zeros(2))
        assert topo.edges == {(0, 1), (1, 0)}

    def test_zero_radii_distinct(self):
        topo = snapshot(np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), np.zeros(3))
        assert topo.edges == frozenset()

    def test_rejects_self_loops_and_bad_endpoints(self):
        with pytest.raises(ValueError):
            TopologySnapshot(n_agents=2, edges=frozenset({(0, 0)}))
        with pytest.raises(ValueError):
            TopologySnapshot(n_agents=2, edges=frozenset({(0, 2)}))

    def test_outgoing_and_incoming_views_agree(self, four_positions, four_radii):
        topo = snapshot(four_positions, four_radii)
        assert topo.outgoing_of(0) == outgoing_neighbors(four_positions, four_radii, 0)
        assert topo.incoming_of(0) == incoming_neighbors(four_positions, four_radii, 0)


class TestEdgeSetEquivalence:
    """The outgoing-rule and incoming-rule edge sets are always the same set."""

    def test_random_draws(self):
        rng = np.random.default_rng(1234)
        for trial in range(200):
            n = 2 + trial % 7
            positions = rng.uniform(0, 10, (n, 2))
            radii = rng.uniform(0, 5, n)
            assert edges_via_outgoing(positions, radii) == edges_via_incoming(
                positions, radii
            )

    def test_boundary_distance(self):
        # agent 1 exactly on agent 0's boundary: edge present in both views
        positions = np.array([[0.0, 0.0], [2.0, 0.0]])
        radii = np.array([2.0, 1.0])
        assert edges_via_outgoing(positions, radii) == edges_via_incoming(positions, radii)
        assert (0, 1) in edges_via_outgoing(positions, radii)


def brute_force_spanning_tree(topo: TopologySnapshot) -> bool:
    return any(
        reachable_set(topo, root) == set(range(topo.n_agents))
        for root in range(topo.n_agents)
    )


class TestSpanningTree:
    def test_benchmark_topology(self, four_positions, four_radii):
        assert has_directed_spanning_tree(snapshot(four_positions, four_radii))

    def test_complete_graphs(self):
        for n in range(1, 6):
            edges = frozenset((i, j) for i in range(n) for j in range(n) if i != j)
            assert has_directed_spanning_tree(TopologySnapshot(n, edges))

    def test_two_disjoint_pairs(self):
        topo = TopologySnapshot(4, frozenset({(0, 1), (2, 3)}))
        assert not has_directed_spanning_tree(topo)

    def test_exhaustive_small_digraphs(self):
        for n in range(1, 4):
            pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
            for bits in range(2 ** len(pairs)):
                edges = frozenset(p for idx, p in enumerate(pairs) if bits >> idx & 1)
                topo = TopologySnapshot(n, edges)
                assert has_directed_spanning_tree(topo) == brute_force_spanning_tree(topo)

    def test_sampled_five_agent_digraphs(self):
        rng = np.random.default_rng(99)
        pairs = [(i, j) for i in range(5) for j in range(5) if i != j]
        for _ in range(300):
            mask = rng.random(len(pairs)) < rng.uniform(0.05, 0.5)
            topo = TopologySnapshot(5, frozenset(p for p, m in zip(pairs, mask) if m))
            assert has_directed_spanning_tree(topo) == brute_force_spanning_tree(topo)


class TestUpdateMatrix:
    def test_empty_edges_identity(self):
        topo = TopologySnapshot(3, frozenset())
        assert np.array_equal(update_matrix(topo, 0.2), np.eye(3))

    def test_two_agent_complete_exact(self):
        topo = TopologySnapshot(2, frozenset({(0, 1), (1, 0)}))
        w = update_matrix(topo, 0.1)
        assert np.array_equal(w, np.array([[0.9, 0.1], [0.1, 0.9]]))

    def test_four_agent_complete(self):
        edges = frozenset((i, j) for i in range(4) for j in range(4) if i != j)
        w = update_matrix(TopologySnapshot(4, edges), 0.1)
        assert np.allclose(np.diag(w), 0.7, atol=1e-12)
        off = w[~np.eye(4, dtype=bool)]
        assert np.allclose(off, 0.1, atol=1e-12)

    def test_rows_sum_to_one_and_nonnegative(self):
        rng = np.random.default_rng(7)
        for _ in range(100):
            n = int(rng.integers(1, 8))
            pairs = [(i, j) for i in range(n) for j in range(n) if i != j]
            mask = rng.random(len(pairs)) < 0.4
            topo = TopologySnapshot(n, frozenset(p for p, m in zip(pairs, mask) if m))
            T = float(rng.uniform(0.01, 0.99)) / n
            w = update_matrix(topo, T)
            assert np.all(np.abs(w.sum(axis=1) - 1.0) < 1e-12)
            assert np.all(w >= 0)
            if T * n < 1:
                assert np.all(np.diag(w) > 0)

    def test_oversized_period_rejected(self):
        topo = TopologySnapshot(2, frozenset({(0, 1), (1, 0)}))
        with pytest.raises(ValueError, match="T < 1/N"):
            update_matrix(topo, 1.0)

    def test_nonpositive_period_rejected(self):
        with pytest.raises(ValueError):
            update_matrix(TopologySnapshot(2, frozenset()), 0.0)


def test_snapshot_matches_per_agent_rules():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(1, 7))
        positions = rng.uniform(-3, 3, (n, 2))
        radii = rng.uniform(0, 4, n)
        topo = snapshot(positions, radii)
        assert topo.edges == edges_via_outgoing(positions, radii)
