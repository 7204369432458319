"""Directed communication topologies induced by positions and transmission radii.

An agent i can deliver to every agent j whose distance from i is at most i's
current radius (closed ball, so boundary contact counts as covered). All
structural queries (neighbor sets, spanning tree, averaging matrix) derive
from that single rule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def _distance(positions: np.ndarray, i: int, j: int) -> float:
    dx = positions[i, 0] - positions[j, 0]
    dy = positions[i, 1] - positions[j, 1]
    return math.sqrt(dx * dx + dy * dy)


def _check_index(i: int, n: int) -> None:
    if not 0 <= i < n:
        raise IndexError(f"agent index {i} out of range for {n} agents")


@dataclass(frozen=True)
class TopologySnapshot:
    """Directed edge set over agent indices at a single time step.

    An edge (i, j) means agent i's transmission disk covers agent j.
    Self-loops are excluded by construction.
    """

    n_agents: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop ({i},{j}) not allowed")
            if not (0 <= i < self.n_agents and 0 <= j < self.n_agents):
                raise ValueError(f"edge ({i},{j}) out of range for {self.n_agents} agents")

    def outgoing_of(self, i: int) -> set[int]:
        _check_index(i, self.n_agents)
        return {j for (u, j) in self.edges if u == i}

    def incoming_of(self, i: int) -> set[int]:
        _check_index(i, self.n_agents)
        return {u for (u, j) in self.edges if j == i}

    def in_degrees(self) -> list[int]:
        degs = [0] * self.n_agents
        for _, j in self.edges:
            degs[j] += 1
        return degs

    def is_complete(self) -> bool:
        return len(self.edges) == self.n_agents * (self.n_agents - 1)


def outgoing_neighbors(positions: np.ndarray, radii: np.ndarray, i: int) -> set[int]:
    """Agents inside i's transmission disk: {j != i : dist(i, j) <= radii[i]}."""
    positions = np.asarray(positions, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n = len(radii)
    if len(positions) != n:
        raise ValueError("positions and radii must have equal length")
    _check_index(i, n)
    return {j for j in range(n) if j != i and _distance(positions, i, j) <= radii[i]}


def incoming_neighbors(positions: np.ndarray, radii: np.ndarray, i: int) -> set[int]:
    """Agents whose transmission disk covers i: {j != i : dist(i, j) <= radii[j]}."""
    positions = np.asarray(positions, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n = len(radii)
    if len(positions) != n:
        raise ValueError("positions and radii must have equal length")
    _check_index(i, n)
    return {j for j in range(n) if j != i and _distance(positions, i, j) <= radii[j]}


def snapshot(positions: np.ndarray, radii: np.ndarray) -> TopologySnapshot:
    """Full directed topology: edge (i, j) present iff dist(i, j) <= radii[i].

    The outgoing-rule edge set and the incoming-rule edge set (with endpoint
    roles swapped) are the same set, so one snapshot describes both views.
    """
    positions = np.asarray(positions, dtype=float)
    radii = np.asarray(radii, dtype=float)
    n = len(radii)
    if len(positions) != n:
        raise ValueError("positions and radii must have equal length")
    edges = set()
    for i in range(n):
        for j in range(n):
            if j != i and _distance(positions, i, j) <= radii[i]:
                edges.add((i, j))
    return TopologySnapshot(n_agents=n, edges=frozenset(edges))


def has_directed_spanning_tree(topo: TopologySnapshot) -> bool:
    """True iff some agent has directed paths to all other agents."""
    n = topo.n_agents
    adj: list[list[int]] = [[] for _ in range(n)]
    for i, j in topo.edges:
        adj[i].append(j)
    for root in range(n):
        seen = [False] * n
        seen[root] = True
        stack = [root]
        count = 1
        while stack:
            u = stack.pop()
            for v in adj[u]:
                if not seen[v]:
                    seen[v] = True
                    count += 1
                    stack.append(v)
        if count == n:
            return True
    return False


def update_matrix(topo: TopologySnapshot, T: float) -> np.ndarray:
    """Averaging matrix I - T*L, with L the in-degree Laplacian of the topology.

    Row i carries its in-degree on the diagonal of L and -1 at each incoming
    neighbor, so every row of the result sums to 1. Entries stay nonnegative
    only while T * max_in_degree < 1; beyond that the sampling period is too
    coarse for the averaging interpretation and a ValueError is raised.
    """
    if T <= 0:
        raise ValueError("T must be positive")
    n = topo.n_agents
    degs = topo.in_degrees()
    max_deg = max(degs) if degs else 0
    if T * max_deg >= 1:
        raise ValueError(
            f"T * max_in_degree = {T * max_deg} >= 1: averaging matrix would lose "
            f"nonnegativity; the sampling period violates T < 1/N"
        )
    w = np.eye(n)
    for i, j in topo.edges:
        # edge i -> j contributes to row j: j averages over its incoming neighbors
        w[j, i] += T
        w[j, j] -= T
    return w
