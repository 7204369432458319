"""Per-agent transmission radius policies.

Four ways for an agent to pick the radius it will transmit with next step:

* preserving: radius large enough that every agent currently covered is
  still covered after one step of bounded motion by both parties.
* modified: same as preserving while someone is still uncovered; once the
  agent covers the whole team it switches to twice its largest distance,
  which shrinks to zero as the team converges instead of flooring at the
  per-step motion budget.
* intermittent: preserving generalized to agents that broadcast only every
  few steps; the motion budget scales with the gap until the next broadcast.
* fixed: a constant radius, the baseline the variable policies are compared
  against for energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import ControlInput

POLICY_KINDS = ("preserving", "modified", "intermittent", "fixed")

REASON_PRESERVE = "preserve_edges"
REASON_COMPLETE = "complete_graph_bound"
REASON_IDLE = "idle_no_broadcast"
REASON_FIXED = "fixed"


@dataclass(frozen=True)
class RangePolicy:
    """Policy selector plus its parameters.

    fixed_delta applies to kind="fixed"; None means each agent holds its
    initial radius forever (per-agent baseline). schedule applies to
    kind="intermittent": either None (every agent broadcasts every step),
    a single integer period shared by all agents, or one (period, offset)
    pair per agent. idle_beacon_radius is the radius an agent keeps when it
    has nobody to preserve; zero by default, positive to model a discovery
    beacon.
    """

    kind: str
    fixed_delta: float | None = None
    schedule: int | tuple[tuple[int, int], ...] | None = None
    idle_beacon_radius: float = 0.0

    def __post_init__(self) -> None:
        if self.kind not in POLICY_KINDS:
            raise ValueError(f"unknown policy kind {self.kind!r}; expected one of {POLICY_KINDS}")
        if self.fixed_delta is not None:
            if self.kind != "fixed":
                raise ValueError("fixed_delta only applies to the fixed policy")
            if not (self.fixed_delta > 0 and math.isfinite(self.fixed_delta)):
                raise ValueError("fixed_delta must be positive and finite")
        if self.schedule is not None:
            if self.kind != "intermittent":
                raise ValueError("schedule only applies to the intermittent policy")
            if isinstance(self.schedule, int):
                if self.schedule < 1:
                    raise ValueError("broadcast period must be >= 1")
            else:
                for period, offset in self.schedule:
                    if period < 1:
                        raise ValueError("broadcast period must be >= 1")
                    if offset < 0:
                        raise ValueError("broadcast offset must be >= 0")
        if self.idle_beacon_radius < 0:
            raise ValueError("idle_beacon_radius must be >= 0")

    def resolve_schedule(self, n_agents: int) -> tuple[tuple[int, int], ...]:
        """Per-agent (period, offset) pairs for the intermittent policy."""
        if self.kind != "intermittent":
            raise ValueError("resolve_schedule requires the intermittent policy")
        if self.schedule is None:
            return tuple((1, 0) for _ in range(n_agents))
        if isinstance(self.schedule, int):
            return tuple((self.schedule, 0) for _ in range(n_agents))
        if len(self.schedule) != n_agents:
            raise ValueError(
                f"schedule has {len(self.schedule)} entries for {n_agents} agents"
            )
        return tuple((int(p), int(o)) for p, o in self.schedule)


@dataclass(frozen=True)
class RangeDecision:
    """A chosen radius together with which policy branch produced it."""

    radius: float
    reason: str

    def __post_init__(self) -> None:
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise ValueError(f"radius must be finite and >= 0, got {self.radius}")


def _max_distance(positions: np.ndarray, i: int, targets) -> float:
    best = 0.0
    xi = float(positions[i, 0])
    yi = float(positions[i, 1])
    for j in targets:
        dx = xi - float(positions[j, 0])
        dy = yi - float(positions[j, 1])
        d = math.sqrt(dx * dx + dy * dy)
        if d > best:
            best = d
    return best


def intermittent_range(
    i: int,
    positions_at_broadcast: np.ndarray,
    outgoing_at_broadcast: set[int],
    u_i: ControlInput,
    gamma: float,
    T: float,
    steps_until_next: int,
    idle_beacon_radius: float = 0.0,
) -> RangeDecision:
    """Radius for agent i's next broadcast, `steps_until_next` steps away.

    Every currently covered agent can drift at most (||u_i|| + gamma) * T per
    step away from i, so budgeting that motion for the whole gap keeps the
    current coverage intact at the next broadcast. With an empty coverage set
    there is nothing to preserve and the agent stays at its idle radius.
    """
    if steps_until_next < 1:
        raise ValueError("steps_until_next must be >= 1")
    if not outgoing_at_broadcast:
        return RangeDecision(radius=idle_beacon_radius, reason=REASON_IDLE)
    positions_at_broadcast = np.asarray(positions_at_broadcast, dtype=float)
    reach = _max_distance(positions_at_broadcast, i, sorted(outgoing_at_broadcast))
    budget = (steps_until_next * (u_i.norm + gamma)) * T
    return RangeDecision(radius=reach + budget, reason=REASON_PRESERVE)


def preserving_range(
    i: int,
    positions: np.ndarray,
    outgoing: set[int],
    u_i: ControlInput,
    gamma: float,
    T: float,
    idle_beacon_radius: float = 0.0,
) -> RangeDecision:
    """Radius keeping every currently covered agent covered one step from now."""
    return intermittent_range(
        i, positions, outgoing, u_i, gamma, T,
        steps_until_next=1, idle_beacon_radius=idle_beacon_radius,
    )


def modified_range(
    i: int,
    positions: np.ndarray,
    outgoing: set[int],
    u_i: ControlInput,
    gamma: float,
    T: float,
    n_agents: int,
    idle_beacon_radius: float = 0.0,
) -> RangeDecision:
    """Preserving radius until agent i covers the whole team, then 2 * max distance.

    Once everyone is covered, all agents next step remain inside the disk
    around i of its largest current distance, so twice that distance keeps
    the team covered while decaying to zero with the team diameter.
    """
    positions = np.asarray(positions, dtype=float)
    if len(outgoing) + 1 == n_agents:
        reach = _max_distance(positions, i, (j for j in range(n_agents) if j != i))
        return RangeDecision(radius=2.0 * reach, reason=REASON_COMPLETE)
    return preserving_range(
        i, positions, outgoing, u_i, gamma, T, idle_beacon_radius=idle_beacon_radius
    )


def fixed_range(policy: RangePolicy, initial_radius: float | None = None) -> RangeDecision:
    """Constant baseline radius: the policy's common delta, else the agent's initial radius."""
    if policy.kind != "fixed":
        raise ValueError(f"fixed_range called with policy kind {policy.kind!r}")
    if policy.fixed_delta is not None:
        return RangeDecision(radius=policy.fixed_delta, reason=REASON_FIXED)
    if initial_radius is None:
        raise ValueError("fixed policy without a common delta needs the agent's initial radius")
    return RangeDecision(radius=float(initial_radius), reason=REASON_FIXED)
