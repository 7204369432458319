"""Brute-force reference implementations used by tests and trace verification.

Everything here favors obvious correctness over speed and deliberately avoids
the production code paths: reachability runs to a fixpoint instead of
searching, hull membership uses plain orientation signs with a distance
fallback, and trace replay re-derives every recorded step from scratch with
straight-line loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import Scenario, SimulationTrace
from .graph import TopologySnapshot
from .range_policy import REASON_COMPLETE, REASON_FIXED, REASON_IDLE, REASON_PRESERVE


def reachable_set(topo: TopologySnapshot, root: int) -> set[int]:
    """All agents reachable from root, by naive iteration to a fixpoint."""
    if not 0 <= root < topo.n_agents:
        raise IndexError(f"root {root} out of range")
    reached = {root}
    changed = True
    while changed:
        changed = False
        for u, v in topo.edges:
            if u in reached and v not in reached:
                reached.add(v)
                changed = True
    return reached


# ---------------------------------------------------------------------------
# convex hull membership
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HullQuery:
    point: tuple[float, float]
    vertices: tuple[tuple[float, float], ...]


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Monotone chain; returns hull vertices counter-clockwise."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts
    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _point_segment_distance(p, a, b) -> float:
    abx = b[0] - a[0]
    aby = b[1] - a[1]
    denom = abx * abx + aby * aby
    if denom == 0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / denom
    t = min(1.0, max(0.0, t))
    cx = a[0] + t * abx
    cy = a[1] + t * aby
    return math.hypot(p[0] - cx, p[1] - cy)


def hull_contains(query: HullQuery, slack: float) -> bool:
    """True iff the point is inside or within `slack` of the hull of the vertices.

    Membership itself uses exact orientation signs; the slack is applied only
    as a distance-to-boundary fallback, which also handles degenerate hulls
    (a segment or a single point).
    """
    if slack < 0:
        raise ValueError("slack must be >= 0")
    if not query.vertices:
        raise ValueError("hull query needs at least one vertex")
    p = (float(query.point[0]), float(query.point[1]))
    verts = [(float(x), float(y)) for x, y in query.vertices]
    hull = _convex_hull(verts)
    if len(hull) == 1:
        return math.hypot(p[0] - hull[0][0], p[1] - hull[0][1]) <= slack
    if len(hull) == 2:
        return _point_segment_distance(p, hull[0], hull[1]) <= slack
    inside = all(
        _cross(hull[i], hull[(i + 1) % len(hull)], p) >= 0 for i in range(len(hull))
    )
    if inside:
        return True
    dist = min(
        _point_segment_distance(p, hull[i], hull[(i + 1) % len(hull)])
        for i in range(len(hull))
    )
    return dist <= slack


# ---------------------------------------------------------------------------
# trace replay
# ---------------------------------------------------------------------------

class ReplayMismatch(Exception):
    """A recorded trace disagrees with its independent recomputation."""

    def __init__(self, step: int, diffs: list[str]):
        self.step = step
        self.diffs = diffs
        detail = "\n  ".join(diffs)
        super().__init__(f"replay mismatch at step {step}:\n  {detail}")


@dataclass
class StepReplay:
    """Recomputed derived data for one step."""

    step: int
    edges: set[tuple[int, int]]
    controls: list[tuple[float, float]]
    saturated: list[bool]
    next_radii: list[float]
    step_energies: list[float]
    reasons: list[str]


def _dist(pos, i: int, j: int) -> float:
    dx = float(pos[i][0]) - float(pos[j][0])
    dy = float(pos[i][1]) - float(pos[j][1])
    return math.sqrt(dx * dx + dy * dy)


def _saturated_pull(own, pts, gamma: float) -> tuple[tuple[float, float], bool]:
    sx = 0.0
    sy = 0.0
    for q in pts:
        sx += float(own[0]) - float(q[0])
        sy += float(own[1]) - float(q[1])
    norm = math.sqrt(sx * sx + sy * sy)
    if norm <= gamma:
        return (-sx, -sy), False
    scale = gamma / norm
    return (-sx * scale, -sy * scale), True


def _replay_steps(scenario: Scenario, positions, radii, n_steps: int):
    """Yield a StepReplay for every recorded step, front to back.

    positions[k] and radii[k] are taken as recorded inputs for step k; the
    yielded values are the outputs the engine should have derived from them.
    Intermittent broadcast bookkeeping (who broadcast when, what everyone
    last heard, pending radii) is rebuilt incrementally from the prefix.
    """
    n = scenario.n_agents
    T = scenario.params.T
    gamma = scenario.params.gamma
    policy = scenario.policy
    kind = policy.kind
    eps = scenario.power.epsilon
    alpha = scenario.power.alpha
    scale = T if scenario.energy_times_T else 1.0

    if kind == "intermittent":
        sched = policy.resolve_schedule(n)
        periods = [p for p, _ in sched]
        next_bcast = [o for _, o in sched]
        pending = [float(r) for r in scenario.initial_radii]
        heard: list[dict[int, tuple[float, float]]] = [dict() for _ in range(n)]
    if kind == "fixed":
        if policy.fixed_delta is not None:
            fixed_radii = [policy.fixed_delta] * n
        else:
            fixed_radii = [float(r) for r in scenario.initial_radii]

    for k in range(n_steps):
        pos = positions[k]
        rad = radii[k]

        edges = {
            (i, j)
            for i in range(n)
            for j in range(n)
            if j != i and _dist(pos, i, j) <= float(rad[i])
        }

        if kind == "intermittent":
            for i in range(n):
                if next_bcast[i] == k:
                    for j in range(n):
                        if j != i and _dist(pos, i, j) <= float(rad[i]):
                            heard[j][i] = (float(pos[i][0]), float(pos[i][1]))

        controls: list[tuple[float, float]] = []
        sat_flags: list[bool] = []
        for i in range(n):
            if kind == "intermittent":
                pts = [heard[i][j] for j in sorted(heard[i])]
            else:
                incoming = [
                    j for j in range(n) if j != i and _dist(pos, i, j) <= float(rad[j])
                ]
                pts = [pos[j] for j in incoming]
            u, sat = _saturated_pull(pos[i], pts, gamma)
            controls.append(u)
            sat_flags.append(sat)

        next_radii: list[float] = []
        reasons: list[str] = []
        if kind == "fixed":
            next_radii = list(fixed_radii)
            reasons = [REASON_FIXED] * n
        elif kind == "intermittent":
            reasons = [REASON_IDLE] * n
            for i in range(n):
                if next_bcast[i] == k:
                    outgoing = [
                        j for j in range(n) if j != i and _dist(pos, i, j) <= float(rad[i])
                    ]
                    if outgoing:
                        reach = max(_dist(pos, i, j) for j in outgoing)
                        un = math.sqrt(
                            controls[i][0] * controls[i][0]
                            + controls[i][1] * controls[i][1]
                        )
                        pending[i] = reach + (periods[i] * (un + gamma)) * T
                        reasons[i] = REASON_PRESERVE
                    else:
                        pending[i] = policy.idle_beacon_radius
                        reasons[i] = REASON_IDLE
                    next_bcast[i] = k + periods[i]
            for i in range(n):
                next_radii.append(pending[i] if next_bcast[i] == k + 1 else 0.0)
        else:
            for i in range(n):
                outgoing = [
                    j for j in range(n) if j != i and _dist(pos, i, j) <= float(rad[i])
                ]
                covers_all = len(outgoing) + 1 == n
                if kind == "modified" and covers_all:
                    reach = max(
                        (_dist(pos, i, j) for j in range(n) if j != i), default=0.0
                    )
                    next_radii.append(2.0 * reach)
                    reasons.append(REASON_COMPLETE)
                elif outgoing:
                    reach = max(_dist(pos, i, j) for j in outgoing)
                    un = math.sqrt(
                        controls[i][0] * controls[i][0]
                        + controls[i][1] * controls[i][1]
                    )
                    next_radii.append(reach + (un + gamma) * T)
                    reasons.append(REASON_PRESERVE)
                else:
                    next_radii.append(policy.idle_beacon_radius)
                    reasons.append(REASON_IDLE)

        if kind == "fixed" and k == 0 and not scenario.fixed_energy_includes_step0:
            energies = [0.0] * n
        else:
            energies = [scale * (eps * float(rad[i]) ** alpha) for i in range(n)]

        yield StepReplay(
            step=k,
            edges=edges,
            controls=controls,
            saturated=sat_flags,
            next_radii=next_radii,
            step_energies=energies,
            reasons=reasons,
        )


def _diff_step(
    replay: StepReplay,
    *,
    tol: float,
    edges=None,
    controls=None,
    saturated=None,
    next_radii=None,
    step_energies=None,
    n_out=None,
    n_in=None,
) -> list[str]:
    diffs: list[str] = []
    if edges is not None and set(edges) != replay.edges:
        extra = sorted(set(edges) - replay.edges)
        missing = sorted(replay.edges - set(edges))
        diffs.append(f"topology: recorded has extra {extra}, missing {missing}")
    if controls is not None:
        for i, (ux, uy) in enumerate(replay.controls):
            rx, ry = float(controls[i][0]), float(controls[i][1])
            if abs(rx - ux) > tol or abs(ry - uy) > tol:
                diffs.append(
                    f"control agent {i}: recorded ({rx!r}, {ry!r}) "
                    f"vs recomputed ({ux!r}, {uy!r})"
                )
    if saturated is not None:
        for i, sat in enumerate(replay.saturated):
            if bool(saturated[i]) != sat:
                diffs.append(
                    f"saturated flag agent {i}: recorded {bool(saturated[i])} "
                    f"vs recomputed {sat}"
                )
    if next_radii is not None:
        for i, d in enumerate(replay.next_radii):
            rd = float(next_radii[i])
            if abs(rd - d) > tol:
                diffs.append(
                    f"radius agent {i}: recorded {rd!r} vs recomputed {d!r}"
                )
    if step_energies is not None:
        for i, e in enumerate(replay.step_energies):
            re_ = float(step_energies[i])
            if abs(re_ - e) > tol:
                diffs.append(
                    f"step_energy agent {i}: recorded {re_!r} vs recomputed {e!r}"
                )
    if n_out is not None:
        out_deg = [0] * len(replay.controls)
        for i, _ in replay.edges:
            out_deg[i] += 1
        for i, deg in enumerate(out_deg):
            if int(n_out[i]) != deg:
                diffs.append(f"n_out agent {i}: recorded {int(n_out[i])} vs recomputed {deg}")
    if n_in is not None:
        in_deg = [0] * len(replay.controls)
        for _, j in replay.edges:
            in_deg[j] += 1
        for i, deg in enumerate(in_deg):
            if int(n_in[i]) != deg:
                diffs.append(f"n_in agent {i}: recorded {int(n_in[i])} vs recomputed {deg}")
    return diffs


def replay_step(trace: SimulationTrace, k: int, tol: float = 1e-12) -> StepReplay:
    """Recompute step k of a trace and check it against the recorded values.

    Raises ReplayMismatch when any recomputed quantity differs from the
    recorded one beyond `tol` (topology must match exactly).
    """
    if not 0 <= k < trace.steps_executed:
        raise IndexError(f"step {k} out of range for {trace.steps_executed} executed steps")
    replay = None
    for r in _replay_steps(trace.scenario, trace.positions, trace.radii, k + 1):
        replay = r
    assert replay is not None
    diffs = _diff_step(
        replay,
        tol=tol,
        edges=trace.topologies[k].edges,
        controls=trace.controls[k],
        saturated=trace.saturated[k],
        next_radii=trace.radii[k + 1] if k + 1 < len(trace.radii) else None,
        step_energies=trace.step_energies[k],
    )
    if diffs:
        raise ReplayMismatch(k, diffs)
    return replay


def verify_trace(trace: SimulationTrace, tol: float = 1e-12) -> int:
    """Replay every recorded step of a trace; returns the number of steps checked.

    Single incremental pass, so intermittent broadcast state is rebuilt once
    rather than per step. Raises ReplayMismatch at the first failing step.
    """
    checked = 0
    for replay in _replay_steps(
        trace.scenario, trace.positions, trace.radii, trace.steps_executed
    ):
        k = replay.step
        diffs = _diff_step(
            replay,
            tol=tol,
            edges=trace.topologies[k].edges,
            controls=trace.controls[k],
            saturated=trace.saturated[k],
            next_radii=trace.radii[k + 1] if k + 1 < len(trace.radii) else None,
            step_energies=trace.step_energies[k],
        )
        if diffs:
            raise ReplayMismatch(k, diffs)
        checked += 1
    return checked


def verify_trace_arrays(
    scenario: Scenario,
    positions: np.ndarray,
    radii: np.ndarray,
    controls: np.ndarray,
    step_energies: np.ndarray,
    n_out: np.ndarray | None = None,
    n_in: np.ndarray | None = None,
    tol: float = 1e-12,
) -> int:
    """Replay-verify trace data in array form (as parsed back from a trace file).

    positions/radii cover the executed steps only; the next-radius check is
    performed for every step that has a successor row.
    """
    n_steps = len(controls)
    checked = 0
    for replay in _replay_steps(scenario, positions, radii, n_steps):
        k = replay.step
        diffs = _diff_step(
            replay,
            tol=tol,
            controls=controls[k],
            next_radii=radii[k + 1] if k + 1 < len(radii) else None,
            step_energies=step_energies[k],
            n_out=n_out[k] if n_out is not None else None,
            n_in=n_in[k] if n_in is not None else None,
        )
        if diffs:
            raise ReplayMismatch(k, diffs)
        checked += 1
    return checked
