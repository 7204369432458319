"""Single-integrator agent dynamics and the norm-bounded consensus controller.

Each agent moves by r[k+1] = r[k] + T*u[k]. The bounded controller pulls an
agent toward the agents it currently hears from, with the pull clamped to a
configurable speed bound so that every agent's motion per step is predictable
by its peers. The unbounded variant is kept only for contrast experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class SimParams:
    """Sampling period, control bound, and team size for one run.

    The averaging interpretation of the update requires T < 1/n_agents.
    """

    T: float
    gamma: float
    n_agents: int

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValueError("T must be positive and finite")
        if not (self.gamma > 0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be positive and finite")
        if not self.T < 1.0 / self.n_agents:
            raise ValueError(
                f"T must be < 1/N: got T={self.T} with N={self.n_agents}"
            )


@dataclass(frozen=True)
class ControlInput:
    """A planar control vector plus whether the norm clamp was applied."""

    vector: np.ndarray  # shape (2,)
    saturated: bool

    @property
    def norm(self) -> float:
        vx = float(self.vector[0])
        vy = float(self.vector[1])
        return math.sqrt(vx * vx + vy * vy)


def saturate(z: Sequence[float] | np.ndarray, gamma: float) -> np.ndarray:
    """Clamp z to norm gamma, preserving direction; identity when ||z|| <= gamma."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    z = np.asarray(z, dtype=float)
    n = math.sqrt(float(z[0]) * float(z[0]) + float(z[1]) * float(z[1]))
    if n <= gamma:
        return z.copy()
    return z * (gamma / n)


def control_toward_points(
    position: np.ndarray, points: Iterable[np.ndarray], gamma: float
) -> ControlInput:
    """Bounded pull of one agent toward a collection of reference points.

    Computes -sat(sum(position - p)) over the given points. The iteration
    order of `points` fixes the floating-point summation order, so callers
    that need reproducible traces must pass points in a canonical order.
    """
    sx = 0.0
    sy = 0.0
    px = float(position[0])
    py = float(position[1])
    for p in points:
        sx += px - float(p[0])
        sy += py - float(p[1])
    n = math.sqrt(sx * sx + sy * sy)
    if n <= gamma:
        return ControlInput(vector=np.array([-sx, -sy]), saturated=False)
    scale = gamma / n
    return ControlInput(vector=np.array([-sx * scale, -sy * scale]), saturated=True)


def bounded_control(
    i: int, positions: np.ndarray, incoming: set[int], gamma: float
) -> ControlInput:
    """Norm-bounded consensus control for agent i from its incoming neighbors.

    Zero when the incoming set is empty or all heard positions coincide with
    agent i's own. The result norm never exceeds gamma.
    """
    if i in incoming:
        raise ValueError("incoming set must not contain the agent itself")
    positions = np.asarray(positions, dtype=float)
    # ascending neighbor order keeps the summation reproducible across replays
    points = [positions[j] for j in sorted(incoming)]
    return control_toward_points(positions[i], points, gamma)


def unbounded_control(i: int, positions: np.ndarray, incoming: set[int]) -> np.ndarray:
    """Classic unclamped consensus control -sum(r_i - r_j); baseline only."""
    if i in incoming:
        raise ValueError("incoming set must not contain the agent itself")
    positions = np.asarray(positions, dtype=float)
    sx = 0.0
    sy = 0.0
    for j in sorted(incoming):
        sx += float(positions[i, 0]) - float(positions[j, 0])
        sy += float(positions[i, 1]) - float(positions[j, 1])
    return np.array([-sx, -sy])


def step_all(positions: np.ndarray, controls: Sequence[np.ndarray], T: float) -> np.ndarray:
    """Advance all agents synchronously: r[k+1] = r[k] + T*u[k] componentwise.

    All controls must have been computed from the same step-k state; this
    function is the barrier between steps.
    """
    positions = np.asarray(positions, dtype=float)
    ctrl = np.asarray(controls, dtype=float)
    if ctrl.shape != positions.shape:
        raise ValueError(
            f"controls shape {ctrl.shape} does not match positions shape {positions.shape}"
        )
    if not (np.all(np.isfinite(positions)) and np.all(np.isfinite(ctrl))):
        raise ValueError("non-finite positions or controls")
    return positions + T * ctrl
