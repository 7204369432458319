"""Transmission power model and per-run energy accounting.

Power to reach distance d is epsilon * d**alpha with a path-loss exponent
alpha between 2 and 4; circuit-level consumption is out of scope. A ledger
accumulates each agent's per-step powers so policies can be compared on
team totals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class PowerModel:
    epsilon: float
    alpha: float

    def __post_init__(self) -> None:
        if not (self.epsilon > 0 and math.isfinite(self.epsilon)):
            raise ValueError("epsilon must be positive and finite")
        if not 2.0 <= self.alpha <= 4.0:
            raise ValueError(f"alpha must be in [2, 4], got {self.alpha}")


def transmit_power(d: float, model: PowerModel) -> float:
    """Power needed to transmit out to distance d: epsilon * d**alpha."""
    if d < 0:
        raise ValueError(f"distance must be >= 0, got {d}")
    return model.epsilon * float(d) ** model.alpha


@dataclass
class EnergyLedger:
    """Running per-agent and team energy totals for one simulation run.

    step_scale multiplies each recorded step power; 1.0 records raw powers
    (one power term per step, matching the dimensionless bookkeeping the
    policies are compared with), while passing the sampling period T yields
    physically dimensioned energy.
    """

    n_agents: int
    step_scale: float = 1.0
    per_agent_step: list[np.ndarray] = field(default_factory=list)
    per_agent_total: np.ndarray = None  # type: ignore[assignment]
    team_total: float = 0.0

    def __post_init__(self) -> None:
        if self.n_agents < 1:
            raise ValueError("n_agents must be >= 1")
        if self.per_agent_total is None:
            self.per_agent_total = np.zeros(self.n_agents)

    @property
    def n_steps(self) -> int:
        return len(self.per_agent_step)

    def step_team_totals(self) -> np.ndarray:
        """Team energy per recorded step, shape (n_steps,)."""
        if not self.per_agent_step:
            return np.zeros(0)
        return np.array([float(np.sum(e)) for e in self.per_agent_step])


def accrue_step(ledger: EnergyLedger, radii_at_step, model: PowerModel) -> EnergyLedger:
    """Append one step's per-agent transmission energies and update totals."""
    radii = np.asarray(radii_at_step, dtype=float)
    if radii.shape != (ledger.n_agents,):
        raise ValueError(
            f"expected {ledger.n_agents} radii, got shape {radii.shape}"
        )
    energies = np.array(
        [ledger.step_scale * transmit_power(float(d), model) for d in radii]
    )
    ledger.per_agent_step.append(energies)
    ledger.per_agent_total = ledger.per_agent_total + energies
    ledger.team_total += float(np.sum(energies))
    return ledger


@dataclass(frozen=True)
class EnergyComparison:
    """Side-by-side totals for two runs over the same team."""

    total_a: float
    total_b: float
    ratio: float | None  # a / b, None when b is zero
    per_agent_a: np.ndarray
    per_agent_b: np.ndarray


def compare_totals(ledger_a: EnergyLedger, ledger_b: EnergyLedger) -> EnergyComparison:
    """Totals and ratio a/b for two ledgers; no judgment about which is better."""
    if ledger_a.n_agents != ledger_b.n_agents:
        raise ValueError(
            f"ledgers cover different team sizes: {ledger_a.n_agents} vs {ledger_b.n_agents}"
        )
    ratio = ledger_a.team_total / ledger_b.team_total if ledger_b.team_total != 0 else None
    return EnergyComparison(
        total_a=ledger_a.team_total,
        total_b=ledger_b.team_total,
        ratio=ratio,
        per_agent_a=ledger_a.per_agent_total.copy(),
        per_agent_b=ledger_b.per_agent_total.copy(),
    )
