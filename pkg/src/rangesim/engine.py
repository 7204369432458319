"""Simulation engine: the synchronous per-step loop and the run record.

Step order is fixed: derive the topology from the step-k positions and
radii, compute every agent's bounded control from its incoming information,
choose every agent's next radius from its outgoing coverage and control,
account the step's transmission energy, then advance all positions at once.
Radii for step k+1 are always chosen from step-k data, before anyone moves.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
from dataclasses import dataclass

import numpy as np

from . import range_policy as rp
from .dynamics import ControlInput, SimParams, bounded_control, control_toward_points, step_all
from .energy import EnergyLedger, PowerModel, accrue_step
from .graph import TopologySnapshot, has_directed_spanning_tree, snapshot

logger = logging.getLogger(__name__)

TERMINATION_CONSENSUS = "consensus"
TERMINATION_MAX_STEPS = "max_steps_reached"


class ScenarioError(ValueError):
    """A scenario violates its load-time invariants."""


class SimulationError(RuntimeError):
    """The simulation reached an invalid runtime state."""


@dataclass(frozen=True)
class Scenario:
    """Complete description of one experiment.

    Positions and radii are stored as plain tuples so a scenario is hashable
    and serializes deterministically; the engine converts to arrays on run.
    """

    initial_positions: tuple[tuple[float, float], ...]
    initial_radii: tuple[float, ...]
    params: SimParams
    policy: rp.RangePolicy
    power: PowerModel
    max_steps: int = 100_000
    consensus_tol: float = 1e-6
    seed: int | None = None
    energy_times_T: bool = False
    fixed_energy_includes_step0: bool = False

    def __post_init__(self) -> None:
        n = self.params.n_agents
        if len(self.initial_positions) != n or len(self.initial_radii) != n:
            raise ScenarioError(
                f"expected {n} positions and radii, got "
                f"{len(self.initial_positions)} and {len(self.initial_radii)}"
            )
        for x, y in self.initial_positions:
            if not (math.isfinite(x) and math.isfinite(y)):
                raise ScenarioError("initial positions must be finite")
        for r in self.initial_radii:
            if not (r >= 0 and math.isfinite(r)):
                raise ScenarioError("initial radii must be finite and >= 0")
        if self.max_steps < 1:
            raise ScenarioError("max_steps must be >= 1")
        if not (self.consensus_tol > 0 and math.isfinite(self.consensus_tol)):
            raise ScenarioError("consensus_tol must be positive")
        if self.policy.kind == "intermittent":
            self.policy.resolve_schedule(n)  # validates schedule length

    @property
    def n_agents(self) -> int:
        return self.params.n_agents

    def with_policy(self, policy: rp.RangePolicy) -> "Scenario":
        """Same experiment under a different radius policy."""
        return Scenario(
            initial_positions=self.initial_positions,
            initial_radii=self.initial_radii,
            params=self.params,
            policy=policy,
            power=self.power,
            max_steps=self.max_steps,
            consensus_tol=self.consensus_tol,
            seed=self.seed,
            energy_times_T=self.energy_times_T,
            fixed_energy_includes_step0=self.fixed_energy_includes_step0,
        )

    def to_dict(self) -> dict:
        policy_d: dict = {"kind": self.policy.kind}
        if self.policy.fixed_delta is not None:
            policy_d["delta"] = self.policy.fixed_delta
        if self.policy.schedule is not None:
            if isinstance(self.policy.schedule, int):
                policy_d["schedule"] = self.policy.schedule
            else:
                policy_d["schedule"] = [
                    {"period": p, "offset": o} for p, o in self.policy.schedule
                ]
        if self.policy.idle_beacon_radius != 0.0:
            policy_d["idle_beacon_radius"] = self.policy.idle_beacon_radius
        power_d: dict = {"epsilon": self.power.epsilon, "alpha": self.power.alpha}
        if self.energy_times_T:
            power_d["energy_times_T"] = True
        if self.fixed_energy_includes_step0:
            power_d["fixed_energy_includes_step0"] = True
        run_d: dict = {"max_steps": self.max_steps, "consensus_tol": self.consensus_tol}
        if self.seed is not None:
            run_d["seed"] = self.seed
        return {
            "agents": [
                {"position": [x, y], "radius": r}
                for (x, y), r in zip(self.initial_positions, self.initial_radii)
            ],
            "params": {"T": self.params.T, "gamma": self.params.gamma},
            "policy": policy_d,
            "power": power_d,
            "run": run_d,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        """Build a scenario from its document form, rejecting unknown keys."""

        def take(d, allowed: set[str], where: str) -> None:
            if not isinstance(d, dict):
                raise ScenarioError(f"{where} must be a JSON object")
            unknown = set(d) - allowed
            if unknown:
                raise ScenarioError(f"unknown key(s) {sorted(unknown)} in {where}")

        if not isinstance(doc, dict):
            raise ScenarioError("scenario document must be a JSON object")
        take(doc, {"agents", "params", "policy", "power", "run"}, "scenario")
        for key in ("agents", "params", "policy", "power"):
            if key not in doc:
                raise ScenarioError(f"missing required key {key!r}")

        agents = doc["agents"]
        if not isinstance(agents, list) or not agents:
            raise ScenarioError("agents must be a non-empty list")
        positions = []
        radii = []
        for idx, a in enumerate(agents):
            if not isinstance(a, dict):
                raise ScenarioError(f"agents[{idx}] must be an object")
            take(a, {"position", "radius"}, f"agents[{idx}]")
            try:
                x, y = a["position"]
                positions.append((float(x), float(y)))
                radii.append(float(a["radius"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ScenarioError(f"agents[{idx}] malformed: {exc}") from exc

        params_d = doc["params"]
        take(params_d, {"T", "gamma"}, "params")
        try:
            params = SimParams(
                T=float(params_d["T"]), gamma=float(params_d["gamma"]), n_agents=len(agents)
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"invalid params: {exc}") from exc

        policy_d = doc["policy"]
        take(policy_d, {"kind", "delta", "schedule", "idle_beacon_radius"}, "policy")
        schedule = policy_d.get("schedule")
        if isinstance(schedule, list):
            parsed = []
            for idx, slot in enumerate(schedule):
                if not isinstance(slot, dict):
                    raise ScenarioError(f"policy.schedule[{idx}] must be an object")
                take(slot, {"period", "offset"}, f"policy.schedule[{idx}]")
                parsed.append((int(slot["period"]), int(slot.get("offset", 0))))
            schedule = tuple(parsed)
        elif schedule is not None and not isinstance(schedule, int):
            raise ScenarioError("policy.schedule must be an integer period or a list")
        try:
            policy = rp.RangePolicy(
                kind=policy_d.get("kind", ""),
                fixed_delta=(
                    float(policy_d["delta"]) if policy_d.get("delta") is not None else None
                ),
                schedule=schedule,
                idle_beacon_radius=float(policy_d.get("idle_beacon_radius", 0.0)),
            )
        except (TypeError, ValueError) as exc:
            raise ScenarioError(f"invalid policy: {exc}") from exc

        power_d = doc["power"]
        take(
            power_d,
            {"epsilon", "alpha", "energy_times_T", "fixed_energy_includes_step0"},
            "power",
        )
        try:
            power = PowerModel(epsilon=float(power_d["epsilon"]), alpha=float(power_d["alpha"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"invalid power model: {exc}") from exc

        run_d = doc.get("run", {})
        take(run_d, {"max_steps", "consensus_tol", "seed"}, "run")
        try:
            return cls(
                initial_positions=tuple(positions),
                initial_radii=tuple(radii),
                params=params,
                policy=policy,
                power=power,
                max_steps=int(run_d.get("max_steps", 100_000)),
                consensus_tol=float(run_d.get("consensus_tol", 1e-6)),
                seed=(int(run_d["seed"]) if "seed" in run_d else None),
                energy_times_T=bool(power_d.get("energy_times_T", False)),
                fixed_energy_includes_step0=bool(
                    power_d.get("fixed_energy_includes_step0", False)
                ),
            )
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc)) from exc

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def content_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()


@dataclass
class SimulationTrace:
    """Time-indexed record of one run.

    positions and radii have one extra leading entry (the state after the
    final executed step); controls, topologies, energies, and reasons have
    exactly one entry per executed step.
    """

    scenario: Scenario
    scenario_hash: str
    positions: np.ndarray  # (K+1, N, 2)
    radii: np.ndarray  # (K+1, N)
    controls: np.ndarray  # (K, N, 2)
    saturated: np.ndarray  # (K, N) bool
    topologies: list[TopologySnapshot]
    step_energies: np.ndarray  # (K, N)
    decision_reasons: list[tuple[str, ...]]
    steps_executed: int
    termination: str
    ledger: EnergyLedger

    def diameters(self) -> np.ndarray:
        return np.array([diameter(p) for p in self.positions])

    @property
    def final_diameter(self) -> float:
        return diameter(self.positions[-1])

    def spanning_tree_at_start(self) -> bool:
        if self.topologies:
            return has_directed_spanning_tree(self.topologies[0])
        return has_directed_spanning_tree(
            snapshot(self.positions[0], self.radii[0])
        )


def diameter(positions: np.ndarray) -> float:
    """Maximum pairwise distance; 0 for a single agent."""
    positions = np.asarray(positions, dtype=float)
    n = len(positions)
    best = 0.0
    for i in range(n):
        xi = float(positions[i, 0])
        yi = float(positions[i, 1])
        for j in range(i + 1, n):
            dx = xi - float(positions[j, 0])
            dy = yi - float(positions[j, 1])
            d = math.sqrt(dx * dx + dy * dy)
            if d > best:
                best = d
    return best


class _IntermittentState:
    """Broadcast bookkeeping: pending radii, schedules, last-heard positions."""

    def __init__(self, scenario: Scenario):
        n = scenario.n_agents
        sched = scenario.policy.resolve_schedule(n)
        self.periods = [p for p, _ in sched]
        self.next_broadcast = [o for _, o in sched]
        self.pending = [float(r) for r in scenario.initial_radii]
        # heard[i][j] = last position received by i from j (zero-order hold)
        self.heard: list[dict[int, tuple[float, float]]] = [dict() for _ in range(n)]

    def broadcasting(self, k: int) -> list[int]:
        return [i for i in range(len(self.periods)) if self.next_broadcast[i] == k]


def run(scenario: Scenario) -> SimulationTrace:
    """Execute a scenario until the team diameter drops below the consensus
    tolerance or the step budget is exhausted.

    Returns the full step-indexed trace; the recorded topology at each step
    is derived exactly from the recorded positions and radii of that step.
    """
    n = scenario.n_agents
    T = scenario.params.T
    gamma = scenario.params.gamma
    policy = scenario.policy
    kind = policy.kind

    positions = np.array(scenario.initial_positions, dtype=float).reshape(n, 2)

    if kind == "fixed":
        fixed_radii = np.array(
            [
                rp.fixed_range(policy, scenario.initial_radii[i]).radius
                for i in range(n)
            ]
        )
        current_radii = fixed_radii.copy()
    else:
        current_radii = np.array(scenario.initial_radii, dtype=float)

    inter = _IntermittentState(scenario) if kind == "intermittent" else None

    ledger = EnergyLedger(
        n_agents=n, step_scale=(T if scenario.energy_times_T else 1.0)
    )

    hist_positions = [positions.copy()]
    hist_radii: list[np.ndarray] = []
    hist_controls: list[np.ndarray] = []
    hist_saturated: list[np.ndarray] = []
    hist_topologies: list[TopologySnapshot] = []
    hist_reasons: list[tuple[str, ...]] = []

    def effective_radii(k: int) -> np.ndarray:
        if inter is None:
            return current_radii.copy()
        eff = np.zeros(n)
        for i in inter.broadcasting(k):
            eff[i] = inter.pending[i]
        return eff

    k = 0
    termination = TERMINATION_MAX_STEPS
    while True:
        if diameter(positions) < scenario.consensus_tol:
            termination = TERMINATION_CONSENSUS
            break
        if k >= scenario.max_steps:
            termination = TERMINATION_MAX_STEPS
            break

        eff = effective_radii(k)
        topo = snapshot(positions, eff)

        if inter is not None:
            for i in inter.broadcasting(k):
                pos_i = (float(positions[i, 0]), float(positions[i, 1]))
                for j in topo.outgoing_of(i):
                    inter.heard[j][i] = pos_i

        controls: list[ControlInput] = []
        if inter is not None:
            for i in range(n):
                points = [inter.heard[i][j] for j in sorted(inter.heard[i])]
                controls.append(control_toward_points(positions[i], points, gamma))
        else:
            for i in range(n):
                controls.append(bounded_control(i, positions, topo.incoming_of(i), gamma))

        reasons: list[str]
        if kind == "preserving":
            decisions = [
                rp.preserving_range(
                    i, positions, topo.outgoing_of(i), controls[i], gamma, T,
                    idle_beacon_radius=policy.idle_beacon_radius,
                )
                for i in range(n)
            ]
            next_radii = np.array([d.radius for d in decisions])
            reasons = [d.reason for d in decisions]
        elif kind == "modified":
            decisions = [
                rp.modified_range(
                    i, positions, topo.outgoing_of(i), controls[i], gamma, T, n,
                    idle_beacon_radius=policy.idle_beacon_radius,
                )
                for i in range(n)
            ]
            next_radii = np.array([d.radius for d in decisions])
            reasons = [d.reason for d in decisions]
        elif kind == "fixed":
            next_radii = fixed_radii.copy()
            reasons = [rp.REASON_FIXED] * n
        else:  # intermittent
            reasons = [rp.REASON_IDLE] * n
            for i in inter.broadcasting(k):
                decision = rp.intermittent_range(
                    i, positions, topo.outgoing_of(i), controls[i], gamma, T,
                    steps_until_next=inter.periods[i],
                    idle_beacon_radius=policy.idle_beacon_radius,
                )
                inter.pending[i] = decision.radius
                inter.next_broadcast[i] = k + inter.periods[i]
                reasons[i] = decision.reason
            next_radii = None

        skip_energy = (
            kind == "fixed" and k == 0 and not scenario.fixed_energy_includes_step0
        )
        accrue_step(ledger, np.zeros(n) if skip_energy else eff, scenario.power)

        try:
            positions = step_all(positions, [c.vector for c in controls], T)
        except ValueError as exc:
            raise SimulationError(f"invalid state at step {k}: {exc}") from exc

        hist_positions.append(positions.copy())
        hist_radii.append(eff)
        hist_controls.append(np.array([c.vector for c in controls]))
        hist_saturated.append(np.array([c.saturated for c in controls], dtype=bool))
        hist_topologies.append(topo)
        hist_reasons.append(tuple(reasons))
        if next_radii is not None:
            current_radii = next_radii
        k += 1

    hist_radii.append(effective_radii(k))

    trace = SimulationTrace(
        scenario=scenario,
        scenario_hash=scenario.content_hash(),
        positions=np.array(hist_positions),
        radii=np.array(hist_radii),
        controls=(
            np.array(hist_controls) if hist_controls else np.zeros((0, n, 2))
        ),
        saturated=(
            np.array(hist_saturated) if hist_saturated else np.zeros((0, n), dtype=bool)
        ),
        topologies=hist_topologies,
        step_energies=(
            np.array(ledger.per_agent_step) if ledger.per_agent_step else np.zeros((0, n))
        ),
        decision_reasons=hist_reasons,
        steps_executed=k,
        termination=termination,
        ledger=ledger,
    )
    logger.info(
        "run finished: %d steps, termination=%s, final diameter=%.3e, team energy=%.6g",
        k, termination, trace.final_diameter, ledger.team_total,
    )
    return trace


@dataclass(frozen=True)
class ContractionEstimate:
    """Largest step-to-step diameter ratio over the complete-topology phase."""

    value: float
    degenerate: bool
    n_phase_steps: int


def contraction_estimate(trace: SimulationTrace) -> ContractionEstimate:
    """Measure the worst diameter contraction while the topology is complete.

    Raises ValueError when the trace never reaches a complete topology. A
    degenerate estimate (value 0) is returned when the diameter is already
    zero throughout the phase.
    """
    phase = [k for k, topo in enumerate(trace.topologies) if topo.is_complete()]
    if not phase:
        raise ValueError(
            "no complete-graph phase in trace: the contraction factor is only "
            "defined once every agent covers the whole team"
        )
    diams = trace.diameters()
    ratios = []
    for k in phase:
        if diams[k] > 0:
            ratios.append(float(diams[k + 1]) / float(diams[k]))
    if not ratios:
        return ContractionEstimate(value=0.0, degenerate=True, n_phase_steps=len(phase))
    return ContractionEstimate(value=max(ratios), degenerate=False, n_phase_steps=len(phase))


def generate_scenario(
    n_agents: int,
    seed: int,
    *,
    policy: rp.RangePolicy | None = None,
    box: float = 5.0,
    radius_low: float = 1.0,
    radius_high: float = 4.0,
    max_steps: int = 20_000,
    consensus_tol: float = 1e-6,
    max_tries: int = 1000,
) -> Scenario:
    """Seeded random scenario whose initial topology has a directed spanning tree.

    Draws positions uniformly in a square box and radii uniformly in
    [radius_low, radius_high], rejecting draws until the spanning-tree
    condition holds. T is set to 0.9/n_agents.
    """
    if n_agents < 2:
        raise ScenarioError("generated scenarios need at least 2 agents")
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        positions = rng.uniform(0.0, box, size=(n_agents, 2))
        radii = rng.uniform(radius_low, radius_high, size=n_agents)
        if has_directed_spanning_tree(snapshot(positions, radii)):
            return Scenario(
                initial_positions=tuple((float(x), float(y)) for x, y in positions),
                initial_radii=tuple(float(r) for r in radii),
                params=SimParams(T=0.9 / n_agents, gamma=1.0, n_agents=n_agents),
                policy=policy if policy is not None else rp.RangePolicy(kind="modified"),
                power=PowerModel(epsilon=1.0, alpha=2.0),
                max_steps=max_steps,
                consensus_tol=consensus_tol,
                seed=seed,
            )
    raise ScenarioError(
        f"could not draw a spanning-tree topology in {max_tries} tries; "
        f"try larger radii or a smaller box"
    )
