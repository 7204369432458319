"""Multi-agent consensus simulation with locally controlled transmission radii."""

from importlib import resources
from pathlib import Path

from .dynamics import ControlInput, SimParams, bounded_control, saturate, step_all, unbounded_control
from .energy import EnergyLedger, PowerModel, accrue_step, compare_totals, transmit_power
from .engine import (
    ContractionEstimate,
    Scenario,
    ScenarioError,
    SimulationError,
    SimulationTrace,
    contraction_estimate,
    diameter,
    generate_scenario,
    run,
)
from .graph import (
    TopologySnapshot,
    has_directed_spanning_tree,
    incoming_neighbors,
    outgoing_neighbors,
    snapshot,
    update_matrix,
)
from .range_policy import (
    RangeDecision,
    RangePolicy,
    fixed_range,
    intermittent_range,
    modified_range,
    preserving_range,
)

__version__ = "0.1.0"


def bundled_scenario_path(name: str = "paper_sec5.json") -> Path:
    """Filesystem path of a scenario shipped with the package."""
    path = resources.files(__package__) / "data" / name
    if not path.is_file():
        raise FileNotFoundError(f"no bundled scenario named {name!r}")
    return Path(str(path))


__all__ = [
    "ControlInput",
    "ContractionEstimate",
    "EnergyLedger",
    "PowerModel",
    "RangeDecision",
    "RangePolicy",
    "Scenario",
    "ScenarioError",
    "SimParams",
    "SimulationError",
    "SimulationTrace",
    "TopologySnapshot",
    "accrue_step",
    "bounded_control",
    "bundled_scenario_path",
    "compare_totals",
    "contraction_estimate",
    "diameter",
    "fixed_range",
    "generate_scenario",
    "has_directed_spanning_tree",
    "incoming_neighbors",
    "intermittent_range",
    "modified_range",
    "outgoing_neighbors",
    "preserving_range",
    "run",
    "saturate",
    "snapshot",
    "step_all",
    "transmit_power",
    "unbounded_control",
    "update_matrix",
]
