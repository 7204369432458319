"""On-disk formats: scenario JSON, trace CSV, summary and comparison JSON.

Trace rows carry full float precision (17 significant digits) so that a
parsed-back trace replays bit-for-bit. All writes go through a temp file and
an atomic rename.
"""

from __future__ import annotations

import csv
import json
import math
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .engine import Scenario, ScenarioError, SimulationTrace, contraction_estimate, diameter

TRACE_HEADER = ["step", "agent", "x", "y", "ux", "uy", "radius", "step_energy", "n_out", "n_in"]


def _fmt(x: float) -> str:
    return f"{float(x):.17g}"


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode())


def load_scenario(path: str | Path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: not valid JSON: {exc}") from exc
    try:
        return Scenario.from_dict(doc)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def save_scenario(path: str | Path, scenario: Scenario) -> None:
    text = json.dumps(scenario.to_dict(), indent=2, sort_keys=True) + "\n"
    atomic_write_text(path, text)


def write_trace_csv(path: str | Path, trace: SimulationTrace) -> None:
    lines = [",".join(TRACE_HEADER)]
    n = trace.scenario.n_agents
    for k in range(trace.steps_executed):
        topo = trace.topologies[k]
        out_deg = [0] * n
        in_deg = [0] * n
        for i, j in topo.edges:
            out_deg[i] += 1
            in_deg[j] += 1
        for i in range(n):
            lines.append(
                ",".join(
                    [
                        str(k),
                        str(i),
                        _fmt(trace.positions[k, i, 0]),
                        _fmt(trace.positions[k, i, 1]),
                        _fmt(trace.controls[k, i, 0]),
                        _fmt(trace.controls[k, i, 1]),
                        _fmt(trace.radii[k, i]),
                        _fmt(trace.step_energies[k, i]),
                        str(out_deg[i]),
                        str(in_deg[i]),
                    ]
                )
            )
    atomic_write_text(path, "\n".join(lines) + "\n")


@dataclass
class TraceArrays:
    """Trace data parsed back from CSV; one leading axis entry per executed step."""

    n_agents: int
    n_steps: int
    positions: np.ndarray  # (K, N, 2)
    controls: np.ndarray  # (K, N, 2)
    radii: np.ndarray  # (K, N)
    step_energies: np.ndarray  # (K, N)
    n_out: np.ndarray  # (K, N)
    n_in: np.ndarray  # (K, N)

    def final_positions(self, T: float) -> np.ndarray:
        """Positions after the last recorded step, via the recorded controls."""
        if self.n_steps == 0:
            raise ValueError("empty trace has no final positions")
        return self.positions[-1] + T * self.controls[-1]


def read_trace_csv(path: str | Path) -> TraceArrays:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != TRACE_HEADER:
            raise ValueError(f"{path}: unexpected trace header {header}")
        rows = list(reader)
    if not rows:
        return TraceArrays(
            n_agents=0,
            n_steps=0,
            positions=np.zeros((0, 0, 2)),
            controls=np.zeros((0, 0, 2)),
            radii=np.zeros((0, 0)),
            step_energies=np.zeros((0, 0)),
            n_out=np.zeros((0, 0), dtype=int),
            n_in=np.zeros((0, 0), dtype=int),
        )
    n = max(int(r[1]) for r in rows) + 1
    if len(rows) % n != 0:
        raise ValueError(f"{path}: {len(rows)} rows is not a multiple of {n} agents")
    steps = len(rows) // n
    positions = np.zeros((steps, n, 2))
    controls = np.zeros((steps, n, 2))
    radii = np.zeros((steps, n))
    energies = np.zeros((steps, n))
    n_out = np.zeros((steps, n), dtype=int)
    n_in = np.zeros((steps, n), dtype=int)
    for idx, row in enumerate(rows):
        k, i = int(row[0]), int(row[1])
        if k != idx // n or i != idx % n:
            raise ValueError(
                f"{path}: row {idx} is (step={k}, agent={i}); expected monotone "
                f"(step={idx // n}, agent={idx % n})"
            )
        positions[k, i] = (float(row[2]), float(row[3]))
        controls[k, i] = (float(row[4]), float(row[5]))
        radii[k, i] = float(row[6])
        energies[k, i] = float(row[7])
        n_out[k, i] = int(row[8])
        n_in[k, i] = int(row[9])
    return TraceArrays(
        n_agents=n,
        n_steps=steps,
        positions=positions,
        controls=controls,
        radii=radii,
        step_energies=energies,
        n_out=n_out,
        n_in=n_in,
    )


def build_summary(trace: SimulationTrace) -> dict:
    try:
        est = contraction_estimate(trace)
        contraction = {
            "beta": est.value,
            "degenerate": est.degenerate,
            "n_phase_steps": est.n_phase_steps,
        }
    except ValueError:
        contraction = None
    team_steps = trace.ledger.step_team_totals()
    half = trace.steps_executed // 2
    tail = float(np.sum(team_steps[half:])) if len(team_steps) else 0.0
    return {
        "scenario_hash": trace.scenario_hash,
        "n_agents": trace.scenario.n_agents,
        "params": {"T": trace.scenario.params.T, "gamma": trace.scenario.params.gamma},
        "policy": trace.scenario.to_dict()["policy"],
        "termination_reason": trace.termination,
        "steps_executed": trace.steps_executed,
        "final_diameter": trace.final_diameter,
        "team_energy": trace.ledger.team_total,
        "team_energy_last_half": tail,
        "per_agent_energy": [float(e) for e in trace.ledger.per_agent_total],
        "spanning_tree_at_start": trace.spanning_tree_at_start(),
        "contraction": contraction,
    }


def write_summary(path: str | Path, trace: SimulationTrace) -> dict:
    summary = build_summary(trace)
    atomic_write_text(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


def recompute_summary_from_csv(arrays: TraceArrays, T: float) -> dict:
    """Independent recomputation of the summary's numeric fields from CSV data."""
    if arrays.n_steps == 0:
        return {"steps_executed": 0, "team_energy": 0.0, "final_diameter": 0.0}
    final = arrays.final_positions(T)
    team_energy = float(math.fsum(float(e) for e in arrays.step_energies.ravel()))
    return {
        "steps_executed": arrays.n_steps,
        "team_energy": team_energy,
        "final_diameter": diameter(final),
    }
