"""Static SVG plot emission for run and comparison outputs.

Plots are derived purely from an already-recorded trace; nothing here feeds
back into the simulation or its on-disk numeric outputs.
"""

from __future__ import annotations

import io
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .engine import SimulationTrace
from .files import atomic_write_bytes


def _save(fig, path: str | Path) -> None:
    buf = io.BytesIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    atomic_write_bytes(path, buf.getvalue())


def _agent_labels(n: int) -> list[str]:
    # agents are 0-based internally, 1-based in anything user-facing
    return [f"agent {i + 1}" for i in range(n)]


def plot_trajectories(trace: SimulationTrace, path: str | Path) -> None:
    n = trace.scenario.n_agents
    fig, ax = plt.subplots(figsize=(6, 6))
    labels = _agent_labels(n)
    for i in range(n):
        xs = trace.positions[:, i, 0]
        ys = trace.positions[:, i, 1]
        (line,) = ax.plot(xs, ys, label=labels[i])
        ax.plot(xs[0], ys[0], "o", color=line.get_color())
        ax.plot(xs[-1], ys[-1], "x", color=line.get_color())
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_title("Agent trajectories (o start, x end)")
    ax.set_aspect("equal", adjustable="datalim")
    ax.legend()
    _save(fig, path)


def _plot_component(trace: SimulationTrace, component: int, name: str, path: str | Path) -> None:
    n = trace.scenario.n_agents
    steps = np.arange(len(trace.positions))
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, label in enumerate(_agent_labels(n)):
        ax.plot(steps, trace.positions[:, i, component], label=label)
    ax.set_xlabel("step")
    ax.set_ylabel(f"{name} [m]")
    ax.set_title(f"{name} components of agent positions")
    ax.legend()
    _save(fig, path)


def plot_x_components(trace: SimulationTrace, path: str | Path) -> None:
    _plot_component(trace, 0, "x", path)


def plot_y_components(trace: SimulationTrace, path: str | Path) -> None:
    _plot_component(trace, 1, "y", path)


def plot_ranges(trace: SimulationTrace, path: str | Path) -> None:
    n = trace.scenario.n_agents
    steps = np.arange(len(trace.radii))
    fig, ax = plt.subplots(figsize=(7, 4))
    for i, label in enumerate(_agent_labels(n)):
        ax.plot(steps, trace.radii[:, i], label=label)
    ax.set_xlabel("step")
    ax.set_ylabel("transmission radius [m]")
    ax.set_title("Communication ranges")
    ax.legend()
    _save(fig, path)


def plot_energy(trace: SimulationTrace, path: str | Path) -> None:
    """Cumulative per-agent and team transmission energy over the run."""
    n = trace.scenario.n_agents
    fig, ax = plt.subplots(figsize=(7, 4))
    if trace.steps_executed > 0:
        steps = np.arange(trace.steps_executed)
        cumulative = np.cumsum(trace.step_energies, axis=0)
        for i, label in enumerate(_agent_labels(n)):
            ax.plot(steps, cumulative[:, i], label=label)
        ax.plot(steps, cumulative.sum(axis=1), "k--", label="team")
        ax.legend()
    ax.set_xlabel("step")
    ax.set_ylabel("cumulative energy")
    ax.set_title("Communication energy")
    _save(fig, path)


def plot_energy_overlay(traces: dict[str, SimulationTrace], path: str | Path) -> None:
    """Team cumulative energy of several runs on one axis, for policy comparison."""
    fig, ax = plt.subplots(figsize=(7, 4))
    plotted = False
    for label, trace in traces.items():
        if trace.steps_executed > 0:
            steps = np.arange(trace.steps_executed)
            team = np.cumsum(trace.step_energies.sum(axis=1))
            ax.plot(steps, team, label=label)
            plotted = True
    ax.set_xlabel("step")
    ax.set_ylabel("cumulative team energy")
    ax.set_title("Communication energy by range policy")
    if plotted:
        ax.legend()
    _save(fig, path)


def emit_run_plots(trace: SimulationTrace, out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    targets = {
        "trajectories.svg": plot_trajectories,
        "x_components.svg": plot_x_components,
        "y_components.svg": plot_y_components,
        "ranges.svg": plot_ranges,
        "energy.svg": plot_energy,
    }
    written = []
    for name, fn in targets.items():
        fn(trace, out / name)
        written.append(out / name)
    return written
