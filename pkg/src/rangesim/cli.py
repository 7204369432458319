"""Command-line interface: run, compare, generate, verify-trace.

Exit codes: 0 success, 2 scenario validation error, 3 runtime or
verification error, 4 usage error. RC_LOG sets log verbosity
(DEBUG/INFO/WARNING/ERROR).
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import logging
import os
import sys
from pathlib import Path

from . import engine, files, oracle, plots
from .engine import ScenarioError, SimulationError
from .range_policy import RangePolicy

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_USAGE = 4


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse defaults to exit code 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def resolve_scenario_path(path: str) -> Path:
    """Resolve a scenario argument, falling back to the bundled scenario files."""
    p = Path(path)
    if p.exists():
        return p
    bundled = importlib.resources.files(__package__) / "data" / path
    if bundled.is_file():
        return Path(str(bundled))
    raise ScenarioError(f"scenario file not found: {path}")


def parse_policy_spec(spec: str) -> tuple[str, RangePolicy]:
    """Parse a policy name like 'modified', 'fixed:2.5', or 'intermittent:3'."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "preserving":
        return spec, RangePolicy(kind="preserving")
    if name == "modified":
        return spec, RangePolicy(kind="modified")
    if name == "fixed":
        delta = float(arg) if arg else None
        return spec, RangePolicy(kind="fixed", fixed_delta=delta)
    if name == "intermittent":
        period = int(arg) if arg else 1
        return spec, RangePolicy(kind="intermittent", schedule=period)
    raise UsageError(
        f"unknown policy {spec!r}; expected preserving, modified, "
        f"fixed[:delta], or intermittent[:period]"
    )


def _write_run_outputs(trace, out_dir: Path) -> dict:
    out_dir.mkdir(parents=True, exist_ok=True)
    files.save_scenario(out_dir / "scenario.json", trace.scenario)
    files.write_trace_csv(out_dir / "trace.csv", trace)
    summary = files.write_summary(out_dir / "summary.json", trace)
    plots.emit_run_plots(trace, out_dir)
    return summary


def cmd_run(args) -> int:
    scenario = files.load_scenario(resolve_scenario_path(args.scenario))
    trace = engine.run(scenario)
    summary = _write_run_outputs(trace, Path(args.out_dir))
    print(
        f"{summary['termination_reason']} after {summary['steps_executed']} steps; "
        f"final diameter {summary['final_diameter']:.3e}; "
        f"team energy {summary['team_energy']:.6g}"
    )
    print(f"outputs written to {args.out_dir}")
    return EXIT_OK


def cmd_compare(args) -> int:
    specs = [s.strip() for chunk in args.policies for s in chunk.split(",") if s.strip()]
    if len(specs) < 2:
        raise UsageError("compare needs at least 2 policies (-p policy1,policy2)")
    scenario = files.load_scenario(resolve_scenario_path(args.scenario))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    traces = {}
    entries = []
    for spec in specs:
        label, policy = parse_policy_spec(spec)
        if label in traces:
            raise UsageError(f"policy {label!r} listed twice")
        variant = scenario.with_policy(policy)
        trace = engine.run(variant)
        sub = out_dir / label.replace(":", "_")
        summary = _write_run_outputs(trace, sub)
        traces[label] = trace
        entries.append(
            {
                "policy": label,
                "team_energy": summary["team_energy"],
                "steps_executed": summary["steps_executed"],
                "termination_reason": summary["termination_reason"],
                "final_diameter": summary["final_diameter"],
            }
        )

    base = entries[0]
    ratios = {}
    for entry in entries[1:]:
        key = f"{entry['policy']}/{base['policy']}"
        ratios[key] = (
            entry["team_energy"] / base["team_energy"]
            if base["team_energy"] != 0
            else None
        )
    comparison = {
        "scenario_hash": scenario.content_hash(),
        "policies": entries,
        "energy_ratios": ratios,
    }
    files.atomic_write_text(
        out_dir / "comparison.json", json.dumps(comparison, indent=2, sort_keys=True) + "\n"
    )
    plots.plot_energy_overlay(traces, out_dir / "energy.svg")
    for entry in entries:
        print(
            f"{entry['policy']}: team energy {entry['team_energy']:.6g} "
            f"({entry['steps_executed']} steps, {entry['termination_reason']})"
        )
    print(f"outputs written to {out_dir}")
    return EXIT_OK


def cmd_generate(args) -> int:
    scenario = engine.generate_scenario(args.n_agents, args.seed)
    files.save_scenario(args.out_path, scenario)
    print(f"wrote scenario with {args.n_agents} agents (seed {args.seed}) to {args.out_path}")
    return EXIT_OK


def cmd_verify_trace(args) -> int:
    run_dir = Path(args.run_dir)
    scenario = files.load_scenario(run_dir / "scenario.json")
    arrays = files.read_trace_csv(run_dir / "trace.csv")
    checked = oracle.verify_trace_arrays(
        scenario,
        arrays.positions,
        arrays.radii,
        arrays.controls,
        arrays.step_energies,
        n_out=arrays.n_out,
        n_in=arrays.n_in,
    )
    print(f"trace verified: {checked} steps replayed with no mismatch")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(
        prog="rangesim",
        description=(
            "Discrete-time multi-agent consensus simulator in which every agent "
            "locally controls its wireless transmission radius."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and emit trace, summary, and plots")
    p_run.add_argument("scenario", help="scenario JSON file (or a bundled name like paper_sec5.json)")
    p_run.add_argument("-o", "--out-dir", required=True, help="output directory")
    p_run.set_defaults(fn=cmd_run)

    p_cmp = sub.add_parser("compare", help="run several radius policies on the same scenario")
    p_cmp.add_argument("scenario")
    p_cmp.add_argument(
        "-p",
        "--policies",
        action="append",
        required=True,
        help="comma-separated policies: preserving, modified, fixed[:delta], intermittent[:period]",
    )
    p_cmp.add_argument("-o", "--out-dir", required=True)
    p_cmp.set_defaults(fn=cmd_compare)

    p_gen = sub.add_parser("generate", help="write a seeded random spanning-tree scenario")
    p_gen.add_argument("-n", "--n-agents", type=int, required=True)
    p_gen.add_argument("-s", "--seed", type=int, required=True)
    p_gen.add_argument("-o", "--out-path", required=True)
    p_gen.set_defaults(fn=cmd_generate)

    p_ver = sub.add_parser(
        "verify-trace", help="replay-check a run directory written by the run command"
    )
    p_ver.add_argument("run_dir")
    p_ver.set_defaults(fn=cmd_verify_trace)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("RC_LOG", "WARNING").upper())
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "generate" and args.n_agents < 2:
        parser.error("generate needs at least 2 agents")
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ScenarioError as exc:
        print(f"invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except oracle.ReplayMismatch as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (SimulationError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
