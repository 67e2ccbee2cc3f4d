"""Command-line entry point.

Subcommands run protocols, scan parameters, evaluate witnesses from shot
records, run Monte-Carlo campaigns and print stabilizer generators. Every
result file is JSON Lines with a header carrying the seed.
"""

import argparse
import json
import logging
import sys
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np

from src import settings
from src.analysis import (
    calibrate_depolarizing,
    correlators_vs_tau,
    exact_noisy_bell_fidelity,
    fit_fringe,
    parity_scan,
    stabilizer_expectations,
    witness_from_source,
)
from src.backend import BackendKind
from src.config import RunConfig, load_protocol
from src.engine import HeraldMode, RunResult, run
from src.errors import AnalysisError, ConfigError, FusegraphError, OddCycle
from src.graphs import GraphSpec, load_graph, save_graph
from src.montecarlo import monte_carlo
from src.reports import read_shots, write_jsonl, write_shots
from src.stabilizers import bipartition_settings, graph_state_vector, stabilizer_generators
from src.timing import POLICY_PRESETS, PostSelectionPolicy, write_click_records

logger = logging.getLogger(__name__)

SCAN_PARAMETERS = ("t0", "tau_max", "noise_p")


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command."""
    parser = argparse.ArgumentParser(
        prog="fusegraph", description="Emitter-based photonic graph-state simulator"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    def simulation_options(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--protocol", default="tree", help="built-in name or protocol file")
        sub.add_argument("--noise", help="noise-model JSON file")
        sub.add_argument("--seed", type=int, help=f"default: ${settings.SEED_ENV_VAR} or 0")
        sub.add_argument("--output", help="result file (JSON Lines)")

    run_cmd = commands.add_parser("run", help="run one protocol attempt")
    simulation_options(run_cmd)
    run_cmd.add_argument("--backend", choices=[b.value for b in BackendKind], default="auto")
    run_cmd.add_argument("--herald", choices=[m.value for m in HeraldMode], default="sample")

    scan = commands.add_parser("scan", help="sweep t0, tau_max or the noise strength")
    simulation_options(scan)
    scan.add_argument("--parameter", choices=SCAN_PARAMETERS, required=True)
    grid = scan.add_mutually_exclusive_group(required=True)
    grid.add_argument("--grid", nargs=3, type=float, metavar=("START", "STOP", "COUNT"))
    grid.add_argument("--values", nargs="+", type=float)
    scan.add_argument("--trials", type=int, default=settings.DEFAULT_TRIALS)
    scan.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS)

    witness = commands.add_parser("witness", help="fidelity bound from shot records")
    witness.add_argument("--records", required=True, help="shot-record file")
    witness.add_argument("--graph", required=True, help="graph JSON file")
    witness.add_argument("--output", help="report file (JSON Lines)")

    campaign = commands.add_parser("montecarlo", help="emulate a coincidence campaign")
    simulation_options(campaign)
    campaign.add_argument("--herald", choices=["sample", "force"], default="sample")
    campaign.add_argument("--policy", default="default", help="preset or policy JSON file")
    campaign.add_argument("--trials", type=int, default=settings.DEFAULT_TRIALS)
    campaign.add_argument("--workers", type=int, default=settings.DEFAULT_WORKERS)
    campaign.add_argument("--shots", help="shot-record file for the witness command")
    campaign.add_argument("--clicks", help="click-record file")

    stabilizers = commands.add_parser("stabilizers", help="print the generators of a graph")
    source = stabilizers.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", help="graph JSON file")
    source.add_argument("--protocol", help="expected graph of a protocol")
    stabilizers.add_argument("--save-graph", help="write the graph as JSON")
    return parser


def _grid(args: argparse.Namespace) -> List[float]:
    if args.values is not None:
        return list(args.values)
    start, stop, count = args.grid
    if count < 1:
        raise ConfigError("--grid needs at least one point")
    return np.linspace(start, stop, int(count)).tolist()


def _write(path: Optional[str], kind: str, records: Iterable[Dict], seed, **header) -> None:
    if path is None:
        for record in records:
            print(json.dumps(record, sort_keys=True))
        return
    count = write_jsonl(path, kind, records, seed, **header)
    logger.info("Wrote %d records to %s", count, path)


# --- run ---


def run_records(result: RunResult, program_graph: Optional[GraphSpec]) -> List[Dict]:
    """Heralds, measurements, stabilizer values and oracle overlap of one run."""
    records: List[Dict] = [
        {
            "record": "herald",
            "success": h.success,
            "pattern": "".join(h.pattern),
            "probability": h.probability,
        }
        for h in result.heralds
    ]
    records.extend(
        {
            "record": "measurement",
            "index": m.index,
            "qubit": m.qubit,
            "basis": m.basis,
            "outcome": m.outcome,
            "attempts": m.attempts,
        }
        for m in result.measurements
    )
    summary: Dict = {
        "record": "summary",
        "completed": result.completed,
        "success": result.success,
        "failure": result.failure,
        "weight": result.weight,
    }
    if result.success and program_graph is not None and result.register is not None:
        if result.register.n_qubits == program_graph.n_qubits:
            stabilizers = stabilizer_generators(program_graph)
            records.extend(
                {"record": "stabilizer", "generator": str(g), "value": value}
                for g, value, _ in stabilizer_expectations(result.register, stabilizers)
            )
            if result.backend is BackendKind.DENSE:
                oracle = graph_state_vector(program_graph)
                summary["overlap"] = oracle.overlap(result.register.state)
    records.append(summary)
    return records


def cmd_run(config: RunConfig) -> int:
    """Run a protocol once and write its result file."""
    program = config.program()
    result = run(
        program,
        config.backend,
        seed=config.seed,
        herald_mode=config.herald_mode,
        noise=config.noise(),
    )
    if not result.success:
        logger.warning("%s: %s", program.name, result.failure)
    _write(
        config.output,
        "run",
        run_records(result, program.expected_graph),
        config.seed,
        program=program.name,
        backend=result.backend.value,
        herald_mode=result.herald_mode.value,
    )
    return settings.EXIT_OK


# --- scan ---


def _scan_t0(config: RunConfig, grid: Sequence[float]) -> int:
    program = config.program()
    points = parity_scan(program, grid, noise=config.noise())
    fits = {}
    if len(grid) >= 3:
        for branch in (0, 1):
            parities = [p.parities[branch] for p in points]
            fit = fit_fringe(grid, parities, settings.QUBIT_PRECESSION_RAD_PER_US)
            fits[f"branch{branch + 1}"] = {
                "amplitude": fit.amplitude,
                "phase": fit.phase,
                "offset": fit.offset,
            }
    rows = (
        {"t0_us": p.t0_us, "parity_1": p.parities[0], "parity_2": p.parities[1]} for p in points
    )
    _write(config.output, "scan_t0", rows, config.seed, program=program.name, fits=fits)
    return settings.EXIT_OK


def _scan_tau(config: RunConfig, grid: Sequence[float]) -> int:
    program = config.program()
    campaign = monte_carlo(
        program,
        config.noise(),
        POLICY_PRESETS["none"],
        config.n_trials,
        config.seed,
        config.workers,
    )
    stabilizers = stabilizer_generators(program.expected_graph)
    rows = []
    for tau, estimates in correlators_vs_tau(campaign.shots, stabilizers.generators, grid):
        rows.append(
            {
                "tau_max_ns": tau,
                "values": [e.value for e in estimates],
                "stderr": [e.stderr for e in estimates],
            }
        )
    _write(
        config.output,
        "scan_tau_max",
        rows,
        config.seed,
        program=program.name,
        generators=[str(g) for g in stabilizers.generators],
    )
    return settings.EXIT_OK


def _scan_noise(config: RunConfig, grid: Sequence[float]) -> int:
    rows = ({"p": p, "bell_fidelity": exact_noisy_bell_fidelity(p)} for p in grid)
    _write(
        config.output,
        "scan_noise_p",
        rows,
        config.seed,
        calibrated_p=calibrate_depolarizing(),
        target_fidelity=settings.BELL_TARGET_FIDELITY,
    )
    return settings.EXIT_OK


def cmd_scan(config: RunConfig, parameter: str, grid: Sequence[float]) -> int:
    """One row per grid point of the chosen sweep."""
    if not grid:
        raise ConfigError("The scan grid is empty")
    scans = {"t0": _scan_t0, "tau_max": _scan_tau, "noise_p": _scan_noise}
    return scans[parameter](config, grid)


# --- witness ---


def cmd_witness(records_path: str, graph_path: str, output: Optional[str]) -> int:
    """Witness report of recorded shots against a graph."""
    graph = load_graph(graph_path)
    try:
        _, _, stabilizers = bipartition_settings(stabilizer_generators(graph), graph)
    except OddCycle as exc:
        raise OddCycle(f"{graph.name or 'graph'}: {exc}") from exc
    shots = read_shots(records_path)
    if not shots:
        raise AnalysisError(f"{records_path} holds no shots")
    report = witness_from_source(shots, stabilizers)
    logger.info(
        "P = %.3f (+%.3f / -%.3f), genuine entanglement: %s",
        report.p,
        report.p_err_plus,
        report.p_err_minus,
        report.genuine_entanglement,
    )
    _write(output, "witness", [report.to_record()], None, graph=graph.name, n_shots=len(shots))
    return settings.EXIT_OK


# --- montecarlo ---


def cmd_montecarlo(
    config: RunConfig, shots_path: Optional[str] = None, clicks_path: Optional[str] = None
) -> int:
    """Emulate a campaign; write statistics, shots and clicks."""
    program = config.program()
    policy: PostSelectionPolicy = config.post_selection()
    campaign = monte_carlo(
        program,
        config.noise(),
        policy,
        config.n_trials,
        config.seed,
        config.workers,
        config.herald_mode,
    )
    _write(
        config.output,
        "montecarlo",
        [campaign.stats.to_record()],
        config.seed,
        policy=policy.to_dict(),
    )
    if shots_path is not None:
        write_shots(shots_path, campaign.shots, config.seed, program=program.name)
    if clicks_path is not None:
        write_click_records(campaign.clicks, clicks_path, config.seed)
    return settings.EXIT_OK


# --- stabilizers ---


def cmd_stabilizers(
    graph_path: Optional[str], protocol: Optional[str], save_path: Optional[str] = None
) -> int:
    """Print the generators, and the two witness settings when the graph is bipartite."""
    if graph_path is not None:
        graph = load_graph(graph_path)
    else:
        graph = load_protocol(protocol).expected_graph
        if graph is None:
            raise ConfigError(f"protocol {protocol} has no expected graph")
    stabilizers = stabilizer_generators(graph)
    for vertex, generator in zip(stabilizers.owners, stabilizers.generators):
        print(f"v{vertex}: {generator}")
    try:
        setting_a, setting_b, _ = bipartition_settings(stabilizers, graph)
        for name, setting in (("M_a", setting_a), ("M_b", setting_b)):
            print(f"{name}: " + "".join(setting[q].value for q in sorted(setting)))
    except OddCycle as exc:
        print(f"no witness settings: {exc}")
    if save_path is not None:
        save_graph(graph, save_path)
    return settings.EXIT_OK


def dispatch(args: argparse.Namespace) -> int:
    """Run the parsed command."""
    if args.command == "witness":
        return cmd_witness(args.records, args.graph, args.output)
    if args.command == "stabilizers":
        return cmd_stabilizers(args.graph, args.protocol, args.save_graph)
    config = RunConfig.from_namespace(args)
    if args.command == "run":
        return cmd_run(config)
    if args.command == "scan":
        return cmd_scan(config, args.parameter, _grid(args))
    return cmd_montecarlo(config, args.shots, args.clicks)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse arguments, configure logging and map errors to exit codes."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO, format=settings.LOG_FORMAT
    )
    try:
        return dispatch(args)
    except FusegraphError as exc:
        logger.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
