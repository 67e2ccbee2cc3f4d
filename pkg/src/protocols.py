"""Built-in two-atom protocols and free-precession calibration."""

import logging
import math
from typing import List, Optional, Sequence, Tuple

from src import settings
from src.errors import ConfigError
from src.graphs import atom_photon, ring_protocol_graph, tree_protocol_graph
from src.instructions import (
    Barrier,
    Emit,
    Fuse,
    Hadamard,
    Init,
    Instruction,
    PauliGate,
    PhaseZ,
    ProtocolProgram,
    Rotate,
)
from src.register import SpinState

logger = logging.getLogger(__name__)

PRECESSION_TAG = "precession"
FRAME_TAG = "frame"
BRANCH_TARGETS = (0.0, math.pi)


def _half_pulse() -> List[Instruction]:
    # The spins precess by pi between emissions, so the pi/2 pulse acts as H
    return [
        PhaseZ(1, math.pi, FRAME_TAG),
        PhaseZ(2, math.pi, FRAME_TAG),
        Rotate(math.pi / 2),
    ]


def build_ring_protocol(n_cycles: int, odd: bool) -> ProtocolProgram:
    """Ring graph state from an initial fusion, N emission cycles and a final fusion.

    Even rings have 2N vertices, odd rings 2N + 1; the odd variant adds a
    global -pi/4 rotation after the first fusion.
    """
    if n_cycles < 1:
        raise ConfigError(f"Ring protocols need at least one emission cycle, got {n_cycles}")
    steps: List[Instruction] = [Init(SpinState.PLUS), Barrier("init"), Fuse(), Barrier("fused")]
    if odd:
        steps += [Rotate(-math.pi / 4), Barrier("rotated")]
    for cycle in range(1, n_cycles + 1):
        steps += [Emit(1), Emit(2), Barrier(f"cycle{cycle}")]
        if cycle < n_cycles:
            steps += _half_pulse() + [Barrier(f"pulse{cycle}")]
    steps += [PhaseZ(2, math.pi, FRAME_TAG), Hadamard(0), Hadamard(1), Barrier("frame")]
    steps += [Fuse(), Barrier("final")]
    if not odd:
        # a single cycle leaves the sign on the atoms' own vertex
        steps.append(PauliGate(atom_photon(2, 2) if n_cycles > 1 else 0, "Z"))
    graph = ring_protocol_graph(n_cycles, odd)
    return ProtocolProgram(graph.name, tuple(steps), expected_graph=graph)


def branch_phases(
    free_evolution_us: float,
    offsets_us: Sequence[float] = (0.0, 0.0),
    omega_q: float = settings.QUBIT_PRECESSION_RAD_PER_US,
    separation_us: float = settings.PHOTON_SEPARATION_US,
) -> Tuple[float, float]:
    """Precession phase of each GHZ branch, reduced to [0, 2pi).

    Atom 1 emits first and precesses T longer than atom 2.
    """
    tau1 = free_evolution_us + separation_us + offsets_us[0]
    tau2 = free_evolution_us + offsets_us[1]
    return (omega_q * tau1) % (2 * math.pi), (omega_q * tau2) % (2 * math.pi)


def with_free_evolution(
    program: ProtocolProgram,
    free_evolution_us: float,
    offsets_us: Sequence[float] = (0.0, 0.0),
    omega_q: float = settings.QUBIT_PRECESSION_RAD_PER_US,
    separation_us: Optional[float] = None,
) -> ProtocolProgram:
    """Program with its precession phases recompiled for new timings."""
    if separation_us is None:
        separation_us = program.photon_separation_us
    phases = branch_phases(free_evolution_us, offsets_us, omega_q, separation_us)
    steps = [
        PhaseZ(step.atom, phases[step.atom - 1], PRECESSION_TAG)
        if isinstance(step, PhaseZ) and step.tag == PRECESSION_TAG
        else step
        for step in program
    ]
    return program.with_instructions(
        steps,
        photon_separation_us=separation_us,
        free_evolution_us=free_evolution_us,
        emission_offsets_us=(float(offsets_us[0]), float(offsets_us[1])),
    )


def build_tree_protocol(
    absorb_photon_hadamards: bool = False,
    free_evolution_us: Optional[float] = None,
    offsets_us: Optional[Sequence[float]] = None,
    omega_q: float = settings.QUBIT_PRECESSION_RAD_PER_US,
) -> ProtocolProgram:
    """Depth-two tree: two GHZ branches joined by a fusion of the atoms.

    Without explicit timing the program is calibrated so branch 1 carries
    phase 0 and branch 2 phase pi.
    """
    cycles = settings.TREE_EMISSION_CYCLES
    steps: List[Instruction] = [Init(SpinState.PLUS)]
    for _ in range(cycles):
        steps += [Emit(1), Emit(2)]
    steps += [PhaseZ(1, 0.0, PRECESSION_TAG), PhaseZ(2, 0.0, PRECESSION_TAG), Barrier("ghz")]
    steps += [Hadamard(0), Hadamard(1)]
    if not absorb_photon_hadamards:
        steps += [
            Hadamard(atom_photon(atom, cycle))
            for cycle in range(2, cycles + 1)
            for atom in (1, 2)
        ]
    steps += [Fuse(), Barrier("final")]
    program = ProtocolProgram(
        "tree", tuple(steps), expected_graph=tree_protocol_graph(absorb_photon_hadamards)
    )
    if free_evolution_us is None:
        return calibrate_phases(program, omega_q)
    return with_free_evolution(program, free_evolution_us, offsets_us or (0.0, 0.0), omega_q)


def calibrate_phases(
    program: ProtocolProgram,
    omega_q: float = settings.QUBIT_PRECESSION_RAD_PER_US,
    targets: Tuple[float, float] = BRANCH_TARGETS,
) -> ProtocolProgram:
    """Choose t0 and atom 1's emission offset so the branches carry ``targets``.

    t0 alone fixes atom 2's phase; atom 1's extra offset absorbs the
    precession during T.
    """
    if omega_q <= 0:
        raise ConfigError("The qubit precession frequency must be positive")
    if not any(isinstance(s, PhaseZ) and s.tag == PRECESSION_TAG for s in program):
        logger.debug("Program %s has no precession phases to calibrate", program.name)
        return program
    period = 2 * math.pi
    free_evolution = (targets[1] % period) / omega_q
    accumulated = omega_q * (free_evolution + program.photon_separation_us)
    offset1 = ((targets[0] - accumulated) % period) / omega_q
    calibrated = with_free_evolution(program, free_evolution, (offset1, 0.0), omega_q)
    logger.debug(
        "Calibrated %s: t0 = %.4g us, atom 1 offset = %.4g us",
        program.name,
        free_evolution,
        offset1,
    )
    return calibrated


def branch_offset_us(
    program: ProtocolProgram, omega_q: float = settings.QUBIT_PRECESSION_RAD_PER_US
) -> float:
    """Difference of the two atoms' precession times, modulo one period."""
    first, second = program.emission_offsets_us
    difference = program.photon_separation_us + first - second
    return difference % (2 * math.pi / omega_q)


def builtin_protocol(name: str) -> ProtocolProgram:
    """Look up box, pentagon, hexagon or tree by name.

    Raises:
        ConfigError: for an unknown name.
    """
    builders = {
        "box": lambda: build_ring_protocol(2, odd=False),
        "pentagon": lambda: build_ring_protocol(2, odd=True),
        "hexagon": lambda: build_ring_protocol(3, odd=False),
        "tree": build_tree_protocol,
    }
    if name not in builders:
        raise ConfigError(f"Unknown protocol {name!r}; choose from {', '.join(sorted(builders))}")
    return builders[name]()


BUILTIN_PROTOCOLS = ("box", "pentagon", "hexagon", "tree")
