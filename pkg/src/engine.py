"""Executes protocol programs on a register.

The engine picks a backend, walks the instruction list, records heralds
and measurement outcomes, and wraps backend failures with the index of the
failing instruction.
"""

import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional

import numpy as np

from src import settings
from src.backend import BackendKind
from src.errors import (
    FusegraphError,
    NonCliffordOnTableau,
    ProtocolError,
    TooLarge,
    ZeroProbabilityBranch,
)
from src.instructions import (
    Barrier,
    Emit,
    Fuse,
    Hadamard,
    Init,
    Instruction,
    MeasurePhoton,
    MeasureSpin,
    PauliGate,
    PhaseZ,
    ProtocolProgram,
    ReduceRedundancy,
    Rotate,
    Wait,
)
from src.noise import (
    MismatchEvent,
    NoiseModel,
    WaitEvent,
    apply_noise,
    emission_listener,
    readout_spin,
)
from src.register import (
    FAILURE_PATTERNS,
    SUCCESS_PATTERN,
    HeraldOutcome,
    Register,
    init_register,
)
from src.timing import ClickRecord, Detector, sample_arrival

logger = logging.getLogger(__name__)


class HeraldMode(Enum):
    """How fusion heralds are resolved."""

    SAMPLE = "sample"
    FORCE = "force"
    EXHAUSTIVE = "exhaustive"


@dataclass(frozen=True)
class MeasurementRecord:
    """Outcome of a MeasureSpin or MeasurePhoton step (None if the readout failed)."""

    index: int
    qubit: str
    basis: str
    outcome: Optional[int]
    attempts: int = 1


@dataclass
class RunResult:
    """Everything a program run produced.

    Attributes:
        program: Program name.
        backend: Backend actually used.
        herald_mode: How heralds were resolved.
        seed: Seed of the run's generator, if any.
        register: Final register; None when the run never initialised one.
        heralds: Fusion outcomes in program order.
        clicks: Detector events of every fusion, sampled when a noise model is given.
        measurements: Spin and photon measurement outcomes.
        completed: False when a fusion failed or a readout was lost.
        failure: Why the run stopped early.
        weight: Product of the herald probabilities along this branch.
        snapshots: Register copies at every barrier, when requested.
        branches: Every herald branch, filled in exhaustive mode.
        elapsed_s: Wall-clock run time, excluded from comparisons.
    """

    # A run result is a plain record of many fields
    # pylint: disable=too-many-instance-attributes

    program: str
    backend: BackendKind
    herald_mode: HeraldMode
    seed: Optional[int]
    register: Optional[Register] = field(default=None, compare=False, repr=False)
    heralds: List[HeraldOutcome] = field(default_factory=list)
    clicks: List[ClickRecord] = field(default_factory=list)
    measurements: List[MeasurementRecord] = field(default_factory=list)
    completed: bool = True
    failure: Optional[str] = None
    weight: float = 1.0
    snapshots: Dict[str, Register] = field(default_factory=dict, compare=False, repr=False)
    branches: List["RunResult"] = field(default_factory=list)
    elapsed_s: float = field(default=0.0, compare=False)

    @property
    def success(self) -> bool:
        """Whether every fusion was heralded successfully."""
        return self.completed and all(h.success for h in self.heralds)


def resolve_backend(
    program: ProtocolProgram,
    backend: BackendKind = BackendKind.AUTO,
    max_qubits: int = settings.DENSE_QUBIT_LIMIT,
) -> BackendKind:
    """AUTO picks the tableau iff every instruction is Clifford.

    Raises:
        NonCliffordOnTableau: if the tableau is forced on a non-Clifford program.
        TooLarge: if the dense backend cannot hold the program's photons.
    """
    if backend is BackendKind.AUTO:
        backend = BackendKind.TABLEAU if program.is_clifford else BackendKind.DENSE
    if backend is BackendKind.TABLEAU:
        index = program.first_non_clifford()
        if index is not None:
            raise NonCliffordOnTableau(
                f"instruction {index} ({program.instructions[index]}) is not Clifford; "
                "use the dense backend"
            )
    else:
        peak = settings.N_SPINS + program.n_photons + 2
        if peak > max_qubits:
            raise TooLarge(
                f"program {program.name} needs {peak} qubits, dense limit is {max_qubits}"
            )
    logger.debug("Program %s runs on the %s backend", program.name, backend.value)
    return backend


class _Execution:
    """State shared by one run and all its branches."""

    # pylint: disable=too-many-instance-attributes

    def __init__(
        self,
        program: ProtocolProgram,
        backend: BackendKind,
        herald_mode: HeraldMode,
        rng: np.random.Generator,
        noise: Optional[NoiseModel],
        snapshots: bool,
        max_qubits: int,
        run_id: int = 0,
    ):
        self.program = program
        self.backend = backend
        self.herald_mode = herald_mode
        self.rng = rng
        self.noise = noise
        self.snapshots = snapshots
        self.max_qubits = max_qubits
        self.run_id = run_id

    def start(self, seed: Optional[int]) -> RunResult:
        result = RunResult(self.program.name, self.backend, self.herald_mode, seed)
        branches: List[RunResult] = []
        self._execute(result, 0, branches)
        if self.herald_mode is HeraldMode.EXHAUSTIVE:
            main = _copy_result(next((b for b in branches if b.success), branches[0]))
            main.branches = branches
            return main
        return branches[0]

    def _execute(self, result: RunResult, start: int, finished: List[RunResult]) -> None:
        for index in range(start, len(self.program)):
            instruction = self.program.instructions[index]
            if result.register is None and not isinstance(instruction, (Init, Barrier)):
                raise ProtocolError(f"{instruction} before the register is initialised", index)
            try:
                if isinstance(instruction, Fuse):
                    if self.herald_mode is HeraldMode.EXHAUSTIVE:
                        self._branch(result, index, finished)
                        return
                    if not self._fuse(result, index):
                        finished.append(result)
                        return
                elif not self._apply(result, index, instruction):
                    finished.append(result)
                    return
            except (FusegraphError, ValueError) as exc:
                if isinstance(exc, ProtocolError):
                    raise
                raise ProtocolError(f"{instruction}: {exc}", index) from exc
        finished.append(result)

    def _branch(self, result: RunResult, index: int, finished: List[RunResult]) -> None:
        for pattern in (SUCCESS_PATTERN,) + FAILURE_PATTERNS:
            child = _copy_result(result)
            try:
                outcome = child.register.fuse(0, 1, pattern)
            except ZeroProbabilityBranch:
                continue
            child.heralds.append(outcome)
            child.weight *= outcome.probability
            if outcome.success:
                self._execute(child, index + 1, finished)
            else:
                child.completed = False
                child.failure = f"FusionFailed at instruction {index}"
                finished.append(child)

    def _fuse(self, result: RunResult, index: int) -> bool:
        pattern = SUCCESS_PATTERN if self.herald_mode is HeraldMode.FORCE else None
        try:
            outcome = result.register.fuse(0, 1, pattern)
        except ZeroProbabilityBranch:
            logger.warning("Forced herald at instruction %d has probability 0", index)
            result.weight = 0.0
            result.completed = False
            result.failure = f"ZeroProbabilityBranch at instruction {index}"
            return False
        result.heralds.append(outcome)
        result.weight *= outcome.probability
        if self.noise is not None:
            self._record_clicks(result, outcome, index)
        if not outcome.success:
            logger.debug("Fusion at instruction %d failed with %s", index, outcome.pattern)
            result.completed = False
            result.failure = f"FusionFailed at instruction {index}"
            return False
        return True

    def _record_clicks(self, result: RunResult, outcome: HeraldOutcome, index: int) -> None:
        times = sample_arrival(self.noise.wavepacket, self.rng, 2)
        for atom, (polarization, time_ns) in enumerate(zip(outcome.pattern, times), start=1):
            result.clicks.append(
                ClickRecord(
                    Detector(f"D_{polarization}"),
                    float(time_ns),
                    f"fuse{index}@S{atom}",
                    self.run_id,
                )
            )
        if outcome.success:
            delta = MismatchEvent(float(times[0] - times[1]))
            apply_noise(result.register, delta, self.noise, self.rng)

    def _apply(self, result: RunResult, index: int, instruction: Instruction) -> bool:
        # pylint: disable=too-many-branches
        register = result.register
        if isinstance(instruction, Init):
            result.register = init_register(
                instruction.spin_state, self.backend, self.rng, self.max_qubits
            )
            if self.noise is not None and self.noise.depolarizing_per_emission > 0:
                result.register.emission_listener = emission_listener(self.noise, self.rng)
        elif isinstance(instruction, Emit):
            register.emit_photon(register.spin(instruction.atom))
        elif isinstance(instruction, Rotate):
            atoms = (1, 2) if instruction.atom is None else (instruction.atom,)
            for atom in atoms:
                register.apply_rotation(register.spin(atom), instruction.theta, instruction.phase)
        elif isinstance(instruction, PhaseZ):
            register.apply_phase_z(register.spin(instruction.atom), instruction.phi)
        elif isinstance(instruction, Hadamard):
            register.apply_hadamard(instruction.qubit)
        elif isinstance(instruction, PauliGate):
            register.apply_pauli(instruction.qubit, instruction.letter)
        elif isinstance(instruction, Wait):
            if self.noise is not None:
                apply_noise(register, WaitEvent(instruction.duration_us), self.noise, self.rng)
        elif isinstance(instruction, MeasureSpin):
            loss = self.noise.loss_per_photon if self.noise is not None else 0.0
            outcome, attempts = readout_spin(
                register,
                instruction.atom,
                instruction.basis,
                instruction.max_attempts,
                loss,
                self.rng,
            )
            result.measurements.append(
                MeasurementRecord(
                    index, f"S{instruction.atom}", instruction.basis.value, outcome, attempts
                )
            )
            if outcome is None:
                result.completed = False
                result.failure = f"ReadoutFailed at instruction {index}"
                return False
        elif isinstance(instruction, MeasurePhoton):
            outcome = register.measure(instruction.qubit, instruction.basis)
            result.measurements.append(
                MeasurementRecord(
                    index, str(register.label(instruction.qubit)), instruction.basis.value, outcome
                )
            )
        elif isinstance(instruction, ReduceRedundancy):
            drop = 2 if instruction.keep == 1 else 1
            register.reduce_redundant_vertex(register.spin(instruction.keep), register.spin(drop))
        elif isinstance(instruction, Barrier):
            if self.snapshots and register is not None:
                result.snapshots[instruction.label] = register.copy()
        else:
            raise ProtocolError(f"unsupported instruction {instruction}", index)
        return True


def _copy_result(result: RunResult) -> RunResult:
    return RunResult(
        program=result.program,
        backend=result.backend,
        herald_mode=result.herald_mode,
        seed=result.seed,
        register=None if result.register is None else result.register.copy(),
        heralds=list(result.heralds),
        clicks=list(result.clicks),
        measurements=list(result.measurements),
        completed=result.completed,
        failure=result.failure,
        weight=result.weight,
        snapshots=dict(result.snapshots),
    )


def run(
    program: ProtocolProgram,
    backend: BackendKind = BackendKind.AUTO,
    seed: Optional[int] = None,
    herald_mode: HeraldMode = HeraldMode.SAMPLE,
    noise: Optional[NoiseModel] = None,
    snapshots: bool = False,
    rng: Optional[np.random.Generator] = None,
    max_qubits: int = settings.DENSE_QUBIT_LIMIT,
    run_id: int = 0,
) -> RunResult:
    """Execute a program.

    Args:
        program: Instructions to run.
        backend: Simulator to use; AUTO picks the tableau for Clifford programs.
        seed: Seed of a fresh generator when ``rng`` is not given.
        herald_mode: Sample heralds, force success, or follow every branch.
        noise: Optional noise model applied during the run.
        snapshots: Keep a copy of the register at every barrier.
        rng: Generator to draw from instead of seeding a new one.
        max_qubits: Dense backend limit.
        run_id: Attempt number stamped on click records.

    Returns:
        The run result; in exhaustive mode the successful branch, with all
        branches listed under ``branches``.

    Raises:
        ProtocolError: wrapping any backend error, with the instruction index.
    """
    resolved = resolve_backend(program, backend, max_qubits)
    generator = rng if rng is not None else np.random.default_rng(seed)
    started = time.perf_counter()
    execution = _Execution(
        program, resolved, herald_mode, generator, noise, snapshots, max_qubits, run_id
    )
    result = execution.start(seed)
    result.elapsed_s = time.perf_counter() - started
    return result
