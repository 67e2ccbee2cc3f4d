"""Protocol instruction set and the program container.

Atoms are addressed as 1 and 2; other qubits by register index (atom k
sits at index k - 1, photons follow in emission order). Programs are
stored as JSON Lines: a header object, then one instruction per line.
"""

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, Iterator, List, Mapping, Optional, Tuple, Type, Union

from src import settings
from src.errors import ConfigError
from src.graphs import GraphSpec, graph_from_dict, graph_to_dict
from src.qubits import Basis
from src.register import SpinState


def is_quarter_turn(angle: float) -> bool:
    """Whether ``angle`` is a multiple of pi/2 (up to rounding)."""
    turns = angle / (math.pi / 2)
    return abs(turns - round(turns)) < 1e-9


def _check_atom(atom: int) -> None:
    if atom not in (1, 2):
        raise ValueError(f"Atoms are numbered 1 and 2, got {atom}")


@dataclass(frozen=True)
class Instruction:
    """Base class of every protocol step."""

    op = "instruction"

    @property
    def is_clifford(self) -> bool:
        """Whether the step can run on the tableau backend."""
        return True

    def to_record(self) -> Dict:
        """JSON-ready dictionary, enums stored by value."""
        record: Dict = {"op": self.op}
        for key, value in asdict(self).items():
            record[key] = value.value if isinstance(value, (Basis, SpinState)) else value
        return record

    def __str__(self) -> str:
        args = ", ".join(f"{k}={v}" for k, v in self.to_record().items() if k != "op")
        return f"{self.op}({args})"


@dataclass(frozen=True)
class Init(Instruction):
    """Prepare both spins, discarding any previous register."""

    spin_state: SpinState = SpinState.PLUS
    op = "init"


@dataclass(frozen=True)
class Emit(Instruction):
    """vSTIRAP photon generation from one atom."""

    atom: int
    op = "emit"

    def __post_init__(self) -> None:
        _check_atom(self.atom)


@dataclass(frozen=True)
class Rotate(Instruction):
    """Raman rotation of one atom, or of both when ``atom`` is None."""

    theta: float
    phase: float = 0.0
    atom: Optional[int] = None
    op = "rotate"

    def __post_init__(self) -> None:
        if self.atom is not None:
            _check_atom(self.atom)

    @property
    def is_clifford(self) -> bool:
        return is_quarter_turn(self.theta) and is_quarter_turn(self.phase)


@dataclass(frozen=True)
class PhaseZ(Instruction):
    """Phase on an atom's |1> component.

    ``tag`` marks phases that come from free precession ("precession"),
    which :func:`src.protocols.calibrate_phases` recomputes.
    """

    atom: int
    phi: float
    tag: str = ""
    op = "phase_z"

    def __post_init__(self) -> None:
        _check_atom(self.atom)

    @property
    def is_clifford(self) -> bool:
        return is_quarter_turn(self.phi)


@dataclass(frozen=True)
class Hadamard(Instruction):
    """Hadamard on a register index."""

    qubit: int
    op = "hadamard"


@dataclass(frozen=True)
class PauliGate(Instruction):
    """Pauli frame correction on a register index."""

    qubit: int
    letter: str
    op = "pauli"

    def __post_init__(self) -> None:
        if self.letter not in ("X", "Y", "Z"):
            raise ValueError(f"Pauli letter must be X, Y or Z, got {self.letter!r}")


@dataclass(frozen=True)
class Fuse(Instruction):
    """Cavity-assisted fusion of the two atoms."""

    op = "fuse"


@dataclass(frozen=True)
class Wait(Instruction):
    """Idle time of both atoms, in microseconds."""

    duration_us: float
    op = "wait"

    def __post_init__(self) -> None:
        if self.duration_us < 0:
            raise ValueError("Wait durations cannot be negative")


@dataclass(frozen=True)
class MeasureSpin(Instruction):
    """Repeat-until-success readout of one atom."""

    atom: int
    basis: Basis = Basis.Z
    max_attempts: int = settings.READOUT_MAX_ATTEMPTS
    op = "measure_spin"

    def __post_init__(self) -> None:
        _check_atom(self.atom)
        if self.max_attempts < 1:
            raise ValueError("At least one readout attempt is needed")


@dataclass(frozen=True)
class MeasurePhoton(Instruction):
    """Single-photon measurement of a register index."""

    qubit: int
    basis: Basis = Basis.Z
    op = "measure_photon"


@dataclass(frozen=True)
class ReduceRedundancy(Instruction):
    """Measure the other atom in X so ``keep`` alone carries the root vertex."""

    keep: int = 1
    op = "reduce_redundancy"

    def __post_init__(self) -> None:
        _check_atom(self.keep)


@dataclass(frozen=True)
class Barrier(Instruction):
    """No-op marker; runs with snapshots keep a copy of the state here."""

    label: str
    op = "barrier"


INSTRUCTION_TYPES: Dict[str, Type[Instruction]] = {
    cls.op: cls
    for cls in (
        Init,
        Emit,
        Rotate,
        PhaseZ,
        Hadamard,
        PauliGate,
        Fuse,
        Wait,
        MeasureSpin,
        MeasurePhoton,
        ReduceRedundancy,
        Barrier,
    )
}


def instruction_from_record(record: Mapping) -> Instruction:
    """Rebuild an instruction from :meth:`Instruction.to_record` output."""
    try:
        cls = INSTRUCTION_TYPES[record["op"]]
    except KeyError as exc:
        raise ConfigError(f"Unknown instruction {record.get('op')!r}") from exc
    kwargs = {}
    for item in fields(cls):
        if item.name not in record:
            continue
        value = record[item.name]
        if item.name == "basis":
            value = Basis(value)
        elif item.name == "spin_state":
            value = SpinState(value)
        kwargs[item.name] = value
    try:
        return cls(**kwargs)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid {record['op']} instruction: {exc}") from exc


@dataclass(frozen=True)
class ProtocolProgram:
    """Ordered instructions plus the timing they were compiled for.

    Attributes:
        name: Protocol name.
        instructions: Steps in execution order.
        photon_separation_us: T between the two atoms' emissions.
        free_evolution_us: t0 before the branch-defining pulse.
        emission_offsets_us: Extra precession time of atom 1 and atom 2.
        expected_graph: Graph the program should produce on herald success.
    """

    name: str
    instructions: Tuple[Instruction, ...]
    photon_separation_us: float = settings.PHOTON_SEPARATION_US
    free_evolution_us: float = settings.FREE_EVOLUTION_US
    emission_offsets_us: Tuple[float, float] = (0.0, 0.0)
    expected_graph: Optional[GraphSpec] = field(default=None, compare=False)

    def __iter__(self) -> Iterator[Instruction]:
        return iter(self.instructions)

    def __len__(self) -> int:
        return len(self.instructions)

    @property
    def is_clifford(self) -> bool:
        """Whether every instruction runs on the tableau backend."""
        return all(instruction.is_clifford for instruction in self.instructions)

    @property
    def n_photons(self) -> int:
        """Photons left in the register after the program."""
        return sum(isinstance(i, Emit) for i in self.instructions)

    def first_non_clifford(self) -> Optional[int]:
        """Index of the first instruction the tableau backend rejects."""
        for index, instruction in enumerate(self.instructions):
            if not instruction.is_clifford:
                return index
        return None

    def with_instructions(self, instructions: List[Instruction], **changes) -> "ProtocolProgram":
        """Copy with a new instruction list and optional metadata changes."""
        return replace(self, instructions=tuple(instructions), **changes)


def program_header(program: ProtocolProgram) -> Dict:
    """Header record of a program file."""
    return {
        "format_version": settings.FORMAT_VERSION,
        "kind": "protocol",
        "name": program.name,
        "photon_separation_us": program.photon_separation_us,
        "free_evolution_us": program.free_evolution_us,
        "emission_offsets_us": list(program.emission_offsets_us),
        "expected_graph": (
            graph_to_dict(program.expected_graph) if program.expected_graph else None
        ),
    }


def save_program(program: ProtocolProgram, path: Union[str, Path]) -> None:
    """Write a program as JSON Lines with sorted keys."""
    with open(path, "w", encoding="utf-8") as file:
        file.write(json.dumps(program_header(program), sort_keys=True) + "\n")
        for instruction in program:
            file.write(json.dumps(instruction.to_record(), sort_keys=True) + "\n")


def load_program(path: Union[str, Path]) -> ProtocolProgram:
    """Read a program written by :func:`save_program`.

    Raises:
        ConfigError: if the file is missing or malformed.
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            lines = [json.loads(line) for line in file if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read protocol file {path}: {exc}") from exc
    if not lines or lines[0].get("kind") != "protocol":
        raise ConfigError(f"{path} does not start with a protocol header")
    header = lines[0]
    graph = header.get("expected_graph")
    try:
        return ProtocolProgram(
            name=str(header.get("name", Path(path).stem)),
            instructions=tuple(instruction_from_record(r) for r in lines[1:]),
            photon_separation_us=float(
                header.get("photon_separation_us", settings.PHOTON_SEPARATION_US)
            ),
            free_evolution_us=float(header.get("free_evolution_us", settings.FREE_EVOLUTION_US)),
            emission_offsets_us=tuple(
                float(v) for v in header.get("emission_offsets_us", (0.0, 0.0))
            ),
            expected_graph=graph_from_dict(graph) if graph else None,
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"Invalid protocol header in {path}: {exc}") from exc
