"""Two-emitter qubit register.

The register pairs a backend state with the labels of its qubits: the two
spins always sit at indices 0 and 1, photons follow in emission order.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from src import settings
from src.backend import BackendKind, QuantumState, basis_change
from src.dense import DenseState
from src.pauli import PauliString
from src.qubits import Basis, QubitId, QubitKind
from src.tableau import StabilizerTableau

logger = logging.getLogger(__name__)

QubitRef = Union[QubitId, int]
Pattern = Tuple[str, str]

SUCCESS_PATTERN: Pattern = ("R", "L")
FAILURE_PATTERNS: Tuple[Pattern, Pattern] = (("R", "R"), ("L", "L"))


class SpinState(Enum):
    """Initial state of the two spins."""

    ZERO = "zero"
    PLUS = "plus"
    PAIR_BELL = "pair_bell"


@dataclass(frozen=True)
class HeraldOutcome:
    """Detector pattern of one fusion attempt.

    Attributes:
        success: One photon in each polarization detector.
        pattern: Polarization seen for the photon of atom 1 and atom 2.
        probability: Born probability of this pattern.
    """

    success: bool
    pattern: Pattern
    probability: float


EmissionListener = Callable[["Register", QubitId, QubitId], None]


def _key(qubit: QubitId) -> Tuple[QubitKind, int, Optional[int], bool]:
    return qubit.kind, qubit.emitter, qubit.order, qubit.herald


def make_state(
    backend: BackendKind, n_qubits: int, max_qubits: int = settings.DENSE_QUBIT_LIMIT
) -> QuantumState:
    """Fresh |0...0> on the requested backend (AUTO means dense)."""
    if backend is BackendKind.TABLEAU:
        return StabilizerTableau.zeros(n_qubits)
    return DenseState.zeros(n_qubits, max_qubits)


class Register:
    """Labelled qubit register driven by the protocol instructions.

    Attributes:
        state: Backend holding the amplitudes or the tableau.
        labels: One QubitId per register position.
        rng: Generator for sampled measurement outcomes; None forces +1
            wherever an outcome does not affect the post-measurement state.
        emission_listener: Called as ``listener(register, spin, photon)``
            after every emission, heralds included. Noise models hook here.
    """

    def __init__(
        self,
        state: QuantumState,
        labels: List[QubitId],
        rng: Optional[np.random.Generator] = None,
    ):
        if len(labels) != state.n_qubits:
            raise ValueError("Every qubit needs exactly one label")
        if [q.index for q in labels] != list(range(len(labels))):
            raise ValueError("Labels must be contiguous and in register order")
        if sum(q.is_spin for q in labels) != settings.N_SPINS:
            raise ValueError(f"A register holds exactly {settings.N_SPINS} spins")
        self.state = state
        self.labels = list(labels)
        self.rng = rng
        self.emission_listener: Optional[EmissionListener] = None
        self._photon_count = sum(1 for q in labels if not q.is_spin and not q.herald)
        self._herald_count = sum(1 for q in labels if q.herald)

    # --- Bookkeeping ---

    @property
    def n_qubits(self) -> int:
        """Number of qubits, spins included."""
        return len(self.labels)

    @property
    def backend(self) -> BackendKind:
        """Backend kind of the held state."""
        if isinstance(self.state, StabilizerTableau):
            return BackendKind.TABLEAU
        return BackendKind.DENSE

    @property
    def photons(self) -> List[QubitId]:
        """Photon labels in register order."""
        return [q for q in self.labels if not q.is_spin]

    def spin(self, emitter: int) -> QubitId:
        """Label of atom 1 or atom 2."""
        for qubit in self.labels:
            if qubit.is_spin and qubit.emitter == emitter:
                return qubit
        raise ValueError(f"No spin for emitter {emitter}")

    def index(self, qubit: QubitRef) -> int:
        """Current register position of a label or raw index."""
        if isinstance(qubit, (int, np.integer)):
            if not 0 <= qubit < self.n_qubits:
                raise ValueError(f"Qubit {qubit} outside register of {self.n_qubits}")
            return int(qubit)
        wanted = _key(qubit)
        for label in self.labels:
            if _key(label) == wanted:
                return label.index
        raise ValueError(f"Qubit {qubit} is not in the register")

    def label(self, qubit: QubitRef) -> QubitId:
        """Label currently stored at the qubit's position."""
        return self.labels[self.index(qubit)]

    def pauli(self, letters: Dict[QubitRef, str], sign: int = 1) -> PauliString:
        """Pauli string over the register from a {qubit: letter} map."""
        return PauliString.from_letters(
            self.n_qubits, {self.index(q): letter for q, letter in letters.items()}, sign
        )

    def copy(self) -> "Register":
        """Independent copy sharing the random generator."""
        clone = Register(self.state.copy(), self.labels, self.rng)
        clone.emission_listener = self.emission_listener
        clone._photon_count = self._photon_count
        clone._herald_count = self._herald_count
        return clone

    def _remove_index(self, index: int) -> None:
        self.state.remove_qubit(index)
        del self.labels[index]
        self.labels = [q if q.index < index else q.moved_to(q.index - 1) for q in self.labels]

    # --- Gates ---

    def apply_rotation(self, qubit: QubitRef, theta: float, phase: float = 0.0) -> None:
        """Equatorial-axis rotation, see :func:`src.backend.rotation_matrix`."""
        self.state.apply_rotation(self.index(qubit), theta, phase)

    def apply_hadamard(self, qubit: QubitRef) -> None:
        """Hadamard gate."""
        self.state.apply_hadamard(self.index(qubit))

    def apply_pauli(self, qubit: QubitRef, letter: str) -> None:
        """Pauli X, Y or Z (I is a no-op)."""
        self.state.apply_pauli(self.index(qubit), letter)

    def apply_phase_z(self, qubit: QubitRef, phi: float) -> None:
        """Phase ``phi`` on the |1> component."""
        self.state.apply_phase_z(self.index(qubit), phi)

    # --- Emission and fusion ---

    def emit_photon(self, spin: QubitRef, herald: bool = False) -> QubitId:
        """Copy the spin's Z value onto a new photon appended at the end."""
        source = self.label(spin)
        if not source.is_spin:
            raise ValueError(f"{source} is not a spin and cannot emit")
        index = self.state.append_qubit()
        self.state.apply_cnot(source.index, index)
        if herald:
            self._herald_count += 1
            order = self._herald_count
        else:
            self._photon_count += 1
            order = self._photon_count
        photon = QubitId(index, QubitKind.PHOTON, source.emitter, order, herald)
        self.labels.append(photon)
        if self.emission_listener is not None:
            self.emission_listener(self, source, photon)
        return photon

    def fuse(
        self, spin1: QubitRef = 0, spin2: QubitRef = 1, pattern: Optional[Pattern] = None
    ) -> HeraldOutcome:
        """Cavity-assisted fusion of the two spins.

        Each spin emits a herald photon; one R and one L click projects the
        spins onto span{|01>, |10>}. The heralds are then measured in X and
        the Z correction erases which atom sent which photon.

        Args:
            spin1: First spin.
            spin2: Second spin.
            pattern: Detector pattern to post-select on, sampled when None.

        Raises:
            ZeroProbabilityBranch: if the requested pattern cannot occur.
        """
        first, second = self.label(spin1), self.label(spin2)
        if not (first.is_spin and second.is_spin) or first.emitter == second.emitter:
            raise ValueError("Fusion needs the two distinct spins")
        if pattern is not None and pattern not in (SUCCESS_PATTERN,) + FAILURE_PATTERNS:
            raise ValueError(f"Unknown herald pattern {pattern}")
        herald1 = self.emit_photon(first, herald=True)
        herald2 = self.emit_photon(second, herald=True)
        parity = self.pauli({herald1: "Z", herald2: "Z"})
        forced_parity = None if pattern is None else (-1 if pattern == SUCCESS_PATTERN else 1)
        parity_outcome, probability = self.state.measure_pauli(parity, self.rng, forced_parity)

        if parity_outcome == -1:
            for herald, spin in ((herald2, second), (herald1, first)):
                if self._drop(herald, Basis.X) == -1:
                    self.apply_pauli(spin, "Z")
            outcome = HeraldOutcome(True, SUCCESS_PATTERN, probability)
        else:
            forced_z = None if pattern is None else (1 if pattern == ("R", "R") else -1)
            z_outcome, z_probability = self.state.measure(
                self.index(herald1), Basis.Z, self.rng, forced_z
            )
            self._drop(herald2, Basis.Z)
            self._drop(herald1, Basis.Z)
            outcome = HeraldOutcome(
                False, FAILURE_PATTERNS[0 if z_outcome == 1 else 1], probability * z_probability
            )
        logger.debug("Fusion herald %s with probability %.6g", outcome.pattern, outcome.probability)
        return outcome

    # --- Measurement ---

    def measure(
        self, qubit: QubitRef, basis: Basis, drop: bool = False, forced: Optional[int] = None
    ) -> int:
        """Projective single-qubit measurement; photons may be dropped after."""
        label = self.label(qubit)
        if drop:
            if label.is_spin:
                raise ValueError("Spins stay in the register and cannot be dropped")
            return self._drop(label, basis, forced)
        outcome, _ = self.state.measure(label.index, basis, self.rng, forced)
        return outcome

    def _drop(self, qubit: QubitRef, basis: Basis, forced: Optional[int] = None) -> int:
        index = self.index(qubit)
        if forced is None and self.rng is None:
            forced = self._free_outcome(index, basis)
        outcome, _ = self.state.measure(index, basis, self.rng, forced)
        change = basis_change(basis)
        if change is not None:
            self.state.apply_matrix(index, change, f"to_Z({basis.value})")
        self._remove_index(index)
        return outcome

    def _free_outcome(self, index: int, basis: Basis) -> int:
        value = self.state.expectation(
            PauliString.from_letters(self.n_qubits, {index: basis.value})
        )
        if value <= -1.0 + settings.PROBABILITY_TOLERANCE:
            return -1
        return 1

    def measure_pauli(
        self, pauli: PauliString, forced: Optional[int] = None
    ) -> Tuple[int, float]:
        """Measure a multi-qubit Pauli observable, returning outcome and probability."""
        return self.state.measure_pauli(pauli, self.rng, forced)

    def expectation(self, pauli: PauliString) -> float:
        """Exact expectation value of a Pauli observable."""
        return self.state.expectation(pauli)

    def remove(self, qubit: QubitRef) -> None:
        """Drop a photon already in a Z eigenstate."""
        label = self.label(qubit)
        if label.is_spin:
            raise ValueError("Spins stay in the register and cannot be removed")
        self._remove_index(label.index)

    def transfer_to_photon(self, atom: QubitRef) -> QubitId:
        """Move the spin's qubit onto a fresh photon and reset the spin to |0>."""
        spin = self.label(atom)
        photon = self.emit_photon(spin)
        outcome = self.measure(spin, Basis.X)
        if outcome == -1:
            self.apply_pauli(photon, "Z")
        self.apply_hadamard(spin)
        if outcome == -1:
            self.apply_pauli(spin, "X")
        return photon

    def reduce_redundant_vertex(self, keep: QubitRef, drop: QubitRef) -> int:
        """Collapse a two-qubit vertex onto ``keep`` by an X measurement of ``drop``.

        ``drop`` is left in |+>, an isolated vertex of the graph.
        """
        outcome = self.measure(drop, Basis.X)
        if outcome == -1:
            self.apply_pauli(keep, "Z")
            self.apply_pauli(drop, "Z")
        return outcome


def init_register(
    spin_state: SpinState = SpinState.PLUS,
    backend: BackendKind = BackendKind.DENSE,
    rng: Optional[np.random.Generator] = None,
    max_qubits: int = settings.DENSE_QUBIT_LIMIT,
) -> Register:
    """Two spins and no photons, prepared in ``spin_state``."""
    labels = [QubitId(i, QubitKind.SPIN, i + 1) for i in range(settings.N_SPINS)]
    register = Register(make_state(backend, settings.N_SPINS, max_qubits), labels, rng)
    if spin_state is SpinState.PLUS:
        register.apply_hadamard(0)
        register.apply_hadamard(1)
    elif spin_state is SpinState.PAIR_BELL:
        register.apply_hadamard(0)
        register.state.apply_cnot(0, 1)
        register.apply_pauli(1, "X")
    return register

