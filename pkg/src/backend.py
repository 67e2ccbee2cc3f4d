"""Backend interface shared by the state-vector and tableau simulators.

A backend holds the quantum state of an ordered register and knows nothing
about spins or photons; :mod:`src.register` adds that bookkeeping.
"""

import math
from abc import ABC, abstractmethod
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from src import settings
from src.pauli import PauliString
from src.qubits import Basis

HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class BackendKind(Enum):
    """Available simulators."""

    AUTO = "auto"
    DENSE = "dense"
    TABLEAU = "tableau"


def rotation_matrix(theta: float, phase: float = 0.0) -> np.ndarray:
    """Spin rotation by ``theta`` about an equatorial axis set by ``phase``.

    With phase 0: |0> -> cos(t/2)|0> + sin(t/2)|1> and
    |1> -> -sin(t/2)|0> + cos(t/2)|1>.
    """
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array(
        [[c, -s * np.exp(-1j * phase)], [s * np.exp(1j * phase), c]], dtype=complex
    )


def phase_matrix(phi: float) -> np.ndarray:
    """diag(1, e^{i phi}), the free-precession phase of the |1> component."""
    return np.array([[1, 0], [0, np.exp(1j * phi)]], dtype=complex)


def basis_change(basis: Basis) -> Optional[np.ndarray]:
    """Rotation taking the +1 eigenstate of ``basis`` to |0>, None for Z."""
    if basis is Basis.X:
        return rotation_matrix(-math.pi / 2, 0.0)
    if basis is Basis.Y:
        return rotation_matrix(math.pi / 2, -math.pi / 2)
    return None


class QuantumState(ABC):
    """Pure state of an ordered qubit register."""

    @property
    @abstractmethod
    def n_qubits(self) -> int:
        """Number of qubits currently held."""

    @abstractmethod
    def copy(self) -> "QuantumState":
        """Independent deep copy."""

    @abstractmethod
    def apply_matrix(self, qubit: int, matrix: np.ndarray, name: str = "U") -> None:
        """Apply a single-qubit unitary in place."""

    @abstractmethod
    def apply_cnot(self, control: int, target: int) -> None:
        """Controlled-NOT."""

    @abstractmethod
    def apply_cz(self, first: int, second: int) -> None:
        """Controlled-Z."""

    @abstractmethod
    def append_qubit(self) -> int:
        """Append a qubit in |0> and return its index."""

    @abstractmethod
    def measure_pauli(
        self,
        pauli: PauliString,
        rng: Optional[np.random.Generator] = None,
        forced: Optional[int] = None,
    ) -> Tuple[int, float]:
        """Project onto an eigenspace of ``pauli``.

        Args:
            pauli: Observable to measure.
            rng: Source of randomness when the outcome is not forced.
            forced: Outcome (+1 or -1) to post-select on.

        Returns:
            The outcome and its Born probability.

        Raises:
            ZeroProbabilityBranch: if the forced outcome cannot occur.
        """

    @abstractmethod
    def remove_qubit(self, qubit: int) -> None:
        """Drop a qubit that is in a Z eigenstate, shifting later indices down."""

    @abstractmethod
    def expectation(self, pauli: PauliString) -> float:
        """Exact expectation value of a Pauli observable."""

    # --- Named gates built on apply_matrix ---

    def apply_rotation(self, qubit: int, theta: float, phase: float = 0.0) -> None:
        """Rotate one qubit, see :func:`rotation_matrix`."""
        self.apply_matrix(qubit, rotation_matrix(theta, phase), f"R({theta:.6g},{phase:.6g})")

    def apply_hadamard(self, qubit: int) -> None:
        """Hadamard gate."""
        self.apply_matrix(qubit, HADAMARD, "H")

    def apply_pauli(self, qubit: int, letter: str) -> None:
        """Single-qubit Pauli gate."""
        if letter != "I":
            self.apply_matrix(qubit, PAULI_MATRICES[letter], letter)

    def apply_phase_z(self, qubit: int, phi: float) -> None:
        """Phase ``phi`` on the |1> component."""
        self.apply_matrix(qubit, phase_matrix(phi), f"P({phi:.6g})")

    def measure(
        self,
        qubit: int,
        basis: Basis,
        rng: Optional[np.random.Generator] = None,
        forced: Optional[int] = None,
    ) -> Tuple[int, float]:
        """Single-qubit measurement in X, Y or Z."""
        pauli = PauliString.from_letters(self.n_qubits, {qubit: basis.value})
        return self.measure_pauli(pauli, rng=rng, forced=forced)


def choose_outcome(
    prob_plus: float, rng: Optional[np.random.Generator], forced: Optional[int]
) -> int:
    """Pick +1/-1 from the +1 probability, honouring a forced outcome."""
    if forced is not None:
        if forced not in (1, -1):
            raise ValueError(f"Forced outcome must be +1 or -1, got {forced}")
        return forced
    if prob_plus >= 1.0 - settings.PROBABILITY_TOLERANCE:
        return 1
    if prob_plus <= settings.PROBABILITY_TOLERANCE:
        return -1
    if rng is None:
        raise ValueError("A random generator is needed for an unforced measurement")
    return 1 if rng.random() < prob_plus else -1
