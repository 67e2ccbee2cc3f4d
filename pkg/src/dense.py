"""State-vector backend.

Amplitudes are kept as a tensor of shape (2,) * n so every gate is a
``tensordot`` on one axis. Qubit 0 is the first (most significant) axis.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from src import settings
from src.backend import PAULI_MATRICES, QuantumState, choose_outcome
from src.errors import SimulationError, TooLarge, ZeroProbabilityBranch
from src.pauli import PauliString

logger = logging.getLogger(__name__)


class DenseState(QuantumState):
    """Dense complex amplitude vector over an ordered register."""

    def __init__(self, amplitudes: np.ndarray, max_qubits: int = settings.DENSE_QUBIT_LIMIT):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n_qubits = int(round(np.log2(amplitudes.size))) if amplitudes.size else 0
        if amplitudes.size != 2**n_qubits:
            raise ValueError(f"Amplitude count {amplitudes.size} is not a power of two")
        if n_qubits > max_qubits:
            raise TooLarge(f"{n_qubits} qubits exceed the dense limit of {max_qubits}")
        self._psi = amplitudes.reshape((2,) * n_qubits)
        self._max_qubits = max_qubits

    @classmethod
    def zeros(cls, n_qubits: int, max_qubits: int = settings.DENSE_QUBIT_LIMIT) -> "DenseState":
        """|0...0> on n qubits."""
        if n_qubits > max_qubits:
            raise TooLarge(f"{n_qubits} qubits exceed the dense limit of {max_qubits}")
        psi = np.zeros(2**n_qubits, dtype=complex)
        psi[0] = 1.0
        return cls(psi, max_qubits)

    @property
    def n_qubits(self) -> int:
        return self._psi.ndim

    @property
    def amplitudes(self) -> np.ndarray:
        """Flat amplitude vector, qubit 0 most significant."""
        return self._psi.reshape(-1).copy()

    def norm(self) -> float:
        """Euclidean norm of the amplitude vector."""
        return float(np.linalg.norm(self._psi))

    def copy(self) -> "DenseState":
        return DenseState(self._psi.reshape(-1).copy(), self._max_qubits)

    def apply_matrix(self, qubit: int, matrix: np.ndarray, name: str = "U") -> None:
        self._psi = np.moveaxis(np.tensordot(matrix, self._psi, axes=([1], [qubit])), 0, qubit)

    def apply_cnot(self, control: int, target: int) -> None:
        new = self._psi.copy()
        index_10 = [slice(None)] * self.n_qubits
        index_11 = [slice(None)] * self.n_qubits
        index_10[control], index_10[target] = 1, 0
        index_11[control], index_11[target] = 1, 1
        new[tuple(index_10)] = self._psi[tuple(index_11)]
        new[tuple(index_11)] = self._psi[tuple(index_10)]
        self._psi = new

    def apply_cz(self, first: int, second: int) -> None:
        index = [slice(None)] * self.n_qubits
        index[first], index[second] = 1, 1
        self._psi[tuple(index)] *= -1

    def append_qubit(self) -> int:
        if self.n_qubits + 1 > self._max_qubits:
            raise TooLarge(
                f"appending a qubit would exceed the dense limit of {self._max_qubits}"
            )
        self._psi = np.stack([self._psi, np.zeros_like(self._psi)], axis=-1)
        return self.n_qubits - 1

    def _apply_pauli_string(self, pauli: PauliString) -> np.ndarray:
        psi = self._psi
        for qubit in pauli.support:
            matrix = PAULI_MATRICES[pauli.letter(qubit)]
            psi = np.moveaxis(np.tensordot(matrix, psi, axes=([1], [qubit])), 0, qubit)
        return pauli.sign * psi

    def expectation(self, pauli: PauliString) -> float:
        if pauli.n_qubits != self.n_qubits:
            raise ValueError(f"{pauli} does not act on {self.n_qubits} qubits")
        return float(np.real(np.vdot(self._psi, self._apply_pauli_string(pauli))))

    def measure_pauli(
        self,
        pauli: PauliString,
        rng: Optional[np.random.Generator] = None,
        forced: Optional[int] = None,
    ) -> Tuple[int, float]:
        flipped = self._apply_pauli_string(pauli)
        value = float(np.real(np.vdot(self._psi, flipped)))
        prob_plus = min(max((1.0 + value) / 2.0, 0.0), 1.0)
        outcome = choose_outcome(prob_plus, rng, forced)
        probability = prob_plus if outcome == 1 else 1.0 - prob_plus
        if probability <= settings.PROBABILITY_TOLERANCE:
            raise ZeroProbabilityBranch(f"outcome {outcome:+d} of {pauli} has probability 0")
        projected = (self._psi + outcome * flipped) / 2.0
        self._psi = projected / np.linalg.norm(projected)
        return outcome, probability

    def remove_qubit(self, qubit: int) -> None:
        zero = np.take(self._psi, 0, axis=qubit)
        one = np.take(self._psi, 1, axis=qubit)
        norm_zero, norm_one = np.linalg.norm(zero), np.linalg.norm(one)
        if min(norm_zero, norm_one) > 1e-9:
            raise SimulationError(f"qubit {qubit} is not in a Z eigenstate and cannot be removed")
        kept = zero if norm_zero >= norm_one else one
        self._psi = kept / np.linalg.norm(kept)

    def overlap(self, other: "DenseState") -> float:
        """|<self|other>|^2, insensitive to global phase."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("States live on registers of different size")
        return float(abs(np.vdot(self._psi, other._psi)) ** 2)
