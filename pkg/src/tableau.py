"""Stabilizer tableau backend.

Row ``i`` is the generator ``(-1)**signs[i] * P`` with P given by the bits
``xbits[i], zbits[i]`` (x = z = 1 is the Hermitian Y). Only the n
stabilizer rows are stored; deterministic measurements are resolved by
solving for the observable in the row span over GF(2).
"""

import logging
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.backend import PAULI_MATRICES, QuantumState, choose_outcome
from src.errors import NonCliffordOnTableau, SimulationError, ZeroProbabilityBranch
from src.gf2 import gf2_rank, gf2_solve
from src.pauli import PauliString

logger = logging.getLogger(__name__)

# Image of each letter under a single-qubit Clifford: letter -> (sign, letter)
CliffordImage = Dict[str, Tuple[int, str]]

_IMAGE_CACHE: Dict[bytes, CliffordImage] = {}


def clifford_images(matrix: np.ndarray, name: str = "U") -> CliffordImage:
    """Conjugation table ``U P U^dagger`` of a single-qubit unitary.

    Raises:
        NonCliffordOnTableau: if some Pauli is not mapped to a signed Pauli.
    """
    key = np.round(np.asarray(matrix, dtype=complex), 12).tobytes()
    if key in _IMAGE_CACHE:
        return _IMAGE_CACHE[key]
    images: CliffordImage = {}
    for letter in "XYZ":
        conjugated = matrix @ PAULI_MATRICES[letter] @ matrix.conj().T
        for candidate in "XYZ":
            overlap = np.trace(PAULI_MATRICES[candidate] @ conjugated).real / 2.0
            if abs(abs(overlap) - 1.0) < 1e-9:
                images[letter] = (1 if overlap > 0 else -1, candidate)
                break
        else:
            raise NonCliffordOnTableau(f"gate {name} is not a Clifford gate")
    _IMAGE_CACHE[key] = images
    return images


def _phase_exponent(
    x1: np.ndarray, z1: np.ndarray, x2: np.ndarray, z2: np.ndarray
) -> np.ndarray:
    """Power of i picked up by P1 * P2, summed over qubits (last axis)."""
    x1, z1, x2, z2 = (a.astype(np.int64) for a in (x1, z1, x2, z2))
    g = np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where(
            (x1 == 1) & (z1 == 0),
            z2 * (2 * x2 - 1),
            np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0),
        ),
    )
    return g.sum(axis=-1)


class StabilizerTableau(QuantumState):
    """Binary symplectic generator matrix with sign bits."""

    def __init__(self, xbits: np.ndarray, zbits: np.ndarray, signs: np.ndarray):
        self.xbits = np.array(xbits, dtype=np.uint8) % 2
        self.zbits = np.array(zbits, dtype=np.uint8) % 2
        self.signs = np.array(signs, dtype=np.uint8) % 2
        n = self.xbits.shape[0]
        if self.xbits.shape != (n, n) or self.zbits.shape != (n, n) or self.signs.shape != (n,):
            raise ValueError("Tableau needs n x n bit matrices and n sign bits")

    @classmethod
    def zeros(cls, n_qubits: int) -> "StabilizerTableau":
        """|0...0>, stabilized by every Z_i."""
        return cls(
            np.zeros((n_qubits, n_qubits), dtype=np.uint8),
            np.eye(n_qubits, dtype=np.uint8),
            np.zeros(n_qubits, dtype=np.uint8),
        )

    @classmethod
    def from_generators(cls, generators: Iterable[PauliString]) -> "StabilizerTableau":
        """Tableau of the state stabilized by independent commuting generators."""
        generators = list(generators)
        if not generators:
            raise ValueError("At least one generator is needed")
        tableau = cls(
            np.array([g.xbits for g in generators]),
            np.array([g.zbits for g in generators]),
            np.array([0 if g.sign > 0 else 1 for g in generators]),
        )
        tableau.validate()
        return tableau

    def validate(self) -> None:
        """Check independence and pairwise commutation of the rows."""
        n = self.n_qubits
        if gf2_rank(np.hstack([self.xbits, self.zbits])) != n:
            raise SimulationError("tableau rows are not independent")
        x, z = self.xbits.astype(float), self.zbits.astype(float)
        if np.any(np.rint(x @ z.T + z @ x.T) % 2):
            raise SimulationError("tableau rows do not commute")

    @property
    def n_qubits(self) -> int:
        return self.xbits.shape[0]

    def copy(self) -> "StabilizerTableau":
        return StabilizerTableau(self.xbits.copy(), self.zbits.copy(), self.signs.copy())

    def generators(self) -> List[PauliString]:
        """Rows as signed Pauli strings."""
        return [
            PauliString.from_bits(self.xbits[i], self.zbits[i], -1 if self.signs[i] else 1)
            for i in range(self.n_qubits)
        ]

    # --- Gates ---

    def apply_matrix(self, qubit: int, matrix: np.ndarray, name: str = "U") -> None:
        images = clifford_images(matrix, name)
        x, z = self.xbits[:, qubit].copy(), self.zbits[:, qubit].copy()
        masks = {"X": (x == 1) & (z == 0), "Y": (x == 1) & (z == 1), "Z": (x == 0) & (z == 1)}
        for letter, mask in masks.items():
            sign, image = images[letter]
            self.xbits[mask, qubit] = 1 if image in "XY" else 0
            self.zbits[mask, qubit] = 1 if image in "YZ" else 0
            if sign < 0:
                self.signs[mask] ^= 1

    def apply_cnot(self, control: int, target: int) -> None:
        xc, zc = self.xbits[:, control], self.zbits[:, control]
        xt, zt = self.xbits[:, target], self.zbits[:, target]
        self.signs ^= xc & zt & (xt ^ zc ^ 1)
        self.xbits[:, target] = xt ^ xc
        self.zbits[:, control] = zc ^ zt

    def apply_cz(self, first: int, second: int) -> None:
        xa, za = self.xbits[:, first], self.zbits[:, first]
        xb, zb = self.xbits[:, second], self.zbits[:, second]
        self.signs ^= xa & xb & (za ^ zb)
        self.zbits[:, first] = za ^ xb
        self.zbits[:, second] = zb ^ xa

    def append_qubit(self) -> int:
        n = self.n_qubits
        xbits = np.zeros((n + 1, n + 1), dtype=np.uint8)
        zbits = np.zeros((n + 1, n + 1), dtype=np.uint8)
        xbits[:n, :n], zbits[:n, :n] = self.xbits, self.zbits
        zbits[n, n] = 1
        self.xbits, self.zbits = xbits, zbits
        self.signs = np.append(self.signs, np.uint8(0))
        return n

    # --- Row algebra ---

    def multiply_rows(self, targets: np.ndarray, source: int) -> None:
        """Replace every row in ``targets`` by ``row[source] * row[target]``."""
        targets = np.asarray(targets, dtype=np.int64)
        if targets.size == 0:
            return
        exponent = (
            2 * self.signs[targets].astype(np.int64)
            + 2 * int(self.signs[source])
            + _phase_exponent(
                self.xbits[source], self.zbits[source], self.xbits[targets], self.zbits[targets]
            )
        ) % 4
        if np.any(exponent % 2):
            raise SimulationError("multiplied rows anticommute")
        self.signs[targets] = (exponent // 2).astype(np.uint8)
        self.xbits[targets] ^= self.xbits[source]
        self.zbits[targets] ^= self.zbits[source]

    def _anticommuting_rows(self, pauli: PauliString) -> np.ndarray:
        px, pz = pauli.xbits.astype(np.int64), pauli.zbits.astype(np.int64)
        products = (self.xbits.astype(np.int64) @ pz + self.zbits.astype(np.int64) @ px) % 2
        return np.flatnonzero(products)

    def _group_sign(self, pauli: PauliString) -> int:
        """Sign s with s * (unsigned pauli) in the stabilizer group."""
        target = np.concatenate([pauli.xbits, pauli.zbits])
        rows = np.hstack([self.xbits, self.zbits])
        coefficients = gf2_solve(rows.T, target)
        if coefficients is None:
            raise SimulationError(f"{pauli} commutes with the state but is not in its group")
        x = np.zeros(self.n_qubits, dtype=np.uint8)
        z = np.zeros(self.n_qubits, dtype=np.uint8)
        exponent = 0
        for row in np.flatnonzero(coefficients):
            exponent += 2 * int(self.signs[row]) + int(
                _phase_exponent(x, z, self.xbits[row], self.zbits[row])
            )
            x ^= self.xbits[row]
            z ^= self.zbits[row]
        return -1 if exponent % 4 == 2 else 1

    # --- Measurement ---

    def expectation(self, pauli: PauliString) -> float:
        if pauli.n_qubits != self.n_qubits:
            raise ValueError(f"{pauli} does not act on {self.n_qubits} qubits")
        if self._anticommuting_rows(pauli).size:
            return 0.0
        return float(pauli.sign * self._group_sign(pauli))

    def measure_pauli(
        self,
        pauli: PauliString,
        rng: Optional[np.random.Generator] = None,
        forced: Optional[int] = None,
    ) -> Tuple[int, float]:
        anticommuting = self._anticommuting_rows(pauli)
        if anticommuting.size == 0:
            outcome = pauli.sign * self._group_sign(pauli)
            if forced is not None and forced != outcome:
                raise ZeroProbabilityBranch(f"outcome {forced:+d} of {pauli} has probability 0")
            return outcome, 1.0
        outcome = choose_outcome(0.5, rng, forced)
        pivot = int(anticommuting[0])
        self.multiply_rows(anticommuting[1:], pivot)
        self.xbits[pivot] = pauli.xbits
        self.zbits[pivot] = pauli.zbits
        self.signs[pivot] = 0 if outcome * pauli.sign > 0 else 1
        return outcome, 0.5

    def remove_qubit(self, qubit: int) -> None:
        if np.any(self.xbits[:, qubit]):
            raise SimulationError(f"qubit {qubit} is not in a Z eigenstate and cannot be removed")
        carriers = np.flatnonzero(self.zbits[:, qubit])
        pivot = int(carriers[0])
        self.multiply_rows(carriers[1:], pivot)
        keep = np.arange(self.n_qubits) != pivot
        columns = np.arange(self.n_qubits) != qubit
        self.xbits = self.xbits[np.ix_(keep, columns)]
        self.zbits = self.zbits[np.ix_(keep, columns)]
        self.signs = self.signs[keep]
