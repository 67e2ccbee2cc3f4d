"""Signed Pauli strings."""

from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple

import numpy as np

_LETTERS = "IXYZ"

# (a, b) -> (power of i, letter) with a * b = i**power * letter
_PRODUCT: Dict[Tuple[str, str], Tuple[int, str]] = {
    ("X", "Y"): (1, "Z"),
    ("Y", "Z"): (1, "X"),
    ("Z", "X"): (1, "Y"),
    ("Y", "X"): (3, "Z"),
    ("Z", "Y"): (3, "X"),
    ("X", "Z"): (3, "Y"),
}


def _letter_product(a: str, b: str) -> Tuple[int, str]:
    if a == "I":
        return 0, b
    if b == "I":
        return 0, a
    if a == b:
        return 0, "I"
    return _PRODUCT[(a, b)]


@dataclass(frozen=True)
class PauliString:
    """Hermitian Pauli operator with a real sign.

    Attributes:
        letters: One of I, X, Y, Z per qubit, qubit 0 first.
        sign: +1 or -1.
    """

    letters: str
    sign: int = 1

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise ValueError(f"Pauli sign must be +1 or -1, got {self.sign}")
        if any(letter not in _LETTERS for letter in self.letters):
            raise ValueError(f"Invalid Pauli letters {self.letters!r}")

    @classmethod
    def identity(cls, n_qubits: int) -> "PauliString":
        """Identity on n qubits."""
        return cls("I" * n_qubits)

    @classmethod
    def from_letters(
        cls, n_qubits: int, letters: Mapping[int, str], sign: int = 1
    ) -> "PauliString":
        """Build a string from a {qubit: letter} map, identity elsewhere."""
        chars = ["I"] * n_qubits
        for qubit, letter in letters.items():
            if not 0 <= qubit < n_qubits:
                raise ValueError(f"Qubit {qubit} outside register of {n_qubits}")
            chars[qubit] = letter
        return cls("".join(chars), sign)

    @classmethod
    def parse(cls, text: str) -> "PauliString":
        """Parse strings such as ``"-ZZII"`` or ``"+XIZ"``."""
        text = text.strip()
        sign = 1
        if text[:1] in "+-":
            sign = -1 if text[0] == "-" else 1
            text = text[1:]
        return cls(text, sign)

    @classmethod
    def from_bits(cls, xbits: np.ndarray, zbits: np.ndarray, sign: int = 1) -> "PauliString":
        """Build a string from symplectic bit vectors (x=z=1 is Y)."""
        table = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
        letters = "".join(table[(int(x), int(z))] for x, z in zip(xbits, zbits))
        return cls(letters, sign)

    @property
    def n_qubits(self) -> int:
        """Number of qubits the string acts on."""
        return len(self.letters)

    @property
    def support(self) -> Tuple[int, ...]:
        """Qubits carrying a non-identity letter."""
        return tuple(i for i, letter in enumerate(self.letters) if letter != "I")

    @property
    def xbits(self) -> np.ndarray:
        """X part of the symplectic representation."""
        return np.array([letter in "XY" for letter in self.letters], dtype=np.uint8)

    @property
    def zbits(self) -> np.ndarray:
        """Z part of the symplectic representation."""
        return np.array([letter in "YZ" for letter in self.letters], dtype=np.uint8)

    def letter(self, qubit: int) -> str:
        """Letter acting on one qubit."""
        return self.letters[qubit]

    def commutes(self, other: "PauliString") -> bool:
        """Whether the two strings commute (symplectic product zero)."""
        anti = 0
        for a, b in zip(self.letters, other.letters):
            if a != "I" and b != "I" and a != b:
                anti ^= 1
        return anti == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        if self.n_qubits != other.n_qubits:
            raise ValueError("Pauli strings act on different registers")
        power = 0
        letters = []
        for a, b in zip(self.letters, other.letters):
            p, c = _letter_product(a, b)
            power += p
            letters.append(c)
        if power % 2:
            raise ValueError("Product of anticommuting Pauli strings is not Hermitian")
        sign = self.sign * other.sign * (-1 if power % 4 == 2 else 1)
        return PauliString("".join(letters), sign)

    def __neg__(self) -> "PauliString":
        return PauliString(self.letters, -self.sign)

    def restricted(self, qubits: Iterable[int]) -> "PauliString":
        """Keep only the listed qubits, in the given order."""
        return PauliString("".join(self.letters[q] for q in qubits), self.sign)

    def extended(self, n_qubits: int) -> "PauliString":
        """Pad with identities up to n qubits."""
        return PauliString(self.letters + "I" * (n_qubits - self.n_qubits), self.sign)

    def __str__(self) -> str:
        return ("+" if self.sign > 0 else "-") + self.letters
