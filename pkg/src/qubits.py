"""Qubit labels and measurement bases."""

from dataclasses import dataclass
from enum import Enum
from typing import Optional


class QubitKind(Enum):
    """Physical carrier of a qubit."""

    SPIN = "spin"
    PHOTON = "photon"


class Basis(Enum):
    """Single-qubit Pauli measurement basis."""

    X = "X"
    Y = "Y"
    Z = "Z"


@dataclass(frozen=True)
class QubitId:
    """Label of one qubit in a register.

    Spins carry their emitter number (1 or 2). Photons carry the emitting
    atom and their emission order among the photons kept in the register.
    Heralds are photons that exist only inside a fusion or readout step.
    """

    index: int
    kind: QubitKind
    emitter: int
    order: Optional[int] = None
    herald: bool = False

    @property
    def is_spin(self) -> bool:
        """Whether this qubit is one of the two atoms."""
        return self.kind is QubitKind.SPIN

    def moved_to(self, index: int) -> "QubitId":
        """Return the same label at a new register position."""
        return QubitId(index, self.kind, self.emitter, self.order, self.herald)

    def __str__(self) -> str:
        if self.is_spin:
            return f"S{self.emitter}"
        tag = "h" if self.herald else "p"
        return f"{tag}{self.order}@S{self.emitter}"
