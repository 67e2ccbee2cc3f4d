"""Stochastic Pauli noise, photon loss and repeat-until-success atom readout."""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from src import settings
from src.errors import ConfigError
from src.qubits import Basis, QubitId
from src.register import Register
from src.timing import WavePacket

logger = logging.getLogger(__name__)

PAULI_LETTERS = ("X", "Y", "Z")

Fault = Tuple[int, str]


@dataclass(frozen=True)
class NoiseModel:
    """Phenomenological noise of the two-atom source.

    Attributes:
        loss_per_photon: Probability that a photon never reaches a detector.
        depolarizing_per_emission: Probability of a random X, Y or Z on the
            spin and, independently, on the new photon after each emission.
        spin_dephasing_per_us: Dephasing rate r; a wait of t flips the
            phase of each spin with probability (1 - exp(-r t)) / 2.
        mismatch_dephasing_per_ns: Phase-flip probability per ns of
            |t_R - t_L| at fusion, capped at 1/2.
        wavepacket: Arrival-time profile of every photon.
    """

    loss_per_photon: float = settings.LOSS_PER_PHOTON
    depolarizing_per_emission: float = settings.DEPOLARIZING_PER_EMISSION
    spin_dephasing_per_us: float = settings.DEPHASING_RATE_PER_US
    mismatch_dephasing_per_ns: float = settings.MISMATCH_DEPHASING_PER_NS
    wavepacket: WavePacket = field(default_factory=WavePacket)

    def __post_init__(self) -> None:
        for name in ("loss_per_photon", "depolarizing_per_emission"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must be a probability, got {value}")
        if self.spin_dephasing_per_us < 0 or self.mismatch_dephasing_per_ns < 0:
            raise ValueError("Dephasing rates cannot be negative")

    @property
    def is_unitary_noiseless(self) -> bool:
        """Whether no Pauli fault can ever be inserted."""
        return (
            self.depolarizing_per_emission == 0.0
            and self.spin_dephasing_per_us == 0.0
            and self.mismatch_dephasing_per_ns == 0.0
        )

    def with_depolarizing(self, probability: float) -> "NoiseModel":
        """Copy with a new per-emission depolarizing probability."""
        return replace(self, depolarizing_per_emission=probability)

    def to_dict(self) -> Dict:
        """JSON-ready dictionary."""
        return {
            "loss_per_photon": self.loss_per_photon,
            "depolarizing_per_emission": self.depolarizing_per_emission,
            "spin_dephasing_per_us": self.spin_dephasing_per_us,
            "mismatch_dephasing_per_ns": self.mismatch_dephasing_per_ns,
            "wavepacket": self.wavepacket.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "NoiseModel":
        """Inverse of :meth:`to_dict`; missing keys take the defaults.

        Raises:
            ConfigError: on invalid values.
        """
        try:
            return cls(
                float(data.get("loss_per_photon", settings.LOSS_PER_PHOTON)),
                float(data.get("depolarizing_per_emission", settings.DEPOLARIZING_PER_EMISSION)),
                float(data.get("spin_dephasing_per_us", settings.DEPHASING_RATE_PER_US)),
                float(data.get("mismatch_dephasing_per_ns", settings.MISMATCH_DEPHASING_PER_NS)),
                WavePacket.from_dict(data.get("wavepacket", {})),
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid noise model: {exc}") from exc


def save_noise_model(model: NoiseModel, path: Union[str, Path]) -> None:
    """Write a noise model as an indented JSON document."""
    data = {"format_version": settings.FORMAT_VERSION, "kind": "noise", **model.to_dict()}
    with open(path, "w", encoding="utf-8") as file:
        json.dump(data, file, indent=2, sort_keys=True)
        file.write("\n")


def load_noise_model(path: Union[str, Path]) -> NoiseModel:
    """Read a noise model file.

    Raises:
        ConfigError: if the file is missing or malformed.
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            data = json.load(file)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read noise model {path}: {exc}") from exc
    return NoiseModel.from_dict(data)


# --- Noise events ---


@dataclass(frozen=True)
class EmissionEvent:
    """A spin has just emitted ``photon``."""

    spin: QubitId
    photon: QubitId


@dataclass(frozen=True)
class WaitEvent:
    """Both spins idle for ``duration_us``."""

    duration_us: float


@dataclass(frozen=True)
class MismatchEvent:
    """Fusion photons arrived ``delta_ns`` apart."""

    delta_ns: float


NoiseEvent = Union[EmissionEvent, WaitEvent, MismatchEvent]


def dephasing_flip_probability(rate_per_us: float, duration_us: float) -> float:
    """Phase-flip probability of pure dephasing over a wait."""
    return (1.0 - math.exp(-rate_per_us * duration_us)) / 2.0


def linear_mismatch_dephasing(model: NoiseModel, delta_ns: float) -> float:
    """Default |t_R - t_L| dependence: linear, capped at 1/2."""
    return min(0.5, model.mismatch_dephasing_per_ns * abs(delta_ns))


MismatchFunction = Callable[[NoiseModel, float], float]


def apply_noise(
    register: Register,
    event: NoiseEvent,
    model: NoiseModel,
    rng: np.random.Generator,
    mismatch: MismatchFunction = linear_mismatch_dephasing,
) -> List[Fault]:
    """Insert the Pauli faults drawn for one event.

    Returns:
        The (register index, letter) pairs applied.
    """
    faults: List[Fault] = []
    if isinstance(event, EmissionEvent):
        p = model.depolarizing_per_emission
        if p > 0:
            for qubit in (event.spin, event.photon):
                if rng.random() < p:
                    faults.append((register.index(qubit), PAULI_LETTERS[rng.integers(3)]))
    elif isinstance(event, WaitEvent):
        p = dephasing_flip_probability(model.spin_dephasing_per_us, event.duration_us)
        if p > 0:
            for emitter in (1, 2):
                if rng.random() < p:
                    faults.append((register.index(register.spin(emitter)), "Z"))
    elif isinstance(event, MismatchEvent):
        p = mismatch(model, event.delta_ns)
        if p > 0 and rng.random() < p:
            faults.append((register.index(register.spin(1)), "Z"))
    for index, letter in faults:
        register.apply_pauli(index, letter)
    if faults:
        logger.debug("Inserted faults %s", faults)
    return faults


def emission_listener(
    model: NoiseModel, rng: np.random.Generator
) -> Callable[[Register, QubitId, QubitId], None]:
    """Register hook applying emission noise after every photon."""

    def listener(register: Register, spin: QubitId, photon: QubitId) -> None:
        apply_noise(register, EmissionEvent(spin, photon), model, rng)

    return listener


def fault_listener(
    faults: Sequence[Sequence[str]],
) -> Callable[[Register, QubitId, QubitId], None]:
    """Hook applying a fixed (spin letter, photon letter) pair per emission."""
    remaining = list(faults)

    def listener(register: Register, spin: QubitId, photon: QubitId) -> None:
        if remaining:
            spin_letter, photon_letter = remaining.pop(0)
            register.apply_pauli(spin, spin_letter)
            register.apply_pauli(photon, photon_letter)

    return listener


# --- Atom readout ---


def readout_spin(
    register: Register,
    atom: int,
    basis: Basis,
    max_attempts: int = settings.READOUT_MAX_ATTEMPTS,
    loss: float = settings.LOSS_PER_PHOTON,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Optional[int], int]:
    """Repeat-until-success readout via emitted photons.

    Returns:
        The outcome, or None after ``max_attempts`` lost photons, and the
        number of attempts used.
    """
    if max_attempts < 1:
        raise ValueError("At least one readout attempt is needed")
    rng = rng if rng is not None else register.rng
    for attempt in range(1, max_attempts + 1):
        lost = loss >= 1.0 or (loss > 0.0 and rng.random() < loss)
        if not lost:
            return register.measure(register.spin(atom), basis), attempt
    logger.debug("Readout of atom %d failed after %d attempts", atom, max_attempts)
    return None, max_attempts


def sample_readout_attempts(
    loss: float, max_attempts: int, n: int, rng: np.random.Generator
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised readout: attempts needed are geometric in (1 - loss).

    Returns:
        Success flags and attempts used, both of length ``n``.
    """
    if loss >= 1.0:
        return np.zeros(n, dtype=bool), np.full(n, max_attempts)
    needed = rng.geometric(1.0 - loss, size=n)
    success = needed <= max_attempts
    return success, np.minimum(needed, max_attempts)


def sample_photon_survival(
    loss: float, n_photons: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Per-trial flag that all ``n_photons`` photons were detected."""
    if n_photons == 0:
        return np.ones(n, dtype=bool)
    return np.all(rng.random((n, n_photons)) >= loss, axis=1)
