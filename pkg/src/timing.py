"""Photon arrival times, detector clicks and arrival-time post-selection.

Times are in nanoseconds from the start of the control pulse.
"""

import json
import logging
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np

from src import settings
from src.errors import ConfigError

logger = logging.getLogger(__name__)


class WavepacketShape(Enum):
    """Temporal profile of an emitted photon."""

    GAMMA = "gamma"
    DELTA = "delta"


@dataclass(frozen=True)
class WavePacket:
    """Arrival-time distribution of one photon.

    The gamma profile is ``offset + Gamma(gamma_shape, scale)``; the delta
    profile sits at ``offset``. Gaussian detector jitter is added to both.
    """

    shape: WavepacketShape = WavepacketShape(settings.WAVEPACKET_SHAPE)
    gamma_shape: float = settings.WAVEPACKET_GAMMA_SHAPE
    scale_ns: float = settings.WAVEPACKET_SCALE_NS
    offset_ns: float = settings.WAVEPACKET_OFFSET_NS
    jitter_ns: float = settings.WAVEPACKET_JITTER_NS

    def __post_init__(self) -> None:
        if self.gamma_shape <= 0 or self.scale_ns <= 0:
            raise ValueError("Wave-packet shape and scale must be positive")
        if self.offset_ns < 0 or self.jitter_ns < 0:
            raise ValueError("Wave-packet offset and jitter cannot be negative")

    @property
    def peak_ns(self) -> float:
        """Most likely arrival time."""
        if self.shape is WavepacketShape.DELTA:
            return self.offset_ns
        return self.offset_ns + max(self.gamma_shape - 1.0, 0.0) * self.scale_ns

    def to_dict(self) -> Dict:
        """JSON-ready dictionary."""
        return {
            "shape": self.shape.value,
            "gamma_shape": self.gamma_shape,
            "scale_ns": self.scale_ns,
            "offset_ns": self.offset_ns,
            "jitter_ns": self.jitter_ns,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "WavePacket":
        """Inverse of :meth:`to_dict`; missing keys take the defaults."""
        defaults = cls()
        return cls(
            WavepacketShape(data.get("shape", defaults.shape.value)),
            float(data.get("gamma_shape", defaults.gamma_shape)),
            float(data.get("scale_ns", defaults.scale_ns)),
            float(data.get("offset_ns", defaults.offset_ns)),
            float(data.get("jitter_ns", defaults.jitter_ns)),
        )


def sample_arrival(
    wavepacket: WavePacket, rng: np.random.Generator, size: Optional[int] = None
) -> Union[float, np.ndarray]:
    """Draw arrival times, clipped at zero."""
    n = 1 if size is None else size
    if wavepacket.shape is WavepacketShape.DELTA:
        times = np.full(n, wavepacket.offset_ns)
    else:
        times = wavepacket.offset_ns + rng.gamma(wavepacket.gamma_shape, wavepacket.scale_ns, n)
    if wavepacket.jitter_ns > 0:
        times = times + rng.normal(0.0, wavepacket.jitter_ns, n)
    times = np.maximum(times, 0.0)
    return float(times[0]) if size is None else times


class Detector(Enum):
    """Polarization-resolving detectors behind the cavity."""

    D_R = "D_R"
    D_L = "D_L"


@dataclass(frozen=True)
class ClickRecord:
    """One detector event."""

    detector: Detector
    time_ns: float
    origin: str
    run_id: int

    def __post_init__(self) -> None:
        if self.time_ns < 0:
            raise ValueError("Click times cannot be negative")

    def to_record(self) -> Dict:
        """Record with the stable field order run_id, detector, time_ns, origin."""
        return {
            "run_id": self.run_id,
            "detector": self.detector.value,
            "time_ns": self.time_ns,
            "origin": self.origin,
        }


class Verdict(Enum):
    """Outcome of arrival-time post-selection."""

    ACCEPT = "accept"
    REJECT_WINDOW = "reject_window"
    REJECT_TAU = "reject_tau"


@dataclass(frozen=True)
class PostSelectionPolicy:
    """Acceptance window and maximal R/L arrival-time difference."""

    window_ns: Tuple[float, float] = (settings.WINDOW_START_NS, settings.WINDOW_END_NS)
    tau_max_ns: float = settings.TAU_MAX_MF0_NS
    name: str = "default"

    def __post_init__(self) -> None:
        if not self.window_ns[0] < self.window_ns[1]:
            raise ValueError("Post-selection window must have t_min < t_max")
        if self.tau_max_ns <= 0:
            raise ValueError("tau_max must be positive")

    def to_dict(self) -> Dict:
        """JSON-ready dictionary, infinite bounds stored as null."""
        return {
            "name": self.name,
            "window_ns": [_finite_or_none(t) for t in self.window_ns],
            "tau_max_ns": _finite_or_none(self.tau_max_ns),
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "PostSelectionPolicy":
        """Inverse of :meth:`to_dict`."""
        window = data.get("window_ns", (settings.WINDOW_START_NS, settings.WINDOW_END_NS))
        tau = data.get("tau_max_ns", settings.TAU_MAX_MF0_NS)
        return cls(
            (_none_to_inf(window[0], -math.inf), _none_to_inf(window[1], math.inf)),
            _none_to_inf(tau, math.inf),
            str(data.get("name", "custom")),
        )


def _finite_or_none(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _none_to_inf(value: Optional[float], default: float) -> float:
    return default if value is None else float(value)


POLICY_PRESETS: Dict[str, PostSelectionPolicy] = {
    "none": PostSelectionPolicy((-math.inf, math.inf), math.inf, "none"),
    "default": PostSelectionPolicy(name="default"),
    "default_mf2": PostSelectionPolicy(tau_max_ns=settings.TAU_MAX_MF2_NS, name="default_mf2"),
    "strict": PostSelectionPolicy(
        (settings.WINDOW_START_NS, settings.STRICT_WINDOW_END_NS),
        settings.STRICT_TAU_MAX_NS,
        "strict",
    ),
}


def policy_preset(name: str) -> PostSelectionPolicy:
    """Named post-selection policy.

    Raises:
        ConfigError: for an unknown preset.
    """
    if name not in POLICY_PRESETS:
        raise ConfigError(f"Unknown post-selection preset {name!r}")
    return POLICY_PRESETS[name]


def post_select(pair: Tuple[ClickRecord, ClickRecord], policy: PostSelectionPolicy) -> Verdict:
    """Window check on both clicks first, then the |t_R - t_L| cut."""
    first, second = pair
    if first.run_id != second.run_id:
        raise ValueError("Both clicks must come from the same fusion attempt")
    t_min, t_max = policy.window_ns
    if not all(t_min <= click.time_ns <= t_max for click in pair):
        return Verdict.REJECT_WINDOW
    if abs(first.time_ns - second.time_ns) > policy.tau_max_ns:
        return Verdict.REJECT_TAU
    return Verdict.ACCEPT


def acceptance_masks(
    t_first: np.ndarray, t_second: np.ndarray, policy: PostSelectionPolicy
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`post_select`: (inside window, window and tau accepted)."""
    t_min, t_max = policy.window_ns
    in_window = (
        (t_first >= t_min) & (t_first <= t_max) & (t_second >= t_min) & (t_second <= t_max)
    )
    accepted = in_window & (np.abs(t_first - t_second) <= policy.tau_max_ns)
    return in_window, accepted


# --- Click-record files ---


def write_click_records(
    records: Iterable[ClickRecord], path: Union[str, Path], seed: Optional[int] = None
) -> None:
    """Write clicks as JSON Lines after a header with the seed."""
    header = {"format_version": settings.FORMAT_VERSION, "kind": "clicks", "seed": seed}
    with open(path, "w", encoding="utf-8") as file:
        file.write(json.dumps(header, sort_keys=True) + "\n")
        for record in records:
            file.write(json.dumps(record.to_record()) + "\n")


def read_click_records(path: Union[str, Path]) -> List[ClickRecord]:
    """Read a file written by :func:`write_click_records`.

    Raises:
        ConfigError: if the file is missing or malformed.
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            lines = [json.loads(line) for line in file if line.strip()]
        if not lines or lines[0].get("kind") != "clicks":
            raise ConfigError(f"{path} is not a click-record file")
        return [
            ClickRecord(
                Detector(r["detector"]), float(r["time_ns"]), str(r["origin"]), int(r["run_id"])
            )
            for r in lines[1:]
        ]
    except (OSError, json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"Cannot read click records from {path}: {exc}") from exc
