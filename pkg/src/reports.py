"""Line-oriented result files.

Every file is JSON Lines: a header object carrying ``format_version``,
``kind`` and ``seed``, then one record per line. Keys are sorted so a rerun
with the same seed produces a byte-identical file.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

from src import settings
from src.errors import ConfigError

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def _round_floats(value):
    if isinstance(value, float):
        return round(value, 12)
    if isinstance(value, dict):
        return {k: _round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round_floats(v) for v in value]
    return value


def write_jsonl(
    path: PathLike,
    kind: str,
    records: Iterable[Mapping],
    seed: Optional[int] = None,
    **header_fields,
) -> int:
    """Write a header and records; return the number of records."""
    header = {"format_version": settings.FORMAT_VERSION, "kind": kind, "seed": seed}
    header.update(header_fields)
    count = 0
    with open(path, "w", encoding="utf-8") as file:
        file.write(json.dumps(_round_floats(header), sort_keys=True) + "\n")
        for record in records:
            file.write(json.dumps(_round_floats(dict(record)), sort_keys=True) + "\n")
            count += 1
    logger.debug("Wrote %d %s records to %s", count, kind, path)
    return count


def read_jsonl(path: PathLike, kind: Optional[str] = None) -> Tuple[Dict, List[Dict]]:
    """Read a file written by :func:`write_jsonl`.

    Raises:
        ConfigError: if the file is missing, malformed or of another kind.
    """
    try:
        with open(path, "r", encoding="utf-8") as file:
            lines = [json.loads(line) for line in file if line.strip()]
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"Cannot read {path}: {exc}") from exc
    if not lines or "format_version" not in lines[0]:
        raise ConfigError(f"{path} has no header line")
    header = lines[0]
    if header["format_version"] != settings.FORMAT_VERSION:
        raise ConfigError(f"{path} has unsupported format version {header['format_version']}")
    if kind is not None and header.get("kind") != kind:
        raise ConfigError(f"{path} holds {header.get('kind')!r} records, expected {kind!r}")
    return header, lines[1:]


@dataclass(frozen=True)
class ShotRecord:
    """One accepted coincidence measured in a local setting.

    Attributes:
        run_id: Attempt number.
        setting: Setting tag, "a" or "b" for witness settings.
        bases: Measurement basis letter per physical qubit.
        outcomes: +1/-1 per physical qubit.
        tau_ns: |t_R - t_L| of the last fusion, if recorded.
    """

    run_id: int
    setting: str
    bases: Mapping[int, str]
    outcomes: Mapping[int, int]
    tau_ns: Optional[float] = None

    def to_record(self) -> Dict:
        """JSON-ready dictionary with string qubit keys."""
        return {
            "run_id": self.run_id,
            "setting": self.setting,
            "bases": "".join(self.bases[q] for q in sorted(self.bases)),
            "outcomes": [self.outcomes[q] for q in sorted(self.outcomes)],
            "tau_ns": self.tau_ns,
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "ShotRecord":
        """Inverse of :meth:`to_record`.

        Raises:
            ConfigError: on malformed records.
        """
        try:
            bases = {q: letter for q, letter in enumerate(record["bases"])}
            outcomes = {q: int(v) for q, v in enumerate(record["outcomes"])}
            if len(bases) != len(outcomes) or any(v not in (1, -1) for v in outcomes.values()):
                raise ValueError("bases and +1/-1 outcomes must cover the same qubits")
            tau = record.get("tau_ns")
            return cls(
                int(record["run_id"]),
                str(record["setting"]),
                bases,
                outcomes,
                None if tau is None else float(tau),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"Invalid shot record {record!r}: {exc}") from exc


def write_shots(
    path: PathLike, shots: Iterable[ShotRecord], seed: Optional[int] = None, **header_fields
) -> int:
    """Write measurement records for the witness and stabilizer estimators."""
    return write_jsonl(path, "shots", (s.to_record() for s in shots), seed, **header_fields)


def read_shots(path: PathLike) -> List[ShotRecord]:
    """Read a file written by :func:`write_shots`."""
    _, records = read_jsonl(path, "shots")
    return [ShotRecord.from_record(r) for r in records]
