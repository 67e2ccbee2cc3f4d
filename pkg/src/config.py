"""Run configuration collected from the command line and input files."""

import argparse
import json
import logging
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from src import settings
from src.backend import BackendKind
from src.engine import HeraldMode
from src.errors import ConfigError
from src.instructions import ProtocolProgram, load_program
from src.noise import NoiseModel, load_noise_model
from src.protocols import BUILTIN_PROTOCOLS, builtin_protocol
from src.timing import POLICY_PRESETS, PostSelectionPolicy, policy_preset

logger = logging.getLogger(__name__)


def default_seed() -> int:
    """Seed from the environment, else the settings default.

    Raises:
        ConfigError: if the environment variable is not an integer.
    """
    value = os.environ.get(settings.SEED_ENV_VAR)
    if value is None:
        return settings.DEFAULT_SEED
    try:
        return int(value)
    except ValueError as exc:
        raise ConfigError(f"{settings.SEED_ENV_VAR} must be an integer, got {value!r}") from exc


def load_protocol(name_or_path: str) -> ProtocolProgram:
    """Built-in protocol by name, otherwise a protocol file."""
    if name_or_path in BUILTIN_PROTOCOLS:
        return builtin_protocol(name_or_path)
    if not Path(name_or_path).exists():
        raise ConfigError(
            f"{name_or_path!r} is neither a built-in protocol "
            f"({', '.join(BUILTIN_PROTOCOLS)}) nor a protocol file"
        )
    return load_program(name_or_path)


def load_policy(name_or_path: str) -> PostSelectionPolicy:
    """Post-selection preset by name, otherwise a JSON policy file."""
    if name_or_path in POLICY_PRESETS:
        return policy_preset(name_or_path)
    try:
        with open(name_or_path, "r", encoding="utf-8") as file:
            return PostSelectionPolicy.from_dict(json.load(file))
    except (OSError, json.JSONDecodeError, TypeError, ValueError, IndexError) as exc:
        raise ConfigError(f"Cannot read post-selection policy {name_or_path}: {exc}") from exc


@dataclass(frozen=True)
class RunConfig:
    """Options shared by the simulation subcommands.

    Attributes:
        protocol: Built-in protocol name or protocol file.
        backend: Simulator choice; AUTO picks the tableau for Clifford programs.
        herald_mode: How fusion heralds are resolved.
        noise_file: Optional noise-model JSON file.
        policy: Post-selection preset name or policy file.
        n_trials: Monte-Carlo attempts.
        workers: Worker processes for Monte-Carlo campaigns.
        seed: Seed of every random draw.
        output: Result file path.
    """

    # pylint: disable=too-many-instance-attributes

    protocol: str = "tree"
    backend: BackendKind = BackendKind.AUTO
    herald_mode: HeraldMode = HeraldMode.SAMPLE
    noise_file: Optional[str] = None
    policy: str = "default"
    n_trials: int = settings.DEFAULT_TRIALS
    workers: int = settings.DEFAULT_WORKERS
    seed: int = settings.DEFAULT_SEED
    output: Optional[str] = None

    def __post_init__(self) -> None:
        if self.n_trials < 1:
            raise ConfigError("--trials must be at least 1")
        if self.workers < 1:
            raise ConfigError("--workers must be at least 1")

    @classmethod
    def from_namespace(cls, args: argparse.Namespace) -> "RunConfig":
        """Build from parsed arguments; absent options take the defaults."""
        seed = getattr(args, "seed", None)
        try:
            return cls(
                protocol=getattr(args, "protocol", "tree"),
                backend=BackendKind(getattr(args, "backend", BackendKind.AUTO.value)),
                herald_mode=HeraldMode(getattr(args, "herald", HeraldMode.SAMPLE.value)),
                noise_file=getattr(args, "noise", None),
                policy=getattr(args, "policy", "default"),
                n_trials=getattr(args, "trials", settings.DEFAULT_TRIALS),
                workers=getattr(args, "workers", settings.DEFAULT_WORKERS),
                seed=default_seed() if seed is None else seed,
                output=getattr(args, "output", None),
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def program(self) -> ProtocolProgram:
        """The configured protocol program."""
        return load_protocol(self.protocol)

    def noise(self) -> Optional[NoiseModel]:
        """The configured noise model, if any."""
        return None if self.noise_file is None else load_noise_model(self.noise_file)

    def post_selection(self) -> PostSelectionPolicy:
        """The configured post-selection policy."""
        return load_policy(self.policy)
