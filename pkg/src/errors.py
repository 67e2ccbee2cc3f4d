"""Exception hierarchy shared by the simulator, analysis and command line."""

from typing import Optional

from src import settings


class FusegraphError(Exception):
    """Base class for every error raised by the package."""

    exit_code = settings.EXIT_SIMULATION_ERROR


class ConfigError(FusegraphError):
    """Invalid configuration, input file or command-line option."""

    exit_code = settings.EXIT_CONFIG_ERROR


class SimulationError(FusegraphError):
    """A backend or protocol could not be executed."""

    exit_code = settings.EXIT_SIMULATION_ERROR


class NonCliffordOnTableau(SimulationError):
    """A non-Clifford gate reached the stabilizer tableau backend."""


class ZeroProbabilityBranch(SimulationError):
    """A forced measurement or herald outcome has probability zero."""


class TooLarge(SimulationError):
    """The register exceeds the dense backend's qubit limit."""


class ProtocolError(SimulationError):
    """A program failed at a specific instruction.

    Attributes:
        index: Position of the failing instruction in the program.
    """

    def __init__(self, message: str, index: Optional[int] = None) -> None:
        self.index = index
        prefix = f"instruction {index}: " if index is not None else ""
        super().__init__(prefix + message)


class AnalysisError(FusegraphError):
    """State characterisation could not be carried out."""

    exit_code = settings.EXIT_ANALYSIS_ERROR


class OddCycle(AnalysisError):
    """The graph is not two-colourable, so no witness bound exists."""


class SettingMismatch(AnalysisError):
    """Measurement records do not match the requested stabilizers."""
