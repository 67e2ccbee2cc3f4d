"""State characterisation.

Stabilizer expectations, product correlators and the two-setting witness
bound, the Bell-state fidelity formula, GHZ parity fringes and the noise
calibration against a target Bell fidelity.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from src import settings
from src.backend import BackendKind, QuantumState
from src.engine import HeraldMode, run
from src.errors import AnalysisError, SettingMismatch, ZeroProbabilityBranch
from src.instructions import Barrier, ProtocolProgram
from src.noise import NoiseModel, dephasing_flip_probability, fault_listener
from src.pauli import PauliString
from src.protocols import with_free_evolution
from src.register import SUCCESS_PATTERN, Register, SpinState, init_register
from src.reports import ShotRecord
from src.stabilizers import (
    StabilizerSet,
    bipartition_settings,
    graph_state_vector,
    stabilizer_generators,
)

logger = logging.getLogger(__name__)

StateSource = Union[QuantumState, Register]
Source = Union[StateSource, Sequence[ShotRecord]]


@dataclass(frozen=True)
class Estimate:
    """Value with its 1-sigma standard error."""

    value: float
    stderr: float = 0.0


def _state(source: StateSource) -> QuantumState:
    return source.state if isinstance(source, Register) else source


def _is_state(source: Source) -> bool:
    return isinstance(source, (QuantumState, Register))


def binomial_stderr(value: float, n: int) -> float:
    """Wald error of a mean of n values in {-1, +1}."""
    if n == 0:
        return math.nan
    p = min(max((1.0 + value) / 2.0, 0.0), 1.0)
    return 2.0 * math.sqrt(p * (1.0 - p) / n)


def shot_value(shot: ShotRecord, pauli: PauliString) -> Optional[int]:
    """Eigenvalue of ``pauli`` in one shot, or None if its bases do not fit."""
    value = pauli.sign
    for qubit in pauli.support:
        if shot.bases.get(qubit) != pauli.letter(qubit):
            return None
        value *= shot.outcomes[qubit]
    return value


# --- Stabilizers and correlators ---


def stabilizer_expectations(
    source: Source, stabilizers: StabilizerSet
) -> List[Tuple[PauliString, float, float]]:
    """(generator, value, stderr) per generator.

    Raises:
        SettingMismatch: if no record can evaluate some generator.
    """
    if _is_state(source):
        state = _state(source)
        return [(g, state.expectation(g), 0.0) for g in stabilizers.generators]
    rows = []
    for generator in stabilizers.generators:
        values = [v for v in (shot_value(s, generator) for s in source) if v is not None]
        if not values:
            raise SettingMismatch(f"no record measures {generator}")
        mean = float(np.mean(values))
        rows.append((generator, mean, binomial_stderr(mean, len(values))))
    return rows


def projector_expectation(state: QuantumState, generators: Sequence[PauliString]) -> float:
    """Exact <prod (1 + S_i)/2> of commuting generators."""
    work = state.copy()
    value = 1.0
    for generator in generators:
        try:
            _, probability = work.measure_pauli(generator, forced=1)
        except ZeroProbabilityBranch:
            return 0.0
        value *= probability
    return value


def product_correlator(source: Source, generators: Sequence[PauliString]) -> Estimate:
    """G = mean over shots of prod (1 + s_i)/2, or its exact value on a state.

    Raises:
        SettingMismatch: if no record measures every generator of the set.
    """
    if _is_state(source):
        return Estimate(projector_expectation(_state(source), generators))
    per_shot = []
    for shot in source:
        values = [shot_value(shot, g) for g in generators]
        if any(v is None for v in values):
            continue
        per_shot.append(float(all(v == 1 for v in values)))
    if not per_shot:
        raise SettingMismatch("no record measures every generator of the set")
    mean = float(np.mean(per_shot))
    return Estimate(mean, math.sqrt(mean * (1.0 - mean) / len(per_shot)))


# --- Witness ---


@dataclass(frozen=True)
class WitnessReport:
    """Fidelity lower bound P = G_a + G_b - 1 with asymmetric errors."""

    # pylint: disable=too-many-instance-attributes

    g_a: float
    g_b: float
    stderr_a: float
    stderr_b: float
    p: float
    p_err_minus: float
    p_err_plus: float
    genuine_entanglement: bool
    threshold: float = settings.WITNESS_THRESHOLD

    def to_record(self) -> Dict:
        """JSON-ready dictionary."""
        return {
            "g_a": self.g_a,
            "g_b": self.g_b,
            "stderr_a": self.stderr_a,
            "stderr_b": self.stderr_b,
            "p": self.p,
            "p_err_minus": self.p_err_minus,
            "p_err_plus": self.p_err_plus,
            "genuine_entanglement": self.genuine_entanglement,
            "threshold": self.threshold,
        }


def witness_bound(
    g_a: float,
    g_b: float,
    stderr_a: float = 0.0,
    stderr_b: float = 0.0,
    threshold: float = settings.WITNESS_THRESHOLD,
) -> WitnessReport:
    """Combine the two set correlators into the fidelity bound.

    The error of P is propagated from G_a and G_b independently and clipped
    to the physical range [-1, 1], which makes it asymmetric near the ends.
    """
    for name, value in (("G_a", g_a), ("G_b", g_b)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {value}")
    p = g_a + g_b - 1.0
    sigma = math.hypot(stderr_a, stderr_b)
    err_plus = min(1.0, p + sigma) - p
    err_minus = p - max(-1.0, p - sigma)
    return WitnessReport(
        g_a, g_b, stderr_a, stderr_b, p, err_minus, err_plus, p - err_minus > threshold, threshold
    )


def witness_from_source(source: Source, stabilizers: StabilizerSet) -> WitnessReport:
    """Witness report from a state or from shot records; needs a partitioned set."""
    if stabilizers.partition is None:
        raise AnalysisError("the stabilizer set has no a/b partition")
    g_a = product_correlator(source, stabilizers.subset("a"))
    g_b = product_correlator(source, stabilizers.subset("b"))
    return witness_bound(g_a.value, g_b.value, g_a.stderr, g_b.stderr)


@dataclass(frozen=True)
class NoisyWitness:
    """Exact correlators of a mixture of weighted noise trajectories."""

    g_a: float
    g_b: float
    fidelity: float
    weight: float
    n_trajectories: int

    @property
    def p(self) -> float:
        """Witness bound of the mixture."""
        return self.g_a + self.g_b - 1.0


def noisy_witness(
    program: ProtocolProgram,
    noise: NoiseModel,
    n_trajectories: int,
    rng: np.random.Generator,
) -> NoisyWitness:
    """G_a, G_b and the fidelity of the post-selected noisy state.

    Each trajectory draws its own faults and is forced through every
    herald; it enters the mixture with weight equal to its herald
    probability, which is how post-selection reweights the ensemble.
    """
    graph = program.expected_graph
    if graph is None:
        raise AnalysisError(f"program {program.name} has no expected graph")
    _, _, stabilizers = bipartition_settings(stabilizer_generators(graph), graph)
    set_a, set_b = stabilizers.subset("a"), stabilizers.subset("b")
    target = graph_state_vector(graph)
    totals = np.zeros(4)
    for _ in range(n_trajectories):
        result = run(program, BackendKind.DENSE, herald_mode=HeraldMode.FORCE, noise=noise, rng=rng)
        if result.weight == 0.0:
            continue
        state = result.register.state
        totals += result.weight * np.array(
            [
                projector_expectation(state, set_a),
                projector_expectation(state, set_b),
                target.overlap(state),
                1.0,
            ]
        )
    if totals[3] == 0.0:
        raise AnalysisError("every trajectory had zero herald probability")
    g_a, g_b, fidelity = totals[:3] / totals[3]
    return NoisyWitness(float(g_a), float(g_b), float(fidelity), float(totals[3]), n_trajectories)


# --- Bell pairs ---


def bell_fidelity(xx: float, yy: float, zz: float) -> float:
    """Overlap with psi+ from the three correlators: (1 + XX + YY - ZZ) / 4."""
    for value in (xx, yy, zz):
        if not -1.0 <= value <= 1.0:
            raise ValueError(f"Correlators must lie in [-1, 1], got {value}")
    return (1.0 + xx + yy - zz) / 4.0


def bell_correlators(
    source: StateSource, first: int = 0, second: int = 1
) -> Tuple[float, float, float]:
    """<XX>, <YY>, <ZZ> of two qubits."""
    state = _state(source)
    n = state.n_qubits
    return tuple(  # type: ignore[return-value]
        state.expectation(PauliString.from_letters(n, {first: letter, second: letter}))
        for letter in "XYZ"
    )


@lru_cache(maxsize=1)
def bell_fault_expansion() -> Tuple[Tuple[int, float, float], ...]:
    """(fault count, herald probability, fidelity) for every fault pattern.

    The heralded pair comes from two emissions; each emission can hit the
    spin and the herald photon with I, X, Y or Z.
    """
    rows = []
    for letters in itertools.product("IXYZ", repeat=4):
        register = init_register(SpinState.PLUS, BackendKind.DENSE)
        register.emission_listener = fault_listener([letters[:2], letters[2:]])
        n_faults = sum(letter != "I" for letter in letters)
        try:
            outcome = register.fuse(0, 1, SUCCESS_PATTERN)
        except ZeroProbabilityBranch:
            rows.append((n_faults, 0.0, 0.0))
            continue
        rows.append((n_faults, outcome.probability, bell_fidelity(*bell_correlators(register))))
    return tuple(rows)


def exact_noisy_bell_fidelity(depolarizing: float) -> float:
    """Post-selected Bell fidelity for a per-emission depolarizing probability."""
    if not 0.0 <= depolarizing <= 1.0:
        raise ValueError("The depolarizing probability must lie in [0, 1]")
    numerator = denominator = 0.0
    for n_faults, herald, fidelity in bell_fault_expansion():
        weight = (1.0 - depolarizing) ** (4 - n_faults) * (depolarizing / 3.0) ** n_faults * herald
        numerator += weight * fidelity
        denominator += weight
    return numerator / denominator


def calibrate_depolarizing(
    target: float = settings.BELL_TARGET_FIDELITY,
    tolerance: float = settings.BISECTION_TOLERANCE,
    max_iterations: int = settings.BISECTION_MAX_ITERATIONS,
) -> float:
    """Per-emission depolarizing probability giving the target Bell fidelity.

    Raises:
        AnalysisError: if the target cannot be bracketed.
    """
    low, high = 0.0, 0.75
    if not exact_noisy_bell_fidelity(high) <= target <= exact_noisy_bell_fidelity(low):
        raise AnalysisError(f"Bell fidelity {target} is outside the reachable range")
    for _ in range(max_iterations):
        middle = (low + high) / 2.0
        if exact_noisy_bell_fidelity(middle) > target:
            low = middle
        else:
            high = middle
        if high - low < tolerance:
            break
    logger.debug("Depolarizing probability %.6g gives Bell fidelity %.4g", low, target)
    return (low + high) / 2.0


# --- GHZ parity fringes ---


@dataclass(frozen=True)
class ParityPoint:
    """Parity of each GHZ branch at one free-evolution time."""

    t0_us: float
    parities: Tuple[float, float]


def _truncate_at(program: ProtocolProgram, label: str) -> ProtocolProgram:
    for index, instruction in enumerate(program):
        if isinstance(instruction, Barrier) and instruction.label == label:
            return program.with_instructions(list(program.instructions[: index + 1]))
    raise AnalysisError(f"program {program.name} has no barrier {label!r}")


def ghz_parity(register: Register, atom: int) -> float:
    """<X...X> over an atom and the photons it emitted."""
    qubits = [q for q in register.labels if q.emitter == atom and not q.herald]
    return register.expectation(register.pauli({q: "X" for q in qubits}))


def parity_scan(
    program: ProtocolProgram,
    t0_grid: Sequence[float],
    omega_q: float = settings.QUBIT_PRECESSION_RAD_PER_US,
    noise: Optional[NoiseModel] = None,
    separation_us: Optional[float] = None,
) -> List[ParityPoint]:
    """Branch parities versus free-evolution time.

    Spin dephasing over each atom's precession time shrinks its fringe by
    1 - 2q, q being the phase-flip probability of that wait.
    """
    if len(t0_grid) == 0:
        raise ValueError("The t0 grid must not be empty")
    ghz_stage = _truncate_at(program, "ghz")
    separation = program.photon_separation_us if separation_us is None else separation_us
    offsets = program.emission_offsets_us
    rate = noise.spin_dephasing_per_us if noise is not None else 0.0
    points = []
    for t0 in t0_grid:
        timed = with_free_evolution(ghz_stage, float(t0), offsets, omega_q, separation)
        register = run(timed, BackendKind.DENSE, seed=0).register
        waits = (t0 + separation + offsets[0], t0 + offsets[1])
        parities = tuple(
            (1.0 - 2.0 * dephasing_flip_probability(rate, wait)) * ghz_parity(register, atom)
            for atom, wait in zip((1, 2), waits)
        )
        points.append(ParityPoint(float(t0), parities))  # type: ignore[arg-type]
    return points


@dataclass(frozen=True)
class FringeFit:
    """parity = amplitude * cos(omega t + phase) + offset."""

    amplitude: float
    phase: float
    offset: float


def fit_fringe(t0: Sequence[float], parity: Sequence[float], omega_q: float) -> FringeFit:
    """Linear least-squares fit at a known angular frequency."""
    t = np.asarray(t0, dtype=float)
    design = np.column_stack([np.cos(omega_q * t), np.sin(omega_q * t), np.ones_like(t)])
    (a, b, c), *_ = np.linalg.lstsq(design, np.asarray(parity, dtype=float), rcond=None)
    return FringeFit(float(math.hypot(a, b)), float(math.atan2(-b, a)), float(c))


# --- Correlators versus arrival-time difference ---


def correlators_vs_tau(
    shots: Sequence[ShotRecord],
    generators: Sequence[PauliString],
    taus: Sequence[float],
    cumulative: bool = True,
) -> List[Tuple[float, List[Estimate]]]:
    """Stabilizer correlators of the shots with |t_R - t_L| up to (or binned by) each tau."""
    rows = []
    previous = -math.inf
    for tau in taus:
        lower = -math.inf if cumulative else previous
        selected = [s for s in shots if s.tau_ns is not None and lower < s.tau_ns <= tau]
        estimates = []
        for generator in generators:
            values = [v for v in (shot_value(s, generator) for s in selected) if v is not None]
            if values:
                mean = float(np.mean(values))
                estimates.append(Estimate(mean, binomial_stderr(mean, len(values))))
            else:
                estimates.append(Estimate(math.nan, math.nan))
        rows.append((float(tau), estimates))
        previous = tau
    return rows
