"""Monte-Carlo emulation of coincidence campaigns.

Every trial runs the program, resolves the fusion heralds, draws photon
arrival times and losses, reads out both atoms and measures every photon in
one local setting. Accepted trials become shot records for the witness and
stabilizer estimators.
"""

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src import settings
from src.analysis import binomial_stderr, shot_value
from src.backend import BackendKind
from src.engine import HeraldMode, run
from src.errors import ConfigError, OddCycle
from src.instructions import Fuse, ProtocolProgram
from src.noise import (
    NoiseModel,
    readout_spin,
    sample_photon_survival,
    sample_readout_attempts,
)
from src.qubits import Basis
from src.reports import ShotRecord
from src.stabilizers import (
    Setting,
    StabilizerSet,
    bipartition_settings,
    stabilizer_generators,
)
from src.timing import (
    ClickRecord,
    PostSelectionPolicy,
    Verdict,
    WavePacket,
    acceptance_masks,
    post_select,
    sample_arrival,
)

logger = logging.getLogger(__name__)

NamedSetting = Tuple[str, Setting]


@dataclass
class CoincidenceStats:
    """Counts of a campaign, stage by stage, plus the correlators of accepted shots.

    A trial is rejected at the first stage it fails: herald, arrival window,
    |t_R - t_L|, photon loss, atom readout. Adding two stats objects sums
    their counts, so partial campaigns combine in any order.
    """

    # pylint: disable=too-many-instance-attributes

    program: str
    n_trials: int = 0
    n_heralded: int = 0
    n_in_window: int = 0
    n_tau_accepted: int = 0
    n_detected: int = 0
    n_accepted: int = 0
    correlators: List[Tuple[str, float, float]] = field(default_factory=list)
    seed: Optional[int] = None

    def __add__(self, other: "CoincidenceStats") -> "CoincidenceStats":
        if other.program != self.program:
            raise ValueError("Cannot combine statistics of different programs")
        return CoincidenceStats(
            self.program,
            self.n_trials + other.n_trials,
            self.n_heralded + other.n_heralded,
            self.n_in_window + other.n_in_window,
            self.n_tau_accepted + other.n_tau_accepted,
            self.n_detected + other.n_detected,
            self.n_accepted + other.n_accepted,
            seed=self.seed,
        )

    @staticmethod
    def _ratio(numerator: int, denominator: int) -> float:
        return numerator / denominator if denominator else math.nan

    @property
    def herald_fraction(self) -> float:
        """Share of trials with a successful herald at every fusion."""
        return self._ratio(self.n_heralded, self.n_trials)

    @property
    def window_fraction(self) -> float:
        """Share of heralded trials with both clicks in the window."""
        return self._ratio(self.n_in_window, self.n_heralded)

    @property
    def tau_fraction(self) -> float:
        """Share of in-window trials passing the |t_R - t_L| cut."""
        return self._ratio(self.n_tau_accepted, self.n_in_window)

    @property
    def acceptance_fraction(self) -> float:
        """Share of all trials that end as an accepted coincidence."""
        return self._ratio(self.n_accepted, self.n_trials)

    @property
    def events_per_min(self) -> float:
        """Accepted coincidences per minute at the configured attempt rate."""
        return self.acceptance_fraction * settings.ATTEMPT_RATE_PER_MIN

    def to_record(self) -> Dict:
        """JSON-ready summary, with the reference rate when one is known."""
        record = {
            "program": self.program,
            "n_trials": self.n_trials,
            "n_heralded": self.n_heralded,
            "n_in_window": self.n_in_window,
            "n_tau_accepted": self.n_tau_accepted,
            "n_detected": self.n_detected,
            "n_accepted": self.n_accepted,
            "herald_fraction": self.herald_fraction,
            "window_fraction": self.window_fraction,
            "tau_fraction": self.tau_fraction,
            "acceptance_fraction": self.acceptance_fraction,
            "events_per_min": self.events_per_min,
            "correlators": [
                {"generator": g, "value": v, "stderr": e} for g, v, e in self.correlators
            ],
        }
        if self.program in settings.REFERENCE_COINCIDENCES:
            events, hours, rate = settings.REFERENCE_COINCIDENCES[self.program]
            record["reference"] = {"events": events, "hours": hours, "events_per_min": rate}
        return record


@dataclass
class CampaignResult:
    """Statistics, accepted shots and every click of a campaign."""

    stats: CoincidenceStats
    shots: List[ShotRecord]
    clicks: List[ClickRecord]


def measurement_settings(program: ProtocolProgram) -> Tuple[StabilizerSet, List[NamedSetting]]:
    """Local settings that together read every stabilizer generator.

    Bipartite graphs need the two witness settings "a" and "b"; other
    graphs get one setting per generator, tagged "g<i>", with Z on the
    qubits outside its support.
    """
    graph = program.expected_graph
    if graph is None:
        raise ConfigError(f"program {program.name} has no expected graph to measure")
    stabilizers = stabilizer_generators(graph)
    try:
        setting_a, setting_b, partitioned = bipartition_settings(stabilizers, graph)
        return partitioned, [("a", setting_a), ("b", setting_b)]
    except OddCycle:
        logger.debug("%s is not bipartite, measuring one generator per setting", graph.name)
    named = []
    for i, generator in enumerate(stabilizers.generators):
        setting = {q: Basis.Z for q in range(graph.n_qubits)}
        setting.update({q: Basis(generator.letter(q)) for q in generator.support})
        named.append((f"g{i}", setting))
    return stabilizers, named


@dataclass(frozen=True)
class _Campaign:
    """Everything a worker needs to run a block of trials."""

    program: ProtocolProgram
    noise: NoiseModel
    policy: PostSelectionPolicy
    herald_mode: HeraldMode
    named_settings: Tuple[NamedSetting, ...]
    max_attempts: int


def _run_trial(
    campaign: _Campaign, run_id: int, rng: np.random.Generator, stats: CoincidenceStats
) -> Tuple[Optional[ShotRecord], List[ClickRecord]]:
    stats.n_trials += 1
    result = run(
        campaign.program,
        BackendKind.AUTO,
        herald_mode=campaign.herald_mode,
        noise=campaign.noise,
        rng=rng,
        run_id=run_id,
    )
    if not result.success:
        return None, result.clicks
    stats.n_heralded += 1
    # the last fusion's clicks decide the arrival-time cut; without a fusion there is none
    verdict = (
        post_select((result.clicks[-2], result.clicks[-1]), campaign.policy)
        if result.clicks
        else Verdict.ACCEPT
    )
    if verdict is Verdict.REJECT_WINDOW:
        return None, result.clicks
    stats.n_in_window += 1
    if verdict is Verdict.REJECT_TAU:
        return None, result.clicks
    stats.n_tau_accepted += 1
    register = result.register
    n_heralds = 2 * sum(isinstance(i, Fuse) for i in campaign.program)
    n_photons = len(register.photons) + n_heralds
    if not sample_photon_survival(campaign.noise.loss_per_photon, n_photons, 1, rng)[0]:
        return None, result.clicks
    stats.n_detected += 1

    tag, setting = campaign.named_settings[run_id % len(campaign.named_settings)]
    outcomes: Dict[int, int] = {}
    for atom in (1, 2):
        index = register.index(register.spin(atom))
        outcome, _ = readout_spin(
            register,
            atom,
            setting[index],
            campaign.max_attempts,
            campaign.noise.loss_per_photon,
            rng,
        )
        if outcome is None:
            return None, result.clicks
        outcomes[index] = outcome
    for photon in register.photons:
        outcomes[photon.index] = register.measure(photon, setting[photon.index])
    stats.n_accepted += 1
    tau = abs(result.clicks[-2].time_ns - result.clicks[-1].time_ns) if result.clicks else None
    bases = {q: setting[q].value for q in outcomes}
    return ShotRecord(run_id, tag, bases, outcomes, tau), result.clicks


def _run_block(
    task: Tuple[_Campaign, Sequence[int], Sequence[np.random.SeedSequence]]
) -> CampaignResult:
    campaign, run_ids, seeds = task
    stats = CoincidenceStats(campaign.program.name)
    shots: List[ShotRecord] = []
    clicks: List[ClickRecord] = []
    for run_id, seed in zip(run_ids, seeds):
        shot, trial_clicks = _run_trial(campaign, run_id, np.random.default_rng(seed), stats)
        clicks.extend(trial_clicks)
        if shot is not None:
            shots.append(shot)
    return CampaignResult(stats, shots, clicks)


def monte_carlo(
    program: ProtocolProgram,
    noise: Optional[NoiseModel] = None,
    policy: Optional[PostSelectionPolicy] = None,
    n_trials: int = settings.DEFAULT_TRIALS,
    seed: Optional[int] = settings.DEFAULT_SEED,
    workers: int = settings.DEFAULT_WORKERS,
    herald_mode: HeraldMode = HeraldMode.SAMPLE,
    max_attempts: int = settings.READOUT_MAX_ATTEMPTS,
) -> CampaignResult:
    """Run a campaign of independent attempts.

    Each attempt draws from its own generator spawned from ``seed``, so
    the result does not depend on the number of workers.

    Raises:
        ConfigError: for a non-positive trial count or exhaustive heralds.
    """
    if n_trials < 1:
        raise ConfigError("A campaign needs at least one trial")
    if workers < 1:
        raise ConfigError("At least one worker is needed")
    if herald_mode is HeraldMode.EXHAUSTIVE:
        raise ConfigError("Exhaustive heralds follow every branch and cannot be sampled")
    stabilizers, named = measurement_settings(program)
    campaign = _Campaign(
        program,
        noise if noise is not None else NoiseModel(),
        policy if policy is not None else PostSelectionPolicy(),
        herald_mode,
        tuple(named),
        max_attempts,
    )
    seeds = np.random.SeedSequence(seed).spawn(n_trials)
    blocks = np.array_split(np.arange(n_trials), min(workers, n_trials))
    tasks = [(campaign, block.tolist(), seeds[block[0] : block[-1] + 1]) for block in blocks]
    if workers == 1:
        parts = [_run_block(task) for task in tasks]
    else:
        with Pool(processes=workers) as pool:
            parts = pool.map(_run_block, tasks)

    stats = CoincidenceStats(program.name, seed=seed)
    shots: List[ShotRecord] = []
    clicks: List[ClickRecord] = []
    for part in parts:
        stats = stats + part.stats
        shots.extend(part.shots)
        clicks.extend(part.clicks)
    stats.correlators = _correlators(shots, stabilizers)
    logger.info(
        "%s: %d of %d attempts accepted (%.3g events/min)",
        program.name,
        stats.n_accepted,
        n_trials,
        stats.events_per_min,
    )
    return CampaignResult(stats, shots, clicks)


def _correlators(
    shots: Sequence[ShotRecord], stabilizers: StabilizerSet
) -> List[Tuple[str, float, float]]:
    rows = []
    for generator in stabilizers.generators:
        values = [v for v in (shot_value(s, generator) for s in shots) if v is not None]
        if values:
            mean = float(np.mean(values))
            rows.append((str(generator), mean, binomial_stderr(mean, len(values))))
        else:
            rows.append((str(generator), math.nan, math.nan))
    return rows


# --- Rate estimates ---


@dataclass(frozen=True)
class RateEstimate:
    """Vectorised coincidence-rate estimate of many attempts."""

    n_attempts: int
    n_accepted: int
    window_fraction: float
    tau_fraction: float

    @property
    def acceptance_fraction(self) -> float:
        """Share of attempts ending as an accepted coincidence."""
        return self.n_accepted / self.n_attempts

    @property
    def events_per_min(self) -> float:
        """Accepted coincidences per minute at the configured attempt rate."""
        return self.acceptance_fraction * settings.ATTEMPT_RATE_PER_MIN


def herald_probability(program: ProtocolProgram) -> float:
    """Exact probability that every fusion of a noiseless run is heralded."""
    result = run(program, herald_mode=HeraldMode.EXHAUSTIVE)
    return sum(branch.weight for branch in result.branches if branch.success)


def estimate_coincidence_rate(
    n_attempts: int,
    success_probability: float,
    n_photons: int,
    n_heralds: int,
    rng: np.random.Generator,
    loss: float = settings.EXPERIMENT_LOSS_PER_PHOTON,
    policy: Optional[PostSelectionPolicy] = None,
    wavepacket: Optional[WavePacket] = None,
    max_attempts: int = settings.READOUT_MAX_ATTEMPTS,
) -> RateEstimate:
    """Accepted-coincidence fraction without simulating the quantum state.

    An attempt is accepted when its heralds succeed, all photons arrive,
    the final pair passes post-selection and both atoms are read out.
    """
    if n_attempts < 1:
        raise ConfigError("A rate estimate needs at least one attempt")
    policy = policy if policy is not None else PostSelectionPolicy()
    wavepacket = wavepacket if wavepacket is not None else WavePacket()
    heralded = rng.random(n_attempts) < success_probability
    detected = sample_photon_survival(loss, n_photons + n_heralds, n_attempts, rng)
    t_first = sample_arrival(wavepacket, rng, n_attempts)
    t_second = sample_arrival(wavepacket, rng, n_attempts)
    in_window, passed = acceptance_masks(t_first, t_second, policy)
    read_1, _ = sample_readout_attempts(loss, max_attempts, n_attempts, rng)
    read_2, _ = sample_readout_attempts(loss, max_attempts, n_attempts, rng)
    accepted = heralded & detected & passed & read_1 & read_2
    n_window = int(in_window.sum())
    return RateEstimate(
        n_attempts,
        int(accepted.sum()),
        n_window / n_attempts,
        int(passed.sum()) / n_window if n_window else math.nan,
    )


def program_rate(
    program: ProtocolProgram,
    n_attempts: int,
    rng: np.random.Generator,
    loss: float = settings.EXPERIMENT_LOSS_PER_PHOTON,
    policy: Optional[PostSelectionPolicy] = None,
) -> RateEstimate:
    """:func:`estimate_coincidence_rate` with the program's photon and herald counts."""
    n_fusions = sum(isinstance(i, Fuse) for i in program)
    return estimate_coincidence_rate(
        n_attempts,
        herald_probability(program),
        program.n_photons,
        2 * n_fusions,
        rng,
        loss,
        policy,
    )
