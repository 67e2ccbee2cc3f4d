"""Simulation settings and constants."""

import math

# Register layout
N_SPINS = 2  # exactly two emitter atoms share the cavity
DENSE_QUBIT_LIMIT = 24  # hard cap for the state-vector backend
NORM_TOLERANCE = 1e-12
PROBABILITY_TOLERANCE = 1e-12

# Protocol timing (microseconds)
PHOTON_SEPARATION_US = 20.0  # T, separation of the two atoms' emissions in a cycle
LARMOR_FREQUENCY_MHZ = 0.1  # omega_L / 2pi = 100 kHz
# The qubit states m_F = +1 and -1 differ by two units, so they precess at twice omega_L
QUBIT_PRECESSION_RAD_PER_US = 2.0 * 2.0 * math.pi * LARMOR_FREQUENCY_MHZ
FREE_EVOLUTION_US = 0.0  # t0 before the GHZ pi/2 pulse, set by calibration
TREE_EMISSION_CYCLES = 3

# Photon wave packet (nanoseconds)
# Erlang-2 profile: scale chosen so P(|t_R - t_L| <= 400 ns) ~ 0.80
# and P(t <= 1000 ns) ~ 0.98
WAVEPACKET_SHAPE = "gamma"
WAVEPACKET_GAMMA_SHAPE = 2.0
WAVEPACKET_SCALE_NS = 400.0 / 2.4
WAVEPACKET_OFFSET_NS = 30.0
WAVEPACKET_JITTER_NS = 0.0

# Post-selection (nanoseconds)
WINDOW_START_NS = 0.0
WINDOW_END_NS = 1000.0  # 1 us acceptance interval
TAU_MAX_MF0_NS = 250.0  # fusion from |2,0>
TAU_MAX_MF2_NS = 400.0  # fusion from |2,+-2>, longer wave packet
STRICT_WINDOW_END_NS = 500.0
STRICT_TAU_MAX_NS = 20.0

# Noise defaults
LOSS_PER_PHOTON = 0.0
DEPOLARIZING_PER_EMISSION = 0.0
DEPHASING_RATE_PER_US = 0.0
MISMATCH_DEPHASING_PER_NS = 0.0  # dephasing per ns of |t_R - t_L|
EXPERIMENT_LOSS_PER_PHOTON = 0.5

# Atom readout
READOUT_MAX_ATTEMPTS = 3

# Analysis
WITNESS_THRESHOLD = 0.5  # genuine multipartite entanglement above this bound
BELL_TARGET_FIDELITY = 0.915
BISECTION_TOLERANCE = 1e-6
BISECTION_MAX_ITERATIONS = 60

# Monte-Carlo
DEFAULT_TRIALS = 1000
DEFAULT_WORKERS = 1
ATTEMPT_RATE_PER_MIN = 6000.0  # protocol attempts per minute of lab time

# Reference coincidence statistics: events, hours, events per minute
REFERENCE_COINCIDENCES = {
    "box": (628, 4.5, 2.3),
    "pentagon": (392, 3.3, 2.0),
    "hexagon": (219, 8.7, 0.4),
    "tree": (227, 4.8, 0.8),
}

# Command line
SEED_ENV_VAR = "FUSEGRAPH_SEED"
DEFAULT_SEED = 0
FORMAT_VERSION = 1
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

# Exit codes
EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_SIMULATION_ERROR = 3
EXIT_ANALYSIS_ERROR = 4
