"""Shared fixtures: seeded generators, registers and the built-in protocols."""

import numpy as np
import pytest

from src.backend import BackendKind
from src.protocols import build_ring_protocol, build_tree_protocol
from src.register import SpinState, init_register


@pytest.fixture
def rng():
    """Seeded generator so statistical tests are reproducible."""
    return np.random.default_rng(1234)


@pytest.fixture
def plus_register(rng):
    """Both spins in |+> on the dense backend."""
    return init_register(SpinState.PLUS, BackendKind.DENSE, rng)


@pytest.fixture
def tree_program():
    """Calibrated depth-two tree protocol."""
    return build_tree_protocol()


@pytest.fixture
def box_program():
    """Four-vertex ring protocol."""
    return build_ring_protocol(2, odd=False)


@pytest.fixture
def pentagon_program():
    """Five-vertex ring protocol."""
    return build_ring_protocol(2, odd=True)


@pytest.fixture
def hexagon_program():
    """Six-vertex ring protocol."""
    return build_ring_protocol(3, odd=False)


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    """Keep the default-seed environment variable out of every test."""
    monkeypatch.delenv("FUSEGRAPH_SEED", raising=False)
