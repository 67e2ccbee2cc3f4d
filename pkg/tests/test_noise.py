"""Unit tests for the noise model, fault insertion and atom readout."""

# pylint: disable=redefined-outer-name

import math

import numpy as np
import pytest

from src.backend import BackendKind
from src.errors import ConfigError
from src.noise import (
    EmissionEvent,
    MismatchEvent,
    NoiseModel,
    WaitEvent,
    apply_noise,
    dephasing_flip_probability,
    fault_listener,
    linear_mismatch_dephasing,
    load_noise_model,
    readout_spin,
    sample_photon_survival,
    sample_readout_attempts,
    save_noise_model,
)
from src.qubits import Basis
from src.register import SpinState, init_register
from src.timing import WavePacket, WavepacketShape


class TestNoiseModel:
    """Test suite for NoiseModel."""

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"loss_per_photon": 1.5},
            {"depolarizing_per_emission": -0.1},
            {"spin_dephasing_per_us": -1.0},
            {"mismatch_dephasing_per_ns": -0.01},
        ],
    )
    def test_invalid_values(self, kwargs):
        """Test validation of probabilities and rates."""
        with pytest.raises(ValueError):
            NoiseModel(**kwargs)

    def test_default_is_noiseless(self):
        """Test that the default model inserts no faults."""
        assert NoiseModel().is_unitary_noiseless
        assert not NoiseModel(depolarizing_per_emission=0.1).is_unitary_noiseless

    def test_from_dict_rejects_bad_values(self):
        """Test that invalid files are configuration errors."""
        with pytest.raises(ConfigError):
            NoiseModel.from_dict({"loss_per_photon": "lots"})

    def test_save_and_load(self, tmp_path):
        """Test that a noise file loads back equal."""
        model = NoiseModel(
            loss_per_photon=0.5,
            depolarizing_per_emission=0.02,
            wavepacket=WavePacket(WavepacketShape.DELTA, offset_ns=40.0, jitter_ns=2.0),
        )
        path = tmp_path / "noise.json"
        save_noise_model(model, path)
        assert load_noise_model(path) == model

    def test_missing_file(self, tmp_path):
        """Test that a missing noise file is a configuration error."""
        with pytest.raises(ConfigError):
            load_noise_model(tmp_path / "absent.json")


class TestFaults:
    """Test suite for Pauli fault insertion."""

    def test_noiseless_model_inserts_nothing(self, plus_register, rng):
        """Test that every event is a no-op without noise."""
        model = NoiseModel()
        photon = plus_register.emit_photon(plus_register.spin(1))
        for event in (
            EmissionEvent(plus_register.spin(1), photon),
            WaitEvent(100.0),
            MismatchEvent(300.0),
        ):
            assert apply_noise(plus_register, event, model, rng) == []

    def test_full_depolarizing_hits_spin_and_photon(self, plus_register, rng):
        """Test that p = 1 faults both qubits of an emission."""
        photon = plus_register.emit_photon(plus_register.spin(2))
        model = NoiseModel(depolarizing_per_emission=1.0)
        event = EmissionEvent(plus_register.spin(2), photon)
        faults = apply_noise(plus_register, event, model, rng)
        assert [index for index, _ in faults] == [1, 2]
        assert all(letter in "XYZ" for _, letter in faults)

    def test_dephasing_probability(self):
        """Test the pure-dephasing flip probability."""
        assert dephasing_flip_probability(0.0, 10.0) == 0.0
        assert dephasing_flip_probability(1.0, 1.0) == pytest.approx((1 - math.exp(-1)) / 2)
        assert dephasing_flip_probability(1.0, 1e6) == pytest.approx(0.5)

    def test_mismatch_dephasing_is_capped(self):
        """Test the linear |t_R - t_L| dependence and its cap."""
        model = NoiseModel(mismatch_dephasing_per_ns=0.001)
        assert linear_mismatch_dephasing(model, -100.0) == pytest.approx(0.1)
        assert linear_mismatch_dephasing(model, 5000.0) == 0.5

    def test_custom_mismatch_function(self, plus_register, rng, mocker):
        """Test that the mismatch dependence is pluggable."""
        mismatch = mocker.Mock(return_value=1.0)
        faults = apply_noise(plus_register, MismatchEvent(7.0), NoiseModel(), rng, mismatch)
        mismatch.assert_called_once_with(NoiseModel(), 7.0)
        assert faults == [(0, "Z")]

    def test_fault_listener_applies_patterns_in_order(self):
        """Test that fixed faults follow the emission order."""
        register = init_register(SpinState.ZERO, BackendKind.DENSE)
        register.emission_listener = fault_listener([("X", "I"), ("I", "Z")])
        register.emit_photon(register.spin(1))
        register.emit_photon(register.spin(2))
        register.emit_photon(register.spin(1))
        assert register.expectation(register.pauli({0: "Z"})) == pytest.approx(-1.0)
        assert register.expectation(register.pauli({2: "Z"})) == pytest.approx(1.0)
        assert register.expectation(register.pauli({4: "Z"})) == pytest.approx(-1.0)


class TestReadout:
    """Test suite for repeat-until-success atom readout."""

    def test_lossless_readout_takes_one_attempt(self, rng):
        """Test that a lossless readout succeeds immediately."""
        register = init_register(SpinState.ZERO, rng=rng)
        assert readout_spin(register, 1, Basis.Z, loss=0.0) == (1, 1)

    def test_total_loss_fails(self, rng):
        """Test that every photon lost means no outcome."""
        register = init_register(SpinState.ZERO, rng=rng)
        assert readout_spin(register, 2, Basis.Z, max_attempts=3, loss=1.0) == (None, 3)

    def test_at_least_one_attempt(self, rng):
        """Test that zero attempts are rejected."""
        with pytest.raises(ValueError):
            readout_spin(init_register(rng=rng), 1, Basis.Z, max_attempts=0)

    def test_success_fraction_with_half_loss(self):
        """Test 1 - 0.5^3 = 0.875 readout success over 10^5 trials within 3 sigma."""
        rng = np.random.default_rng(99)
        n = 100_000
        success, attempts = sample_readout_attempts(0.5, 3, n, rng)
        sigma = math.sqrt(0.875 * 0.125 / n)
        assert abs(success.mean() - 0.875) < 3 * sigma
        assert attempts.max() == 3
        assert np.all(attempts[~success] == 3)

    def test_sequential_readout_matches_vectorised(self):
        """Test that the per-register readout has the same success rate."""
        rng = np.random.default_rng(5)
        register = init_register(SpinState.ZERO, rng=rng)
        n = 4000
        successes = sum(
            readout_spin(register, 1, Basis.Z, loss=0.5)[0] is not None for _ in range(n)
        )
        assert abs(successes / n - 0.875) < 4 * math.sqrt(0.875 * 0.125 / n)

    def test_photon_survival(self):
        """Test that three photons survive a 0.5 loss with probability 1/8."""
        rng = np.random.default_rng(3)
        n = 100_000
        survived = sample_photon_survival(0.5, 3, n, rng)
        assert abs(survived.mean() - 0.125) < 3 * math.sqrt(0.125 * 0.875 / n)
        assert np.all(sample_photon_survival(0.9, 0, 10, rng))
