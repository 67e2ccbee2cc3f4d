"""Unit tests for arrival times, click records and post-selection."""

# pylint: disable=redefined-outer-name

import json
import math

import numpy as np
import pytest

from src.errors import ConfigError
from src.timing import (
    POLICY_PRESETS,
    ClickRecord,
    Detector,
    PostSelectionPolicy,
    Verdict,
    WavePacket,
    WavepacketShape,
    acceptance_masks,
    policy_preset,
    post_select,
    read_click_records,
    sample_arrival,
    write_click_records,
)


def _pair(t_first, t_second, run_id=0):
    return (
        ClickRecord(Detector.D_R, t_first, "fuse2@S1", run_id),
        ClickRecord(Detector.D_L, t_second, "fuse2@S2", run_id),
    )


@pytest.fixture
def arrivals():
    """10^5 arrival-time pairs from the default wave packet."""
    rng = np.random.default_rng(2024)
    wavepacket = WavePacket()
    return sample_arrival(wavepacket, rng, 100_000), sample_arrival(wavepacket, rng, 100_000)


class TestWavePacket:
    """Test suite for the arrival-time distribution."""

    def test_mode_near_200ns(self, arrivals):
        """Test that the histogram peaks within 200 +- 50 ns."""
        counts, edges = np.histogram(arrivals[0], bins=np.arange(0.0, 1500.0, 20.0))
        smoothed = np.convolve(counts, np.ones(5) / 5, mode="same")
        mode = edges[np.argmax(smoothed)] + 10.0
        assert abs(mode - 200.0) <= 50.0
        assert WavePacket().peak_ns == pytest.approx(30.0 + 400.0 / 2.4)

    def test_window_acceptance_per_photon(self, arrivals):
        """Test that 98 +- 1 % of photons arrive inside the 1 us window."""
        fraction = np.mean(arrivals[0] <= 1000.0)
        assert abs(fraction - 0.98) <= 0.01

    def test_tau_acceptance_at_400ns(self, arrivals):
        """Test that |t_R - t_L| <= 400 ns keeps 80 +- 5 % of windowed pairs."""
        policy = PostSelectionPolicy((0.0, 1000.0), 400.0)
        in_window, accepted = acceptance_masks(arrivals[0], arrivals[1], policy)
        assert abs(accepted.sum() / in_window.sum() - 0.80) <= 0.05

    def test_delta_shape(self, rng):
        """Test that a delta packet without jitter always arrives at the offset."""
        wavepacket = WavePacket(WavepacketShape.DELTA, offset_ns=50.0)
        assert np.all(sample_arrival(wavepacket, rng, 10) == 50.0)
        assert isinstance(sample_arrival(wavepacket, rng), float)

    def test_jitter_never_goes_negative(self, rng):
        """Test that arrival times are clipped at zero."""
        wavepacket = WavePacket(WavepacketShape.DELTA, offset_ns=0.0, jitter_ns=5.0)
        assert np.all(sample_arrival(wavepacket, rng, 1000) >= 0.0)

    @pytest.mark.parametrize("kwargs", [{"scale_ns": 0.0}, {"offset_ns": -1.0}])
    def test_invalid_parameters(self, kwargs):
        """Test parameter validation."""
        with pytest.raises(ValueError):
            WavePacket(**kwargs)


class TestPostSelection:
    """Test suite for post_select and the presets."""

    @pytest.mark.parametrize(
        "times, verdict",
        [
            ((200.0, 200.0), Verdict.ACCEPT),
            ((200.0, 450.0), Verdict.ACCEPT),
            ((200.0, 500.0), Verdict.REJECT_TAU),
            ((200.0, 1200.0), Verdict.REJECT_WINDOW),
        ],
    )
    def test_default_policy(self, times, verdict):
        """Test window then tau checks of the default policy."""
        assert post_select(_pair(*times), policy_preset("default")) is verdict

    def test_clicks_from_different_attempts(self):
        """Test that a pair must share its run id."""
        first, _ = _pair(100.0, 100.0, 0)
        _, second = _pair(100.0, 100.0, 1)
        with pytest.raises(ValueError):
            post_select((first, second), policy_preset("default"))

    def test_no_post_selection_accepts_everything(self):
        """Test the 'none' preset."""
        assert post_select(_pair(0.0, 5000.0), policy_preset("none")) is Verdict.ACCEPT

    def test_wider_policy_accepts_more(self, arrivals):
        """Test that acceptance grows with window and tau."""
        narrow = PostSelectionPolicy((0.0, 500.0), 20.0)
        wide = PostSelectionPolicy((0.0, 1000.0), 250.0)
        _, narrow_accepted = acceptance_masks(*arrivals, narrow)
        _, wide_accepted = acceptance_masks(*arrivals, wide)
        assert np.all(wide_accepted[narrow_accepted])
        assert wide_accepted.sum() > narrow_accepted.sum()

    def test_unknown_preset(self):
        """Test that unknown preset names are configuration errors."""
        with pytest.raises(ConfigError):
            policy_preset("loose")

    def test_infinite_bounds_serialise_as_null(self):
        """Test that the 'none' preset survives a dictionary round trip."""
        data = POLICY_PRESETS["none"].to_dict()
        assert data["tau_max_ns"] is None
        restored = PostSelectionPolicy.from_dict(data)
        assert math.isinf(restored.tau_max_ns)
        assert restored == POLICY_PRESETS["none"]

    @pytest.mark.parametrize("window, tau", [((10.0, 5.0), 1.0), ((0.0, 1.0), 0.0)])
    def test_invalid_policies(self, window, tau):
        """Test policy validation."""
        with pytest.raises(ValueError):
            PostSelectionPolicy(window, tau)


class TestClickRecords:
    """Test suite for click-record files."""

    def test_field_order(self, tmp_path):
        """Test the header and the stable field order of each record."""
        path = tmp_path / "clicks.jsonl"
        write_click_records(_pair(120.5, 130.0, 3), path, seed=9)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert json.loads(lines[0]) == {"format_version": 1, "kind": "clicks", "seed": 9}
        assert list(json.loads(lines[1])) == ["run_id", "detector", "time_ns", "origin"]
        assert read_click_records(path) == list(_pair(120.5, 130.0, 3))

    def test_wrong_kind(self, tmp_path):
        """Test that another file kind is rejected."""
        path = tmp_path / "shots.jsonl"
        path.write_text('{"kind": "shots"}\n', encoding="utf-8")
        with pytest.raises(ConfigError):
            read_click_records(path)

    def test_negative_time(self):
        """Test that click times cannot be negative."""
        with pytest.raises(ValueError):
            ClickRecord(Detector.D_R, -1.0, "fuse", 0)
