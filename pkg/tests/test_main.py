"""Tests for the command-line entry point."""

# pylint: disable=redefined-outer-name

import json

import pytest

from src import settings
from src.main import build_parser, main
from src.montecarlo import CampaignResult, CoincidenceStats
from src.reports import ShotRecord


def _lines(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]


@pytest.fixture
def box_graph(tmp_path):
    """Graph file of the box protocol's target state."""
    path = tmp_path / "box_graph.json"
    assert main(["stabilizers", "--protocol", "box", "--save-graph", str(path)]) == 0
    return path


class TestParser:
    """Test suite for argument parsing."""

    def test_command_is_required(self):
        """Test that a bare call is a usage error."""
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_scan_needs_a_grid(self):
        """Test that --grid or --values must be given."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["scan", "--parameter", "t0"])

    def test_montecarlo_refuses_exhaustive_heralds(self):
        """Test the restricted herald choices of campaigns."""
        with pytest.raises(SystemExit):
            build_parser().parse_args(["montecarlo", "--herald", "exhaustive"])


class TestRunCommand:
    """Test suite for the run subcommand."""

    def test_run_writes_result_file(self, tmp_path):
        """Test a forced tree run and its summary record."""
        out = tmp_path / "tree.jsonl"
        code = main(["run", "--protocol", "tree", "--herald", "force", "--output", str(out)])
        assert code == settings.EXIT_OK
        header, *records = _lines(out)
        assert (header["kind"], header["program"], header["backend"]) == (
            "run",
            "tree",
            "tableau",
        )
        summary = records[-1]
        assert summary["record"] == "summary" and summary["success"]
        stabilizers = [r for r in records if r["record"] == "stabilizer"]
        assert len(stabilizers) == 8
        assert all(r["value"] == pytest.approx(1.0) for r in stabilizers)

    def test_dense_run_reports_overlap(self, tmp_path):
        """Test that the dense backend adds the overlap with the ideal state."""
        out = tmp_path / "box.jsonl"
        argv = ["run", "--protocol", "box", "--backend", "dense", "--herald", "force"]
        assert main(argv + ["--output", str(out)]) == 0
        assert _lines(out)[-1]["overlap"] == pytest.approx(1.0)

    def test_reruns_are_byte_identical(self, tmp_path):
        """Test that the same seed writes the same bytes."""
        paths = [tmp_path / "first.jsonl", tmp_path / "second.jsonl"]
        for path in paths:
            main(["run", "--protocol", "hexagon", "--seed", "9", "--output", str(path)])
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_seed_from_environment(self, tmp_path, monkeypatch):
        """Test that the header records the environment seed."""
        monkeypatch.setenv(settings.SEED_ENV_VAR, "31")
        out = tmp_path / "run.jsonl"
        main(["run", "--protocol", "box", "--output", str(out)])
        assert _lines(out)[0]["seed"] == 31

    def test_pentagon_on_tableau(self, tmp_path):
        """Test the simulation-error exit code."""
        argv = ["run", "--protocol", "pentagon", "--backend", "tableau"]
        assert main(argv + ["--output", str(tmp_path / "x.jsonl")]) == (
            settings.EXIT_SIMULATION_ERROR
        )

    def test_unknown_protocol(self):
        """Test the configuration-error exit code."""
        assert main(["run", "--protocol", "octagon"]) == settings.EXIT_CONFIG_ERROR

    def test_records_without_output_go_to_stdout(self, capsys):
        """Test printing when no output file is given."""
        main(["run", "--protocol", "box", "--herald", "force"])
        lines = capsys.readouterr().out.splitlines()
        assert json.loads(lines[-1])["record"] == "summary"


class TestStabilizersCommand:
    """Test suite for the stabilizers subcommand."""

    def test_box_generators_and_settings(self, capsys):
        """Test generator lines and the two witness settings."""
        assert main(["stabilizers", "--protocol", "box"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0].startswith("v0: ")
        assert any(line.startswith("M_a: ") for line in lines)
        assert any(line.startswith("M_b: ") for line in lines)

    def test_odd_ring_has_no_settings(self, capsys):
        """Test the message for non-bipartite graphs."""
        main(["stabilizers", "--protocol", "pentagon"])
        assert "no witness settings" in capsys.readouterr().out

    def test_graph_file(self, box_graph, capsys):
        """Test reading a saved graph."""
        capsys.readouterr()
        assert main(["stabilizers", "--graph", str(box_graph)]) == 0
        assert "M_a: " in capsys.readouterr().out


class TestCampaignAndWitness:
    """Test suite for the montecarlo and witness subcommands."""

    def test_ideal_campaign_certifies_entanglement(self, tmp_path, box_graph):
        """Test that lossless forced shots give P = 1."""
        stats, shots, report = (tmp_path / name for name in ("mc", "shots", "witness"))
        argv = [
            "montecarlo",
            "--protocol",
            "box",
            "--herald",
            "force",
            "--policy",
            "none",
            "--trials",
            "20",
            "--output",
            str(stats),
            "--shots",
            str(shots),
            "--clicks",
            str(tmp_path / "clicks"),
        ]
        assert main(argv) == 0
        record = _lines(stats)[1]
        assert record["n_accepted"] == 20
        assert record["reference"]["events_per_min"] == 2.3
        assert len(_lines(tmp_path / "clicks")) == 1 + 80

        argv = ["witness", "--records", str(shots), "--graph", str(box_graph)]
        assert main(argv + ["--output", str(report)]) == 0
        result = _lines(report)[1]
        assert result["p"] == 1.0
        assert result["genuine_entanglement"]

    def test_witness_of_odd_ring(self, tmp_path):
        """Test the analysis-error exit code for a non-bipartite graph."""
        graph = tmp_path / "pentagon.json"
        main(["stabilizers", "--protocol", "pentagon", "--save-graph", str(graph)])
        records = tmp_path / "shots.jsonl"
        records.write_text("", encoding="utf-8")
        assert main(["witness", "--records", str(records), "--graph", str(graph)]) == (
            settings.EXIT_ANALYSIS_ERROR
        )

    def test_witness_without_shots(self, tmp_path, box_graph):
        """Test that an empty shot file is an analysis error."""
        records = tmp_path / "shots.jsonl"
        records.write_text('{"format_version": 1, "kind": "shots", "seed": 0}\n', encoding="utf-8")
        assert main(["witness", "--records", str(records), "--graph", str(box_graph)]) == 4

    def test_invalid_trials(self):
        """Test that a campaign needs trials."""
        assert main(["montecarlo", "--protocol", "box", "--trials", "0"]) == 2


class TestScanCommand:
    """Test suite for the scan subcommand."""

    def test_t0_scan_with_fits(self, tmp_path):
        """Test one row per t0 and a fringe fit per branch."""
        out = tmp_path / "t0.jsonl"
        argv = ["scan", "--protocol", "tree", "--parameter", "t0", "--grid", "0", "5", "6"]
        assert main(argv + ["--output", str(out)]) == 0
        header, *rows = _lines(out)
        assert [row["t0_us"] for row in rows] == pytest.approx([0.0, 1.0, 2.0, 3.0, 4.0, 5.0])
        assert set(header["fits"]) == {"branch1", "branch2"}
        assert all(-1.0 <= row["parity_1"] <= 1.0 for row in rows)

    def test_noise_scan(self, tmp_path):
        """Test that the Bell fidelity falls with the depolarizing strength."""
        out = tmp_path / "noise.jsonl"
        argv = ["scan", "--parameter", "noise_p", "--values", "0", "0.05", "0.1"]
        assert main(argv + ["--output", str(out)]) == 0
        header, *rows = _lines(out)
        fidelities = [row["bell_fidelity"] for row in rows]
        assert fidelities[0] == pytest.approx(1.0)
        assert fidelities == sorted(fidelities, reverse=True)
        assert 0.0 < header["calibrated_p"] < 0.05

    def test_tau_scan_uses_unfiltered_campaign(self, tmp_path, mocker):
        """Test that the tau scan post-selects the shots of one unfiltered campaign."""
        shots = [
            ShotRecord(0, "a", dict(enumerate("XZXZXZ")), dict.fromkeys(range(6), 1), 10.0),
            ShotRecord(1, "b", dict(enumerate("ZXZXZX")), dict.fromkeys(range(6), 1), 300.0),
        ]
        campaign = mocker.patch(
            "src.main.monte_carlo",
            return_value=CampaignResult(CoincidenceStats("box"), shots, []),
        )
        out = tmp_path / "tau.jsonl"
        argv = ["scan", "--protocol", "box", "--parameter", "tau_max", "--values", "50", "400"]
        assert main(argv + ["--output", str(out), "--trials", "2"]) == 0
        assert campaign.call_args.args[2].name == "none"
        header, *rows = _lines(out)
        assert [row["tau_max_ns"] for row in rows] == [50.0, 400.0]
        assert len(rows[0]["values"]) == len(header["generators"])

    def test_empty_grid(self):
        """Test that a grid of zero points is a configuration error."""
        argv = ["scan", "--parameter", "noise_p", "--grid", "0", "1", "0"]
        assert main(argv) == settings.EXIT_CONFIG_ERROR
