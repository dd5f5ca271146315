"""Command line interface: configs, overrides, reports, exit codes."""

import json
import math

import numpy as np
import pytest

from tetralab.cli import main


def write_config(tmp_path, payload, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def read_report(out_dir):
    with open(out_dir / "report.json", "r", encoding="utf-8") as fh:
        return json.load(fh)


class TestScenarioCommand:
    def test_unstable_run_passes(self, tmp_path):
        cfg = write_config(tmp_path, {"scenario": "unstable_equilibrium"})
        out = tmp_path / "out"
        assert main(["scenario", "run", cfg, "--out", str(out)]) == 0
        rep = read_report(out)
        assert rep["command"] == "scenario"
        assert rep["report"]["passed"] is True
        assert rep["report"]["time_length"] == pytest.approx(
            0.5 * math.log(2), abs=1e-4
        )
        assert (out / "timing.json").exists()

    def test_override_changes_config(self, tmp_path):
        cfg = write_config(tmp_path, {"scenario": "reeb_chord"})
        out = tmp_path / "out"
        code = main(["scenario", "run", cfg, "--out", str(out),
                     "--set", "reeb_factor_amp=0.0"])
        assert code == 0
        rep = read_report(out)
        assert rep["config"]["reeb_factor_amp"] == 0.0
        assert rep["report"]["time_length"] == pytest.approx(
            (math.pi / 4) / 1.5, abs=1e-8
        )

    def test_unknown_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"scenario": "reeb_chord",
                                      "bogus": 1})
        assert main(["scenario", "run", cfg]) == 1

    def test_wrong_type_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"scenario": "reeb_chord",
                                      "n_seeds": "many"})
        assert main(["scenario", "run", cfg]) == 1

    def test_malformed_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        assert main(["scenario", "run", str(path)]) == 1

    def test_config_error_is_usage_error(self, tmp_path):
        cfg = write_config(tmp_path, {"scenario": "nonsense"})
        assert main(["scenario", "run", cfg]) == 1

    def test_report_bytes_reproducible(self, tmp_path):
        cfg = write_config(tmp_path, {"scenario": "reeb_chord"})
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            assert main(["scenario", "run", cfg, "--out",
                         str(out)]) == 0
            outs.append((out / "report.json").read_bytes())
        assert outs[0] == outs[1]


class TestPb4Command:
    def test_estimate_with_band_and_csvs(self, tmp_path):
        cfg = write_config(tmp_path, {
            "n": 48, "expected_low": 3.5, "expected_high": 5.0,
        })
        out = tmp_path / "out"
        assert main(["pb4", "estimate", cfg, "--out", str(out)]) == 0
        rep = read_report(out)
        assert 3.5 <= rep["report"]["estimate"] <= 5.0
        for name in ("F.csv", "G.csv", "plot.csv"):
            assert (out / name).exists()
        grid = np.loadtxt(out / "F.csv", delimiter=",", skiprows=1)
        assert grid.shape == (48, 48)

    def test_band_violation_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, {"n": 48, "expected_low": 100.0})
        out = tmp_path / "out"
        assert main(["pb4", "estimate", cfg, "--out", str(out)]) == 2

    def test_two_grid_difference_reported(self, tmp_path):
        cfg = write_config(tmp_path, {"n": 48, "two_grid": True})
        out = tmp_path / "out"
        assert main(["pb4", "estimate", cfg, "--out", str(out)]) == 0
        rep = read_report(out)
        assert "two_grid_difference" in rep["report"]
        assert rep["report"]["two_grid_difference"] >= 0.0

    def test_threads_flag_reproducible(self, tmp_path):
        cfg = write_config(tmp_path, {"n": 48})
        blobs = []
        for name, threads in (("t1", "1"), ("t8", "8")):
            out = tmp_path / name
            assert main(["pb4", "estimate", cfg, "--out", str(out),
                         "--threads", threads]) == 0
            blobs.append(((out / "report.json").read_bytes(),
                          (out / "F.csv").read_bytes()))
        assert blobs[0] == blobs[1]


class TestChordCommand:
    def test_channel_chord_with_artifacts(self, tmp_path):
        cfg = write_config(tmp_path, {
            "model": "circle", "k": 1, "hamiltonian": "channel",
            "T": 0.25,
        })
        out = tmp_path / "out"
        assert main(["chord", "find", cfg, "--out", str(out)]) == 0
        rep = read_report(out)
        assert rep["report"]["found"] is True
        assert rep["report"]["time_length"] == pytest.approx(
            1.0 / (2 * math.pi), abs=1e-6
        )
        traj = np.loadtxt(out / "trajectory.csv", delimiter=",",
                          skiprows=1)
        assert traj.shape[1] == 3  # t, s, u
        plot = np.loadtxt(out / "plot.csv", delimiter=",", skiprows=1)
        assert plot.shape[1] == 2

    def test_tiny_budget_exits_2(self, tmp_path):
        cfg = write_config(tmp_path, {
            "model": "circle", "k": 1, "hamiltonian": "channel",
            "T": 0.25, "time_budget": 0.01, "n_seeds": 8,
        })
        out = tmp_path / "out"
        assert main(["chord", "find", cfg, "--out", str(out)]) == 2
        rep = read_report(out)
        assert rep["report"]["found"] is False
        assert rep["report"]["best_distance"] > 0.0

    def test_unknown_hamiltonian_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"hamiltonian": "magic"})
        assert main(["chord", "find", cfg, "--out",
                     str(tmp_path / "o")]) == 1


class TestTetragonCommand:
    def test_build_and_smooth(self, tmp_path):
        cfg = write_config(tmp_path, {
            "model": "sphere", "k": 1, "T": 0.25, "eps": 0.05,
        })
        out = tmp_path / "out"
        assert main(["tetragon", "build", cfg, "--out", str(out)]) == 0
        rep = read_report(out)
        assert rep["report"]["kappa"] == pytest.approx(0.25)
        sm = rep["report"]["smoothed"]
        assert sm["area"] == pytest.approx(
            0.25 - (4 - math.pi) * 0.05 ** 2
        )
        assert sm["lagrangian_residual"] <= 1e-8

    def test_invalid_reeb_time_rejected(self, tmp_path):
        cfg = write_config(tmp_path, {"model": "circle", "T": 1.5})
        assert main(["tetragon", "build", cfg, "--out",
                     str(tmp_path / "o")]) == 1


class TestValidateCommand:
    def test_valid_config(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"scenario": "reeb_chord"})
        assert main(["validate", "config", cfg]) == 0
        assert "valid" in capsys.readouterr().out

    def test_schema_selection(self, tmp_path):
        cfg = write_config(tmp_path, {"n": 64})
        assert main(["validate", "config", cfg, "--command", "pb4"]) == 0
        assert main(["validate", "config", cfg,
                     "--command", "scenario"]) == 1

    def test_nested_override_and_dotted_path(self, tmp_path):
        cfg = write_config(tmp_path, {"scenario": "unstable_equilibrium"})
        code = main(["validate", "config", cfg, "--set",
                     "perturbation.delta_target=0.2"])
        assert code == 0
