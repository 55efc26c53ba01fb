import json

import numpy as np
import pytest
from click.testing import CliRunner

from wavetrace.cli import main


@pytest.fixture()
def runner():
    return CliRunner()


FAST_SWEEP = [
    "--kmin", "1.5", "--kmax", "2.5", "--samples", "10",
    "--ntheta", "12", "--nphi", "24",
    "--dirs-ntheta", "6", "--dirs-nphi", "12",
    "--interior-count", "200", "--seed", "42",
]


class TestSweepCommand:
    def test_usage_error_on_inverted_range(self, runner, tmp_path):
        result = runner.invoke(main, ["sweep", "--kmin", "5", "--kmax", "3"])
        assert result.exit_code == 2

    def test_fast_run_produces_artifacts(self, runner, tmp_path):
        csv_path = tmp_path / "s.csv"
        json_path = tmp_path / "s.json"
        result = runner.invoke(
            main, ["sweep", *FAST_SWEEP, "--out-csv", str(csv_path), "--out-json", str(json_path)]
        )
        assert result.exit_code == 0, result.output
        text = csv_path.read_text()
        assert text.startswith("k,indicator\n")
        assert len(text.strip().splitlines()) == 11
        payload = json.loads(json_path.read_text())
        assert payload["config"]["run_config"]["seed"] == 42
        assert payload["dips"] == []

    def test_repeat_runs_byte_identical(self, runner, tmp_path):
        outs = []
        for tag in ("a", "b"):
            csv_path = tmp_path / f"{tag}.csv"
            json_path = tmp_path / f"{tag}.json"
            result = runner.invoke(
                main,
                ["sweep", *FAST_SWEEP, "--out-csv", str(csv_path), "--out-json", str(json_path)],
            )
            assert result.exit_code == 0, result.output
            outs.append((csv_path.read_bytes(), json_path.read_bytes()))
        assert outs[0] == outs[1]

    def test_detects_pi_dip_with_multiplicity(self, runner, tmp_path):
        json_path = tmp_path / "dip.json"
        result = runner.invoke(
            main,
            [
                "sweep", "--kmin", "3.0", "--kmax", "3.3", "--samples", "16",
                "--ntheta", "20", "--nphi", "40",
                "--dirs-ntheta", "10", "--dirs-nphi", "20",
                "--interior-count", "450", "--seed", "0",
                "--out-csv", str(tmp_path / "dip.csv"), "--out-json", str(json_path),
            ],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(json_path.read_text())
        assert len(payload["dips"]) == 1
        dip = payload["dips"][0]
        assert abs(dip["k"] - np.pi) <= 1e-3
        assert dip["multiplicity"] == 1

    def test_unwritable_output_is_usage_error(self, runner, tmp_path):
        result = runner.invoke(
            main, ["sweep", *FAST_SWEEP, "--out-csv", str(tmp_path / "nope" / "x.csv")]
        )
        assert result.exit_code == 2

    def test_config_file_with_flag_precedence(self, runner, tmp_path):
        cfg = {"k_min": 1.5, "k_max": 2.5, "samples": 10, "n_theta": 12, "n_phi": 24,
               "dirs_n_theta": 6, "dirs_n_phi": 12, "interior_count": 200, "seed": 1}
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        json_path = tmp_path / "out.json"
        result = runner.invoke(
            main,
            ["sweep", "--config", str(cfg_path), "--seed", "99",
             "--out-csv", str(tmp_path / "out.csv"), "--out-json", str(json_path)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(json_path.read_text())
        # flag beats config file; config file beats default
        assert payload["config"]["run_config"]["seed"] == 99
        assert payload["config"]["run_config"]["samples"] == 10


class TestEigsCommand:
    def test_ball_analytic_records(self, runner, tmp_path):
        json_path = tmp_path / "eigs.json"
        result = runner.invoke(
            main,
            ["eigs", "--surface", "ball", "--radius", "1", "--kmax", "6.5",
             "--out-json", str(json_path)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(json_path.read_text())
        mults = [r["multiplicity"] for r in payload["records"]]
        assert mults == [1, 3, 5, 1]
        assert all(r["source"] == "ball-analytic" for r in payload["records"])

    def test_empty_list_below_first_eigenvalue(self, runner, tmp_path):
        json_path = tmp_path / "eigs.json"
        result = runner.invoke(
            main, ["eigs", "--surface", "ball", "--kmax", "3", "--out-json", str(json_path)]
        )
        assert result.exit_code == 0, result.output
        assert json.loads(json_path.read_text())["records"] == []

    def test_star_single_layer_source(self, runner, tmp_path):
        json_path = tmp_path / "eigs.json"
        result = runner.invoke(
            main,
            ["eigs", "--surface", "star", "--coef", "2,0,0.1", "--method", "single-layer",
             "--kmin", "2.9", "--kmax", "3.4", "--samples", "26",
             "--ntheta", "16", "--nphi", "32", "--band-limit", "6",
             "--out-json", str(json_path)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(json_path.read_text())
        assert len(payload["records"]) == 1
        assert payload["records"][0]["source"] == "single-layer"

    def test_analytic_star_is_usage_error(self, runner):
        result = runner.invoke(main, ["eigs", "--surface", "star", "--coef", "2,0,0.1"])
        assert result.exit_code == 2


class TestVerifyCommand:
    def test_default_suite_passes(self, runner, tmp_path):
        out = tmp_path / "reports.jsonl"
        result = runner.invoke(main, ["verify", "--out", str(out)])
        assert result.exit_code == 0, result.output
        lines = [json.loads(l) for l in out.read_text().strip().splitlines()]
        assert all(r["passed"] for r in lines)
        assert any(r["check"] == "necessity" for r in lines)
        assert any(r["check"] == "green-reduction" for r in lines)

    def test_off_spectrum_controls_fail_as_designed(self, runner):
        result = runner.invoke(main, ["verify", "--inject-off-spectrum"])
        assert result.exit_code == 0, result.output
        lines = [json.loads(l) for l in result.output.strip().splitlines() if l.startswith("{")]
        controls = [r for r in lines if r["expected_failure"]]
        assert controls
        assert all(not r["passed"] for r in controls)

    def test_unwritable_output(self, runner, tmp_path):
        result = runner.invoke(main, ["verify", "--out", str(tmp_path / "no" / "x.jsonl")])
        assert result.exit_code == 2


class TestFitCommand:
    def test_lost_direction(self, runner, tmp_path):
        json_path = tmp_path / "fit.json"
        result = runner.invoke(
            main,
            ["fit", "--target", "0,0", "--k", "3.14159265358979", "--surface", "ball",
             "--out-json", str(json_path)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(json_path.read_text())
        assert abs(payload["residual"] - 1.0) <= 1e-6

    def test_representable_target(self, runner, tmp_path):
        json_path = tmp_path / "fit.json"
        result = runner.invoke(
            main, ["fit", "--target", "0,0", "--k", "1.0", "--out-json", str(json_path)]
        )
        assert result.exit_code == 0, result.output
        assert json.loads(json_path.read_text())["residual"] <= 1e-8

    def test_invalid_harmonic_index(self, runner):
        result = runner.invoke(main, ["fit", "--target", "5,9", "--k", "1.0"])
        assert result.exit_code == 2
