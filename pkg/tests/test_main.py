"""Command line front end: reports, formats, configuration files and exit codes."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from main import main, Application, NAME_APPLICATION, __version__

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def run_json(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


class TestCommands:

    def test_probabilities_at_pi(self, capsys):
        code, record = run_json(capsys, "probabilities", "--n", "1", "--theta", "3.14159265")
        assert code == 0
        assert record["command"] == "probabilities"
        assert record["versions"] == {"eprinfo": __version__, "rng": "philox4x64-10"}
        row = record["outputs"]["rows"][0]
        assert row["p_pp"] == pytest.approx(0.5, abs=1e-8)
        assert row["p_pm"] == pytest.approx(0.0, abs=1e-8)
        assert record["outputs"]["summary"]["fisher_information"] == 1.0

    def test_probabilities_grid(self, capsys):
        code, record = run_json(capsys, "probabilities", "--n", "2", "--grid-points", "64")
        assert code == 0
        assert len(record["outputs"]["rows"]) == 64
        assert record["inputs"]["grid_points"] == 64

    def test_degrees(self, capsys):
        code, record = run_json(capsys, "probabilities", "--theta", "90", "--degrees")
        assert code == 0
        assert record["inputs"]["theta"] == pytest.approx(np.pi / 2)
        assert record["outputs"]["rows"][0]["p_pp"] == pytest.approx(0.25)
        for value in record["outputs"]["fisher_numeric"].values():
            assert value == pytest.approx(1.0, abs=1e-6)

    def test_solve(self, capsys):
        code, record = run_json(capsys, "solve", "--n", "2")
        assert code == 0
        outputs = record["outputs"]
        assert outputs["B"]["pp"] == pytest.approx(np.sqrt(2.0))
        assert outputs["C"]["pp"] == 0.0
        assert outputs["a"] == 1.0
        assert outputs["structural_residual_max"] < 1e-6

    def test_metric(self, capsys):
        code, record = run_json(capsys, "metric", "--n", "-1", "--grid-points", "64")
        assert code == 0
        assert len(record["outputs"]["rows"]) == 64
        assert record["outputs"]["spread"] < 1e-8

    def test_simulate(self, capsys):
        code, record = run_json(capsys, "simulate", "--theta", "1.0", "--samples", "1000", "--seed", "42")
        assert code == 0
        counts = record["outputs"]["counts"]
        assert sum(counts.values()) == 1000
        assert record["seed"] == 42

    def test_estimate_mle(self, capsys):
        code, record = run_json(capsys, "estimate", "--n", "1", "--theta", "1.0", "--samples", "10000", "--seed", "7",
                                "--estimator", "mle")
        assert code == 0
        estimates = record["outputs"]["estimates"]
        assert len(estimates) == 1
        assert estimates[0]["estimator"] == "mle"
        assert abs(estimates[0]["theta_hat"] - 1.0) < 3.0 * np.sqrt(estimates[0]["lrcb"])
        assert estimates[0]["ci_low"] <= estimates[0]["theta_hat"] <= estimates[0]["ci_high"]

    def test_estimate_replications(self, capsys):
        code, record = run_json(capsys, "estimate", "--theta", "1.0", "--estimator", "mle", "--estimator", "pp",
                                "--samples", "100", "--replications", "200")
        assert code == 0
        assert [e["estimator"] for e in record["outputs"]["experiments"]] == ["mle", "pp"]
        assert record["outputs"]["rcf"]["bound"] == pytest.approx(0.01)

    def test_csv(self, capsys):
        code = main(["probabilities", "--theta", "0", "--format", "csv"])
        lines = capsys.readouterr().out.splitlines()
        assert code == 0
        assert lines[0] == "theta,p_pp,p_mm,p_pm,p_mp"
        assert lines[1] == "0.0,0.0,0.0,0.5,0.5"

    def test_output_file(self, tmp_path, capsys):
        target = tmp_path / "report.json"
        assert main(["solve", "--output", str(target)]) == 0
        assert capsys.readouterr().out == ""
        assert json.loads(target.read_text())["command"] == "solve"


class TestErrors:

    def test_computation_error(self, capsys):
        code = main(["metric", "--grid-points", "8"])
        captured = capsys.readouterr()
        assert code == 1
        assert captured.out == ""
        record = json.loads(captured.err)
        assert record["error"] == "invalid-argument"
        assert "grid_points" in record["message"]

    @pytest.mark.parametrize("n", ["3", "0", "-3"])
    def test_unsupported_model_is_usage_error(self, n, capsys):
        with pytest.raises(SystemExit) as info:
            main(["probabilities", "--n", n, "--theta", "1"])
        assert info.value.code == 2

    def test_missing_theta(self, capsys):
        with pytest.raises(SystemExit) as info:
            main(["simulate"])
        assert info.value.code == 2

    @pytest.mark.parametrize("argv", [
        ["estimate", "--theta", "1", "--estimator", "xx"],
        ["simulate", "--theta", "1", "--samples", "0"],
        ["simulate", "--theta", "1", "--seed", "-1"],
        ["unknown"],
    ])
    def test_usage_errors(self, argv, capsys):
        with pytest.raises(SystemExit) as info:
            main(argv)
        assert info.value.code == 2

    def test_log_file(self, tmp_path, capsys):
        target = tmp_path / "events.log"
        main(["metric", "--grid-points", "8", "--log", str(target)])
        text = target.read_text(encoding="utf-8")
        assert text.startswith("%s V%s Event Log" % (NAME_APPLICATION, __version__))
        assert "grid_points must be" in text


class TestConfiguration:

    def test_round_trip(self, tmp_path, capsys):
        target = tmp_path / "config.xml"
        assert main(["solve", "--samples", "123", "--seed", "99", "--save-config", str(target)]) == 0
        capsys.readouterr()
        app = Application()
        app._loadConfiguration(str(target))
        assert app.estimation.samples == 123
        assert app.estimation.seed == 99
        assert app.verification.seed == 99

    def test_config_applies(self, tmp_path, capsys):
        target = tmp_path / "config.xml"
        main(["solve", "--samples", "250", "--save-config", str(target)])
        capsys.readouterr()
        code, record = run_json(capsys, "simulate", "--theta", "1", "--config", str(target))
        assert code == 0
        assert record["outputs"]["M"] == 250

    def test_newer_version_rejected(self, tmp_path, capsys):
        target = tmp_path / "config.xml"
        main(["solve", "--save-config", str(target)])
        capsys.readouterr()
        text = target.read_text(encoding="utf-8").replace('version="%s"' % __version__, 'version="9.0.0"', 1)
        target.write_text(text, encoding="utf-8")
        code = main(["solve", "--config", str(target)])
        assert code == 1
        assert json.loads(capsys.readouterr().err)["error"] == "invalid-argument"

    def test_not_a_configuration(self, tmp_path, capsys):
        target = tmp_path / "other.xml"
        target.write_text("<Other/>", encoding="utf-8")
        assert main(["solve", "--config", str(target)]) == 1
        assert "not a valid" in json.loads(capsys.readouterr().err)["message"]


class TestDeterminism:

    def test_simulate_is_byte_identical(self):
        argv = [sys.executable, "-m", "main", "simulate", "--theta", "0.7", "--n", "2",
                "--samples", "5000", "--seed", "12345"]
        first = subprocess.run(argv, cwd=ROOT, capture_output=True, check=True).stdout
        second = subprocess.run(argv, cwd=ROOT, capture_output=True, check=True).stdout
        assert first == second
        assert json.loads(first)["outputs"]["M"] == 5000
