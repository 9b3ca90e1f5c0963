import io
import json
import logging
import math

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from foukit import __version__
from foukit.cli import EXIT_DATA, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main, parse_grid, parse_structure
from foukit.errors import DomainError
from foukit.io import read_path_csv

DOUBLE = json.dumps({"lambdas": [{"value": 0.8, "mult": 2}], "hurst": 0.5})
OU = json.dumps({"lambdas": [{"value": 0.8}], "sigma": 1.0, "hurst": 0.5})


@pytest.fixture(autouse=True)
def restore_logging():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


@pytest.fixture
def simulated_series(tmp_path):
    target = tmp_path / "path.csv"
    code = main(["simulate", "--model", OU, "--n", "200", "--T", "100", "--seed", "3", "--out", str(target), "-q"])
    assert code == EXIT_OK
    return target


class TestParsing:
    def test_range_includes_stop(self):
        assert_allclose(parse_grid("0:1:0.25"), [0.0, 0.25, 0.5, 0.75, 1.0])
        assert_allclose(parse_grid("10,11,12"), [10.0, 11.0, 12.0])

    @pytest.mark.parametrize("text", ["1:0:0.1", "0:1:0", "a,b", "0:1"])
    def test_bad_grid(self, text):
        with pytest.raises(DomainError):
            parse_grid(text)

    def test_structure(self):
        assert parse_structure("2") == (2,)
        assert parse_structure("1, 1") == (1, 1)
        assert parse_structure([2, 1]) == (2, 1)
        with pytest.raises(DomainError):
            parse_structure("0")
        with pytest.raises(DomainError):
            parse_structure("two")


class TestUsage:
    def test_version(self, capsys):
        assert main(["--version"]) == EXIT_OK
        assert __version__ in capsys.readouterr().out

    def test_unknown_command(self):
        assert main(["transmogrify"]) == EXIT_USAGE

    def test_missing_required_setting(self):
        assert main(["simulate", "-q"]) == EXIT_USAGE

    def test_domain_error(self):
        assert main(["simulate", "--model", DOUBLE, "--T", "-1", "-q"]) == EXIT_USAGE


class TestSimulate:
    def test_writes_path(self, tmp_path):
        target = tmp_path / "p.csv"
        assert main(["simulate", "--model", DOUBLE, "--n", "64", "--T", "8", "--out", str(target), "-q"]) == EXIT_OK
        path = read_path_csv(target)
        assert path.n == 64
        assert path.delta == pytest.approx(0.125)

    def test_seed_reproduces(self, capsys):
        args = ["simulate", "--model", DOUBLE, "--n", "32", "--T", "4", "--seed", "7", "-q"]
        main(args)
        first = capsys.readouterr().out
        main(args)
        assert capsys.readouterr().out == first
        assert first.startswith("t,x")

    def test_config_file_and_flag_precedence(self, tmp_path, capsys):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"model": json.loads(DOUBLE), "n": 50, "T": 5.0}))
        assert main(["simulate", "--config", str(config), "--n", "20", "-q"]) == EXIT_OK
        captured = capsys.readouterr()
        assert len(captured.out.strip().splitlines()) == 21
        assert '"resolved_config"' in captured.err

    def test_missing_model_file(self, tmp_path):
        assert main(["simulate", "--model", str(tmp_path / "none.json"), "-q"]) == EXIT_DATA

    def test_operator_path(self, capsys):
        code = main(["simulate", "--model", OU, "--n", "40", "--T", "4", "--method", "operator_path", "-q"])
        assert code == EXIT_OK
        assert len(capsys.readouterr().out.strip().splitlines()) == 41


class TestFit:
    def test_fit_report(self, simulated_series, tmp_path):
        report_file = tmp_path / "report.json"
        code = main(
            [
                "fit", "--series", str(simulated_series), "--structure", "1", "--T", "100",
                "--hurst", "0.5", "--sigma", "1", "--aic", "--out", str(report_file), "-q",
            ]
        )
        assert code == EXIT_OK
        report = json.loads(report_file.read_text())
        assert report["multiplicities"] == [1]
        assert 0.01 <= report["lambda_hat"][0] <= 1.5
        assert report["hurst_estimated"] is False
        assert report["aic"] == pytest.approx(2.0 * 1 - 2.0 * report["loglik"])

    def test_missing_series(self, tmp_path):
        code = main(["fit", "--series", str(tmp_path / "none.csv"), "--structure", "1", "--T", "10", "-q"])
        assert code == EXIT_DATA

    def test_unknown_fixture(self):
        assert main(["fit", "--series", "fixture:nope", "--structure", "1", "--T", "10", "-q"]) == EXIT_DATA

    def test_optimizer_failure(self, simulated_series):
        code = main(
            [
                "fit", "--series", str(simulated_series), "--structure", "1", "--T", "100",
                "--hurst", "0.5", "--sigma", "1", "--whittle", '{"max_iter": 1, "multistart": 1}', "-q",
            ]
        )
        assert code == EXIT_NUMERICAL


class TestForecast:
    def test_with_fitted_report(self, simulated_series, tmp_path):
        report_file = tmp_path / "report.json"
        main(
            [
                "fit", "--series", str(simulated_series), "--structure", "1", "--T", "100",
                "--hurst", "0.5", "--sigma", "1", "--out", str(report_file), "-q",
            ]
        )
        predictions = tmp_path / "pred.csv"
        metrics = tmp_path / "metrics.json"
        code = main(
            [
                "forecast", "--series", str(simulated_series), "--model", str(report_file), "--T", "100",
                "--m", "10", "--out", str(predictions), "--metrics-out", str(metrics), "-q",
            ]
        )
        assert code == EXIT_OK
        frame = pd.read_csv(predictions)
        assert list(frame.columns) == ["t", "observed", "predicted", "error"]
        assert len(frame) == 10
        assert frame["t"].iloc[-1] == pytest.approx(100.0)
        summary = json.loads(metrics.read_text())
        assert set(summary["measures"]) == {"rmse", "mae", "w1", "w2"}
        assert summary["m"] == 10

    def test_select_horizon(self, simulated_series, tmp_path, capsys):
        table_file = tmp_path / "table.csv"
        metrics = tmp_path / "metrics.json"
        code = main(
            [
                "forecast", "--series", str(simulated_series), "--structure", "1", "--hurst", "0.5",
                "--sigma", "1", "--select-T", "50,100", "--m", "10", "--table-out", str(table_file),
                "--metrics-out", str(metrics), "-q",
            ]
        )
        assert code == EXIT_OK
        table = pd.read_csv(table_file)
        assert list(table["T"]) == [50.0, 100.0]
        assert sorted(table["rank"]) == [1, 2]
        best = table.loc[table["rank"] == 1, "T"].item()
        assert json.loads(metrics.read_text())["T"] == best
        assert "Horizon ranking" in capsys.readouterr().err

    def test_too_many_targets(self, simulated_series):
        code = main(
            ["forecast", "--series", str(simulated_series), "--model", OU, "--T", "100", "--m", "500", "-q"]
        )
        assert code == EXIT_USAGE


class TestMcStudy:
    def test_list_scenarios(self, capsys):
        assert main(["mc-study", "--list-scenarios"]) == EXIT_OK
        assert "double_root_h07" in capsys.readouterr().out

    def test_inline_study(self, tmp_path):
        study = {"model": json.loads(DOUBLE), "T_values": [20.0], "n_values": [300], "m": 2}
        target = tmp_path / "mc.csv"
        code = main(["mc-study", "--mc", json.dumps(study), "--no-lambda", "--seed", "4", "--out", str(target), "-q"])
        assert code == EXIT_OK
        table = pd.read_csv(target)
        assert len(table) == 1
        assert {"T", "n", "m", "H", "sigma", "h_mean", "h_sd"} <= set(table.columns)
        assert table.loc[0, "m"] == 2

    def test_overrides(self, tmp_path):
        study = {"model": json.loads(DOUBLE), "m": 5}
        target = tmp_path / "mc.csv"
        code = main(
            [
                "mc-study", "--mc", json.dumps(study), "--no-lambda", "--replications", "2",
                "--T-values", "10,20", "--n-values", "100", "--out", str(target), "-q",
            ]
        )
        assert code == EXIT_OK
        table = pd.read_csv(target)
        assert list(table["T"]) == [10.0, 20.0]
        assert list(table["m"]) == [2, 2]

    def test_needs_a_study(self):
        assert main(["mc-study", "-q"]) == EXIT_USAGE

    def test_invalid_document(self):
        assert main(["mc-study", "--mc", '{"model": {"lambdas": []}}', "-q"]) == EXIT_DATA


class TestDumps:
    def test_acvf(self, capsys):
        assert main(["acvf", "--model", DOUBLE, "--lags", "1,0,-1", "-q"]) == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert list(frame["lag"]) == [0.0, 1.0]
        assert_allclose(frame["acvf"], [0.3125, 0.0280831], atol=5e-8)

    def test_acvf_with_empirical_column(self, simulated_series, capsys):
        code = main(["acvf", "--model", OU, "--lags", "0:2:0.5", "--series", str(simulated_series), "--T", "100", "-q"])
        assert code == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert frame["empirical"].notna().all()
        assert frame["empirical"].iloc[0] > 0

    def test_spectrum(self, capsys):
        assert main(["spectrum", "--model", DOUBLE, "--freqs", "1", "-q"]) == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert_allclose(frame["density"], [1.0 / (2.0 * math.pi * 1.64**2)], rtol=1e-12)

    def test_spectrum_default_grid_avoids_pole(self, capsys):
        model = json.dumps({"lambdas": [{"value": 0.5}], "hurst": 0.7})
        assert main(["spectrum", "--model", model, "-q"]) == EXIT_OK
        frame = pd.read_csv(io.StringIO(capsys.readouterr().out))
        assert len(frame) == 100
        assert (frame["x"] > 0).all()
        assert np.isfinite(frame["density"]).all()

    def test_spectrum_pole(self):
        model = json.dumps({"lambdas": [{"value": 0.5}], "hurst": 0.7})
        assert main(["spectrum", "--model", model, "--freqs", "0", "-q"]) == EXIT_USAGE
