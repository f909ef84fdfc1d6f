import csv
import json
import os

import pytest

from roughwave.cli import load_config, main
from roughwave.errors import ConfigError


def run_cli(*argv):
    return main(list(argv))


class TestConfig:
    def test_defaults_parse(self):
        cfg = load_config(None)
        assert cfg.params.sigma == 1.0 and cfg.grid.K == 64
        assert cfg.s is None  # auto

    def test_file_overrides(self, tmp_path):
        path = tmp_path / "run.ini"
        path.write_text("[model]\nsigma = 2.0\ndelta = 1.0\n\n[run]\nseed = 9\n")
        cfg = load_config(str(path))
        assert cfg.params.sigma == 2.0 and cfg.params.delta == 1.0
        assert cfg.seed == 9

    def test_uppercase_keys_survive_configparser(self, tmp_path):
        # configparser lowercases option names; M and K must still match
        path = tmp_path / "run.ini"
        path.write_text("[grid]\nM = 8\nK = 32\n")
        cfg = load_config(str(path))
        assert cfg.grid.M == 8 and cfg.grid.K == 32

    def test_env_override(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ROUGHWAVE_MODEL_SIGMA", "2.0")
        monkeypatch.setenv("ROUGHWAVE_MODEL_DELTA", "0.5")
        cfg = load_config(None)
        assert cfg.params.sigma == 2.0 and cfg.params.delta == 0.5

    def test_malformed_model_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[model]\nsigma = 1.0\ndelta = 2.0\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_unknown_key_rejected(self, tmp_path):
        path = tmp_path / "bad.ini"
        path.write_text("[model]\nwhatever = 3\n")
        with pytest.raises(ConfigError):
            load_config(str(path))

    def test_bad_config_exit_code(self, tmp_path, capsys):
        path = tmp_path / "bad.ini"
        path.write_text("[model]\nsigma = 1.0\ndelta = 2.0\n")
        assert run_cli("--config", str(path), "kernels") == 2
        assert "delta" in capsys.readouterr().err


class TestKernelsCommand:
    def test_default_sweep(self, tmp_path):
        out = tmp_path / "k"
        assert run_cli("kernels", "--out", str(out)) == 0
        with open(out / "kernels.csv") as fh:
            rows = list(csv.DictReader(fh))
        # one row per (regime, lambda, r, t, which)
        assert len(rows) == 3 * 4 * 4 * 4 * 4
        seen = {(r["sigma"], r["delta"]) for r in rows}
        assert len(seen) == 3
        assert os.path.exists(out / "manifest.json")

    def test_regime_filter(self, tmp_path):
        out = tmp_path / "k"
        assert run_cli("kernels", "--regime", "scale_invariant", "--out", str(out)) == 0
        with open(out / "kernels.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert {(r["sigma"], r["delta"]) for r in rows} == {("2.0", "1.0")}

    def test_unknown_regime(self, tmp_path, capsys):
        assert run_cli("kernels", "--regime", "bogus", "--out", str(tmp_path)) == 2


class TestVerifyCommand:
    def test_single_suite_pass(self, tmp_path, capsys):
        out = tmp_path / "v"
        assert run_cli("verify", "--suite", "kernel_bounds", "--seed", "7", "--out", str(out)) == 0
        assert (out / "suite_kernel_bounds.json").exists()
        assert "kernel_bounds" in capsys.readouterr().out

    def test_unknown_suite(self, tmp_path, capsys):
        assert run_cli("verify", "--suite", "nope", "--out", str(tmp_path)) == 2
        assert "unknown suite" in capsys.readouterr().err

    def test_deterministic_reports(self, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        for out in (out1, out2):
            assert run_cli("verify", "--suite", "product_estimate", "--seed", "5", "--out", str(out)) == 0
        b1 = (out1 / "suite_product_estimate.json").read_bytes()
        b2 = (out2 / "suite_product_estimate.json").read_bytes()
        assert b1 == b2


class TestSolveCommand:
    def test_desk_solve_and_report(self, tmp_path, capsys):
        out = tmp_path / "s"
        code = run_cli("solve", "--out", str(out))
        assert code == 0
        meta = json.load(open(out / "run" / "metadata.json"))
        assert meta["iterations"] >= 2
        assert meta["residual"] <= 1e-6
        # report over the produced directory
        assert run_cli("report", str(out)) == 0
        captured = capsys.readouterr().out
        assert "run" in captured
        assert (out / "norm_vs_time_run.dat").exists()

    def test_zero_data(self, tmp_path, monkeypatch):
        monkeypatch.setenv("ROUGHWAVE_DATA_GENERATOR", "zero")
        out = tmp_path / "z"
        assert run_cli("solve", "--out", str(out)) == 0
        meta = json.load(open(out / "run" / "metadata.json"))
        assert meta["iterations"] == 1 and meta["X_norm"] == 0.0

    def test_oversized_data_exit_3(self, tmp_path, monkeypatch, capsys):
        # raw amplitude far above the budget, no fitting
        monkeypatch.setenv("ROUGHWAVE_DATA_AMPLITUDE", "1e4")
        out = tmp_path / "big"
        code = run_cli("solve", "--no-budget-fit", "--out", str(out))
        assert code == 3
        assert "nu/2" in capsys.readouterr().err


class TestScaleCommand:
    def test_pipeline(self, tmp_path, capsys):
        out = tmp_path / "sc"
        assert run_cli("scale", "--out", str(out)) == 0
        plan = json.load(open(out / "scaling_plan.json"))
        assert plan["lambda"] >= 2
        assert plan["descaled_residual"] <= 1e-5
        assert plan["alpha0"] == plan["lambda"] * -1.0
        captured = capsys.readouterr().out
        assert "lambda=" in captured and "margin=" in captured

    def test_alpha_zero_exit_2(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("ROUGHWAVE_NORM_ALPHA", "0.0")
        assert run_cli("scale", "--out", str(tmp_path / "x")) == 2
        assert "alpha" in capsys.readouterr().err

    def test_inadmissible_override_exit_2(self, tmp_path, capsys):
        assert run_cli("scale", "--lambda", "2", "--out", str(tmp_path / "y")) == 2
        assert "selection inequality" in capsys.readouterr().err


class TestReportCommand:
    def test_missing_dir(self, tmp_path, capsys):
        assert run_cli("report", str(tmp_path / "nope")) == 2

    def test_empty_dir(self, tmp_path, capsys):
        os.makedirs(tmp_path / "empty")
        assert run_cli("report", str(tmp_path / "empty")) == 2

    def test_kernel_sweep_decay_curve(self, tmp_path):
        out = tmp_path / "k"
        run_cli("kernels", "--regime", "effective", "--out", str(out))
        assert run_cli("report", str(out)) == 0
        dat = (out / "decay_envelope.dat").read_text().splitlines()
        values = []
        for line in dat:
            if line.startswith("#"):
                if values:
                    break
                continue
            values.append(float(line.split()[1]))
        assert values == sorted(values, reverse=True)  # monotone envelope


class TestManifest:
    def test_rerun_identical(self, tmp_path):
        out1, out2 = tmp_path / "m1", tmp_path / "m2"
        for out in (out1, out2):
            run_cli("kernels", "--out", str(out))
        m1 = (out1 / "manifest.json").read_bytes()
        m2 = (out2 / "manifest.json").read_bytes()
        assert m1 == m2
        assert (out1 / "kernels.csv").read_bytes() == (out2 / "kernels.csv").read_bytes()
