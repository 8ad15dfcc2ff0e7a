import json
from pathlib import Path

import numpy as np
import pytest
import yaml

from stratlab.cli import (EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK,
                          SCHEMAS, ConfigError, main, validate_config)


def run_cli(*args):
    return main(list(args))


class TestConfigValidation:
    def test_defaults_filled(self):
        cfg = validate_config(SCHEMAS["linear-mode"], {"beta": 1.0})
        assert cfg["nu"] == 0.0 and cfg["kappa"] == 0.0
        assert cfg["tol"] == 1e-10 and cfg["t_end"] == 100.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key 'betta'"):
            validate_config(SCHEMAS["linear-mode"], {"beta": 1.0, "betta": 2})

    def test_missing_required(self):
        with pytest.raises(ConfigError, match="missing required key 'beta'"):
            validate_config(SCHEMAS["linear-mode"], {})

    def test_type_errors_name_key(self):
        with pytest.raises(ConfigError, match="samples must be an integer"):
            validate_config(SCHEMAS["linear-mode"],
                            {"beta": 1.0, "samples": 2.5})

    def test_beta_must_be_positive(self, capsys):
        rc = run_cli("linear-mode", "--set", "beta=-1")
        assert rc == EXIT_CONFIG
        assert "beta must be > 0" in capsys.readouterr().err

    def test_enhanced_ratio_rejected(self, capsys):
        rc = run_cli("linear-mode", "--set", "beta=1", "--set", "nu=0.3",
                     "--set", "kappa=0.05", "--set", "check=dissipative")
        assert rc == EXIT_CONFIG
        err = capsys.readouterr().err
        assert "max(nu,kappa)/min(nu,kappa) < 4*beta - 1" in err


class TestExitCodes:
    def test_usage_error_is_one(self):
        assert run_cli("no-such-experiment") == EXIT_CONFIG

    def test_numerical_failure_is_two(self, tmp_path):
        rc = run_cli("toy", "--out", str(tmp_path), "--quiet",
                     "--set", "eps=0.5", "--set", "ratios=[16,32]")
        assert rc == EXIT_NUMERICAL

    def test_check_failure_is_three(self, tmp_path):
        src = tmp_path / "norms.csv"
        t = np.linspace(1, 100, 60)
        lines = ["t,value,label"] + [f"{x},{x ** -1.0},decay" for x in t]
        src.write_text("\n".join(lines) + "\n")
        rc = run_cli("fit", "--out", str(tmp_path / "out"), "--quiet",
                     "--set", f"input={src}", "--set", "label=decay",
                     "--set", "expected=-0.5", "--set", "t_lo=2",
                     "--set", "t_hi=90")
        assert rc == EXIT_CHECK

    def test_fit_pass_is_zero(self, tmp_path):
        src = tmp_path / "norms.csv"
        t = np.linspace(1, 100, 60)
        lines = ["t,value,label"] + [f"{x},{x ** -0.52},decay" for x in t]
        src.write_text("\n".join(lines) + "\n")
        rc = run_cli("fit", "--out", str(tmp_path / "out"), "--quiet",
                     "--set", f"input={src}", "--set", "label=decay",
                     "--set", "expected=-0.5", "--set", "t_lo=2",
                     "--set", "t_hi=90")
        assert rc == EXIT_OK


class TestArtifacts:
    def test_linear_mode_outputs(self, tmp_path):
        rc = run_cli("linear-mode", "--out", str(tmp_path), "--quiet",
                     "--set", "beta=1", "--set", "k=1", "--set", "eta=2",
                     "--set", "t_end=30", "--set", "samples=61")
        assert rc == EXIT_OK
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["experiment"] == "linear-mode"
        assert manifest["config"]["beta"] == 1.0
        verdicts = json.loads((tmp_path / "verdicts.json").read_text())
        assert any(v["bound"].startswith("two-sided") for v in verdicts)
        assert all(v["passed"] for v in verdicts)
        csv = (tmp_path / "series.csv").read_text().splitlines()
        assert csv[0] == "t,value,label"
        assert any("zq_sq" in line for line in csv[1:])

    def test_config_document_and_override(self, tmp_path):
        doc = tmp_path / "cfg.yaml"
        doc.write_text(yaml.safe_dump({"beta": 1.0, "k": 1, "eta": 0.0,
                                       "t_end": 10.0}))
        out = tmp_path / "out"
        rc = run_cli("linear-mode", "--config", str(doc), "--out", str(out),
                     "--quiet", "--set", "t_end=5.0")
        assert rc == EXIT_OK
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["config"]["t_end"] == 5.0

    def test_eigen_verdict(self, tmp_path):
        rc = run_cli("eigen", "--out", str(tmp_path), "--quiet",
                     "--set", "beta_sq=0.3", "--set", "n_grid=127")
        assert rc == EXIT_OK
        verdicts = json.loads((tmp_path / "verdicts.json").read_text())
        assert "spectrally_stable" in verdicts[0]["details"]
        lines = (tmp_path / "eigenvalues.csv").read_text().splitlines()
        assert lines[0] == "re,im,residual"
        assert len(lines) > 100

    def test_determinism_byte_identical(self, tmp_path):
        args = ("linear-mode", "--seed", "7", "--quiet",
                "--set", "beta=1", "--set", "sweep=12",
                "--set", "t_end=20", "--set", "samples=41")
        a, b = tmp_path / "a", tmp_path / "b"
        assert run_cli(*args, "--out", str(a)) == EXIT_OK
        assert run_cli(*args, "--out", str(b)) == EXIT_OK
        for name in ("series.csv", "sweep.csv", "verdicts.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_nonlinear_small_run(self, tmp_path):
        rc = run_cli("nonlinear", "--out", str(tmp_path), "--quiet",
                     "--set", "beta=1", "--set", "nx=16", "--set", "ny=32",
                     "--set", "dt=0.05", "--set", "t_end=1.0",
                     "--set", "sample_interval=0.25",
                     "--set", "snapshots=true",
                     "--set", "snapshot_interval=0.5")
        assert rc == EXIT_OK
        names = {p.name for p in tmp_path.iterdir()}
        assert "norms.csv" in names
        assert any(n.startswith("snapshot_") for n in names)
        assert any(n.endswith(".pgm") for n in names)
        verdicts = json.loads((tmp_path / "verdicts.json").read_text())
        balance = [v for v in verdicts if v["bound"].startswith("energy")]
        assert balance and balance[0]["passed"]

    def test_toy_outputs(self, tmp_path):
        rc = run_cli("toy", "--out", str(tmp_path), "--quiet",
                     "--set", "eta=144", "--set", "k=3",
                     "--set", "cascade_eta=[64,256]")
        assert rc == EXIT_OK
        verdicts = json.loads((tmp_path / "verdicts.json").read_text())
        names = {v["bound"] for v in verdicts}
        assert any("amplification" in n for n in names)
        assert any("Stirling" in n for n in names)
        assert all(v["passed"] for v in verdicts)
