"""Tests for the command-line front end and run manifests."""

import json

import pandas as pd
import pytest

from hyperstab.cli import apply_overrides, main, valid_keys
from hyperstab.errors import ConfigError
from hyperstab.models.run_config import RunSettings
from hyperstab.utils.run_storage import RunStorage

SCALAR = ["--set", "problem=scalar"]
SMALL_HEAT = ["--set", "heat_memory.geometry.n_points=15", "--set", "heat_memory.horizon=1.0"]


def _read(path):
    return json.loads(path.read_text())


class TestOverrides:
    def test_valid_keys_are_dotted_leaves(self):
        keys = valid_keys(RunSettings)
        assert "heat_memory.geometry.n_points" in keys
        assert "solver.dt_max" in keys
        assert "heat_memory.geometry" not in keys

    def test_apply_nested(self):
        data = apply_overrides({}, ["scalar.gain=3", "solver.scheme=cn"])
        assert data == {"scalar": {"gain": 3}, "solver": {"scheme": "cn"}}

    def test_unknown_key_lists_valid_keys(self):
        with pytest.raises(ConfigError, match="valid keys: .*solver.dt_max"):
            apply_overrides({}, ["solver.dtmax=1"])

    def test_malformed(self):
        with pytest.raises(ConfigError, match="key=value"):
            apply_overrides({}, ["solver.dt_max"])


class TestRunStorage:
    def test_hash_ignores_key_order(self):
        assert RunStorage.content_hash({"a": 1, "b": 2}) == RunStorage.content_hash({"b": 2, "a": 1})

    def test_load_manifest_config(self, tmp_path):
        RunStorage.write_manifest(tmp_path, "simulate", {"problem": "scalar"}, "abc", 0, ["x.csv"], True)
        assert RunStorage.load_config(tmp_path / "manifest.json") == {"problem": "scalar"}
        assert RunStorage.load_manifest(tmp_path)["certified"] is True

    def test_missing_manifest(self, tmp_path):
        assert RunStorage.load_manifest(tmp_path) is None


class TestCommands:
    def test_lemma_check(self, tmp_path):
        assert main(["lemma-check", "--out", str(tmp_path)]) == 0
        margins = pd.read_csv(tmp_path / "lemma_margins.csv")
        assert set(margins.columns) == {"a", "alpha", "tau", "left", "right", "margin", "passed"}
        assert margins["passed"].all()
        summary = _read(tmp_path / "summary.json")
        assert summary["exit_status"] == 0
        assert len(summary["pairs"]) == 4

    def test_lemma_check_reports_rejected_pair(self, tmp_path):
        config = tmp_path / "lemma.json"
        config.write_text(json.dumps({"lemma": {"pairs": [[10, 0.05], [2, 1]], "tau_points": 5}}))
        out = tmp_path / "out"
        assert main(["lemma-check", "--config", str(config), "--out", str(out)]) == 0
        summary = _read(out / "summary.json")
        assert summary["rejected"][0]["a"] == 10
        assert "alpha*a > 1" in summary["rejected"][0]["reason"]

    def test_simulate_scalar(self, tmp_path):
        assert main(["simulate", "--out", str(tmp_path), *SCALAR]) == 0
        traj = pd.read_csv(tmp_path / "trajectory.csv")
        assert list(traj.columns) == ["t", "normX", "V", "controlMag"]
        assert traj["t"].iloc[-1] == pytest.approx(2.0)
        manifest = _read(tmp_path / "manifest.json")
        assert manifest["certified"] is True
        assert manifest["exit_status"] == 0
        assert "trajectory.csv" in manifest["outputs"]
        assert (tmp_path / "operator_A.mtx").read_text().startswith("1 1 ")

    def test_scheme_and_dt_flags(self, tmp_path):
        assert main(["simulate", "--out", str(tmp_path), "--scheme", "cn", "--dt-max", "0.01", *SCALAR]) == 0
        solver = _read(tmp_path / "manifest.json")["resolved_config"]["solver"]
        assert solver["scheme"] == "cn"
        assert solver["dt_max"] == 0.01

    def test_certify(self, tmp_path):
        assert main(["certify", "--out", str(tmp_path), *SCALAR]) == 0
        certificate = _read(tmp_path / "certificate.json")
        assert certificate["verdict"] == "pass"
        assert certificate["kind"] == "decay_only"

    def test_certify_refuses_uncertified(self, tmp_path, capsys):
        code = main(["certify", "--out", str(tmp_path), *SCALAR, "--set", "scalar.gain=0.4"])
        assert code == 2
        assert "certify.audit_trajectory" in capsys.readouterr().err
        manifest = _read(tmp_path / "manifest.json")
        assert manifest["certified"] is False
        assert manifest["exit_status"] == 2

    def test_rate_fit(self, tmp_path):
        assert main(["rate-fit", "--out", str(tmp_path), *SCALAR]) == 0
        fit = _read(tmp_path / "rate_fit.json")
        assert fit["quad_coeff"] == pytest.approx(0.5, abs=0.1)

    def test_heat_memory(self, tmp_path):
        assert main(["heat-memory", "--out", str(tmp_path), *SMALL_HEAT]) == 0
        summary = _read(tmp_path / "summary.json")
        assert summary["certified"]
        assert summary["certificate"]["verdict"] == "pass"
        assert summary["reformulation"]["points"]
        for name in ("fig1_state_surface.csv", "fig2_control.csv", "fig3_log_norm.csv", "figures.gp"):
            assert (tmp_path / name).exists()

    @pytest.mark.slow
    def test_heat_memory_default_configuration(self, tmp_path):
        """T = 3, N = 63: the memory check runs on its own capped step."""
        assert main(["heat-memory", "--out", str(tmp_path)]) == 0
        summary = _read(tmp_path / "summary.json")
        assert summary["certificate"]["verdict"] == "pass"
        assert summary["reformulation"]["passed"]
        assert summary["reformulation"]["max_discrepancy"] <= 1e-2
        assert _read(tmp_path / "manifest.json")["resolved_config"]["solver"]["dt_max"] is None

    def test_heat_memory_requires_problem(self, tmp_path):
        assert main(["heat-memory", "--out", str(tmp_path), *SCALAR]) == 2

    @pytest.mark.slow
    def test_sweep(self, tmp_path):
        code = main(["sweep-n", "--out", str(tmp_path), *SMALL_HEAT, "--set", "sweep.n_values=[1,2]"])
        assert code == 0
        sweep = pd.read_csv(tmp_path / "fig4_sweep.csv")
        assert sorted(sweep["n"].unique()) == [1, 2]
        assert _read(tmp_path / "summary.json")["ordered"]


class TestUsageErrors:
    def test_unknown_override(self, tmp_path, capsys):
        assert main(["simulate", "--out", str(tmp_path), "--set", "solver.bogus=1"]) == 2
        assert "cli.dispatch" in capsys.readouterr().err
        assert _read(tmp_path / "summary.json")["exit_status"] == 2
        assert _read(tmp_path / "manifest.json")["exit_status"] == 2

    def test_missing_config(self, tmp_path, capsys):
        missing = tmp_path / "nope.json"
        assert main(["simulate", "--config", str(missing), "--out", str(tmp_path)]) == 2
        assert str(missing) in capsys.readouterr().err
        assert _read(tmp_path / "manifest.json")["exit_status"] == 2

    def test_invalid_value(self, tmp_path):
        assert main(["simulate", "--out", str(tmp_path), "--set", "scalar.b=-1", *SCALAR]) == 2
        summary = _read(tmp_path / "summary.json")
        assert summary["exit_status"] == 2
        assert "scalar.b" in summary["error"]
        manifest = _read(tmp_path / "manifest.json")
        assert manifest["exit_status"] == 2
        assert manifest["resolved_config"] == {}
        assert manifest["outputs"] == []

    def test_unknown_command(self):
        with pytest.raises(SystemExit) as info:
            main(["explode"])
        assert info.value.code == 2


class TestReproducibility:
    def test_manifest_replay(self, tmp_path):
        first, second = tmp_path / "first", tmp_path / "second"
        args = [*SCALAR, "--set", "scalar.disturbance.kind=bounded_random",
                "--set", "scalar.disturbance.amplitude=0.2", "--seed", "5"]
        assert main(["simulate", "--out", str(first), *args]) == 0
        assert main(["simulate", "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
        assert (first / "trajectory.csv").read_bytes() == (second / "trajectory.csv").read_bytes()
        assert _read(first / "manifest.json")["inputs_sha256"] == _read(second / "manifest.json")["inputs_sha256"]

    def test_seed_changes_output(self, tmp_path):
        args = [*SCALAR, "--set", "scalar.disturbance.kind=bounded_random",
                "--set", "scalar.disturbance.amplitude=0.2"]
        main(["simulate", "--out", str(tmp_path / "a"), *args, "--seed", "1"])
        main(["simulate", "--out", str(tmp_path / "b"), *args, "--seed", "2"])
        assert (tmp_path / "a" / "trajectory.csv").read_bytes() != (tmp_path / "b" / "trajectory.csv").read_bytes()
