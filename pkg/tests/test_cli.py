import json

import numpy as np
import pytest

from toruskit.cli import execute, main, parse_config
from toruskit.errors import ConfigError

SQRT2 = np.sqrt(2.0)

MINIMAL = json.dumps({
    "command": "check",
    "system": {"name": "action_oscillators", "n": 2, "s": 1, "omega": [1.0, SQRT2]},
})

MOMENTUM_SYSTEM = {"name": "isotropic_momentum", "omega": 1.0, "nu": SQRT2,
                   "a": 1.0, "b": 0.5}


class TestParseConfig:
    def test_minimal_defaults(self):
        cfg = parse_config(MINIMAL)
        assert cfg.command == "check"
        assert cfg.tolerances["tol_unit"] == 1e-6
        assert cfg.tolerances["fixed_point"] == 1e-9
        assert cfg.eps_grid == [0.0]
        assert cfg.outputs == "out"
        assert cfg.grid_per_cycle == 16

    def test_negative_tolerance_names_key(self):
        doc = json.loads(MINIMAL)
        doc["tolerances"] = {"tol_unit": -1.0}
        with pytest.raises(ConfigError, match="tolerances.tol_unit"):
            parse_config(json.dumps(doc))

    def test_unknown_key_rejected(self):
        doc = json.loads(MINIMAL)
        doc["solver"] = "fast"
        with pytest.raises(ConfigError, match="solver"):
            parse_config(json.dumps(doc))

    def test_unknown_system_key_rejected(self):
        doc = json.loads(MINIMAL)
        doc["system"]["coupling"] = 2.0
        with pytest.raises(ConfigError, match="system.coupling"):
            parse_config(json.dumps(doc))

    def test_bad_command_rejected(self):
        doc = json.loads(MINIMAL)
        doc["command"] = "solve"
        with pytest.raises(ConfigError, match="command"):
            parse_config(json.dumps(doc))

    def test_alpha_length_checked(self):
        doc = json.loads(MINIMAL)
        doc["alpha"] = [1, 0]
        with pytest.raises(ConfigError, match="alpha"):
            parse_config(json.dumps(doc))

    def test_empty_eps_grid_rejected_for_continue(self):
        doc = {
            "command": "continue",
            "system": MOMENTUM_SYSTEM,
            "eps_grid": [],
        }
        with pytest.raises(ConfigError, match="eps_grid"):
            parse_config(json.dumps(doc))

    def test_zero_count_beta_grid_rejected(self):
        doc = {
            "command": "continue",
            "system": MOMENTUM_SYSTEM,
            "beta_grid": {"count": 0},
            "eps_grid": [0.0],
        }
        with pytest.raises(ConfigError, match="beta_grid.count"):
            parse_config(json.dumps(doc))

    def test_round_trip(self):
        doc = {
            "command": "continue",
            "system": MOMENTUM_SYSTEM,
            "alpha": [1, 0],
            "beta_grid": {"center": [1.5, -0.5], "step": [0.02, 0.02], "count": [3, 3]},
            "eps_grid": [0.0, 0.02],
            "tolerances": {"tol_unit": 1e-6},
            "outputs": "artifacts",
            "grid_per_cycle": 8,
            "kappa": 2,
        }
        cfg = parse_config(json.dumps(doc))
        again = parse_config(json.dumps(cfg.to_dict() | {"command": cfg.command}))
        assert again.to_dict() == cfg.to_dict()


class TestExecute:
    def test_nondeg_success(self, tmp_path, capsys):
        cfg = parse_config(json.dumps({
            "command": "nondeg",
            "system": MOMENTUM_SYSTEM,
            "alpha": [1, 0],
            "outputs": str(tmp_path / "out"),
        }))
        status = execute(cfg)
        assert status == 0
        header = capsys.readouterr().out.splitlines()[0]
        assert header.startswith("config: ")
        json.loads(header[len("config: "):])  # echoed config is valid JSON
        payload = json.loads((tmp_path / "out" / "criterion_result.json").read_text())
        assert payload["nondegenerate"] is True
        assert payload["margin"] == pytest.approx(1 - SQRT2 / 2, abs=1e-9)

    def test_nondeg_degenerate_exit_one(self, tmp_path):
        cfg = parse_config(json.dumps({
            "command": "nondeg",
            "system": {"name": "lyapunov", "omega1": 1.0, "nu": 3.0},
            "alpha": [1],
            "outputs": str(tmp_path / "out"),
        }))
        assert execute(cfg) == 1

    def test_check_command(self, tmp_path):
        cfg = parse_config(json.dumps({
            "command": "check",
            "system": MOMENTUM_SYSTEM,
            "eps_grid": [0.0, 0.05],
            "outputs": str(tmp_path / "out"),
        }))
        assert execute(cfg) == 0
        payload = json.loads((tmp_path / "out" / "hypothesis_report.json").read_text())
        assert payload["passed"] is True
        assert len(payload["reports"]) == 2

    def test_floquet_resonant_exit_one(self, tmp_path):
        cfg = parse_config(json.dumps({
            "command": "floquet",
            "system": {"name": "action_oscillators", "n": 2, "s": 1,
                       "omega": [1.0, 2.0]},
            "outputs": str(tmp_path / "out"),
        }))
        assert execute(cfg) == 1
        rows = (tmp_path / "out" / "multipliers.csv").read_text().splitlines()
        assert rows[0] == "index,re,im,abs_minus_one"
        assert len(rows) == 5  # header + 2n multipliers

    def test_continue_artifacts_and_determinism(self, tmp_path):
        doc = {
            "command": "continue",
            "system": {"name": "action_oscillators", "n": 2, "s": 1,
                       "omega": [1.0, SQRT2], "a": [1.0, 1.0]},
            "beta_grid": {"step": 0.02, "count": 3},
            "eps_grid": [0.0, 0.05],
            "grid_per_cycle": 4,
            "outputs": str(tmp_path / "one"),
        }
        cfg = parse_config(json.dumps(doc))
        assert execute(cfg) == 0
        family = (tmp_path / "one" / "family.csv").read_text()
        lines = family.splitlines()
        assert lines[0] == ("beta_1,eps,y_norm,residual,freq_1,"
                            "converged,unit_multiplicity")
        assert len(lines) == 1 + 6
        assert all(row.endswith(",1,2") for row in lines[1:])  # converged, 2s unit
        samples = (tmp_path / "one" / "torus_samples.csv").read_text()
        srows = samples.splitlines()
        assert srows[0] == "record_id,theta_1,x_1,x_2,x_3,x_4,F_dev_max"
        assert len(srows) == 1 + 6 * 4

        doc["outputs"] = str(tmp_path / "two")
        assert execute(parse_config(json.dumps(doc))) == 0
        assert (tmp_path / "two" / "family.csv").read_text() == family
        assert (tmp_path / "two" / "torus_samples.csv").read_text() == samples

    def test_freq_artifacts(self, tmp_path):
        doc = {
            "command": "freq",
            "system": {"name": "action_oscillators", "n": 2, "s": 1,
                       "omega": [1.0, SQRT2], "a": [1.0, 1.0]},
            "beta_grid": {"step": 0.02, "count": 3},
            "eps_grid": [0.08],
            "grid_per_cycle": 4,
            "outputs": str(tmp_path / "out"),
        }
        assert execute(parse_config(json.dumps(doc))) == 0
        twist = (tmp_path / "out" / "twist.csv").read_text().splitlines()
        assert twist[0] == "beta_1,eps,twist_det,degenerate"
        assert len(twist) == 2  # single interior node
        payload = json.loads((tmp_path / "out" / "twist_report.json").read_text())
        assert payload["all_degenerate"] is False

    def test_freq_degenerate_exit_one(self, tmp_path):
        doc = {
            "command": "freq",
            "system": {"name": "action_oscillators", "n": 2, "s": 1,
                       "omega": [1.0, SQRT2], "a": [1.0, 1.0]},
            "beta_grid": {"step": 0.02, "count": 3},
            "eps_grid": [0.0],
            "grid_per_cycle": 4,
            "outputs": str(tmp_path / "out"),
        }
        assert execute(parse_config(json.dumps(doc))) == 1


class TestMain:
    def test_config_error_exit_two(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({
            "command": "continue",
            "system": MOMENTUM_SYSTEM,
            "beta_grid": {"count": 0},
        }))
        assert main(["--config", str(path)]) == 2

    def test_missing_file_exit_two(self, tmp_path):
        assert main(["--config", str(tmp_path / "absent.json")]) == 2

    def test_output_override(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({
            "command": "nondeg",
            "system": MOMENTUM_SYSTEM,
            "alpha": [1, 0],
        }))
        target = tmp_path / "override"
        assert main(["--config", str(path), "--output", str(target)]) == 0
        assert (target / "criterion_result.json").exists()
