"""
Test suite for the command line interface and run configuration

Configuration precedence and validation, output files of every command,
reproducibility of reruns and exit codes.
"""

from pathlib import Path

import pandas as pd
import pytest
import yaml
from click.testing import CliRunner

from targetnet import __version__
from targetnet.bench.tracking import TRACE_COLUMNS
from targetnet.cli import EXIT_CONFIG, EXIT_DIVERGED, EXIT_OK, EXIT_RUNTIME, cli, run
from targetnet.core.errors import ConfigError, DivergenceError
from targetnet.utils import serialization
from targetnet.utils.config import load_env_overrides, parse_config

DEFAULT_CONFIG = Path(__file__).resolve().parent.parent / "config" / "default.yaml"

CLEAN_STREAM = ["--dim", "5", "--horizon", "50", "--noise-std", "0", "--outlier-prob", "0"]
SMALL_STREAM = ["--dim", "8", "--horizon", "120"]


@pytest.fixture
def runner():
    return CliRunner()


class TestConfiguration:
    """Test cases for configuration resolution"""

    def test_defaults(self):
        """Test built-in defaults use the published method settings"""
        cfg = parse_config("synth", environ={})
        assert cfg.rule == "catsoft"
        assert (cfg.tau, cfg.nu_lower, cfg.lambda_c, cfg.q) == (0.1, 1.0, 1.0, 1.0)
        assert cfg.seeds == (0,)
        assert [r.label for r in cfg.rule_configs()] == ["catsoft"]

    def test_default_file_matches_defaults(self):
        """Test the shipped default.yaml resolves to the built-in defaults"""
        assert parse_config("synth", config_path=str(DEFAULT_CONFIG), environ={}) == parse_config("synth", environ={})

    def test_out_of_range_names_field(self):
        """Test q = 1.5 is rejected with the field named"""
        with pytest.raises(ConfigError) as exc:
            parse_config("synth", overrides={"q": 1.5}, environ={})
        assert exc.value.field == "q"

    def test_flag_beats_file(self):
        """Test command-line values override the configuration file"""
        assert parse_config("synth", config_text="tau: 0.2", environ={}).tau == 0.2
        assert parse_config("synth", config_text="tau: 0.2", overrides={"tau": 0.3}, environ={}).tau == 0.3
        assert parse_config("synth", config_text="tau: 0.2", overrides={"tau": None}, environ={}).tau == 0.2

    def test_environment_overrides(self):
        """Test TARGETNET_* variables sit between the file and the flags"""
        environ = {"TARGETNET_LOG_LEVEL": "debug", "TARGETNET_OUT_DIR": "/tmp/elsewhere"}
        assert load_env_overrides(environ) == {"log_level": "debug", "out_dir": "/tmp/elsewhere"}
        cfg = parse_config("synth", config_text="log_level: ERROR", environ=environ)
        assert cfg.log_level == "DEBUG"
        assert cfg.out_dir == "/tmp/elsewhere"
        assert parse_config("synth", overrides={"out_dir": "here"}, environ=environ).out_dir == "here"

    def test_config_path_from_environment(self, tmp_path):
        """Test TARGETNET_CONFIG_PATH points at the configuration file"""
        path = tmp_path / "run.yaml"
        path.write_text("rule: tsoft\nnu: 2.0\n")
        cfg = parse_config("synth", environ={"TARGETNET_CONFIG_PATH": str(path)})
        assert (cfg.rule, cfg.nu) == ("tsoft", 2.0)

    def test_lambda_alias_and_lists(self):
        """Test the lambda key and comma-separated list values"""
        cfg = parse_config("compare", config_text="lambda: 0.5\nseeds: [1, 2]",
                           overrides={"rules": "soft, atsoft"}, environ={})
        assert cfg.lambda_c == 0.5
        assert cfg.seeds == (1, 2)
        assert [r.label for r in cfg.rule_configs()] == ["soft", "atsoft"]

    @pytest.mark.parametrize("text,field", [
        ("learning_rat: 0.1", "learning_rat"),
        ("rule: {name: soft}", "rule"),
        ("horizon: many", "horizon"),
        ("seeds: [0, 0]", "seeds"),
        ("- tau", "config"),
    ])
    def test_invalid_files(self, text, field):
        """Test unknown keys, nested sections and bad values name the field"""
        with pytest.raises(ConfigError) as exc:
            parse_config("synth", config_text=text, environ={})
        assert exc.value.field == field

    def test_missing_file(self):
        """Test a missing configuration file is a configuration error"""
        with pytest.raises(ConfigError):
            parse_config("synth", config_path="/nonexistent/targetnet.yaml", environ={})


class TestTrackingCommands:
    """Test cases for synth and compare"""

    def test_version(self, runner):
        """Test the version option"""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_synth_clean_stream(self, runner, tmp_path):
        """Test a clean stream writes one trace, a summary and the resolved config"""
        out = tmp_path / "run"
        result = runner.invoke(cli, ["synth", *CLEAN_STREAM, "--out", str(out)])
        assert result.exit_code == EXIT_OK, result.output

        trace = pd.read_csv(out / "catsoft_seed0.csv")
        assert list(trace.columns) == list(TRACE_COLUMNS)
        assert len(trace) == 49
        summary = pd.read_csv(out / "summary.csv")
        assert len(summary) == 1
        assert summary.loc[0, "tracking_rmse_mean"] < 1e-6
        resolved = yaml.safe_load((out / "resolved_config.yaml").read_text())
        assert resolved["command"] == "synth"
        assert resolved["dim"] == 5

    def test_two_seeds_aggregate(self, runner, tmp_path):
        """Test two seeds give two traces and one aggregate row"""
        result = runner.invoke(cli, ["synth", *SMALL_STREAM, "--rule", "atsoft", "--seeds", "0,1", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK, result.output
        assert (tmp_path / "atsoft_seed0.csv").exists()
        assert (tmp_path / "atsoft_seed1.csv").exists()
        summary = pd.read_csv(tmp_path / "summary.csv")
        assert len(summary) == 1
        assert summary.loc[0, "seeds"] == 2
        assert summary.loc[0, "rule"] == "atsoft"

    def test_repeated_seed_flags(self, runner, tmp_path):
        """Test --seed can be given several times"""
        result = runner.invoke(cli, ["synth", *SMALL_STREAM, "--seed", "3", "--seed", "4", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK, result.output
        assert sorted(p.name for p in tmp_path.glob("catsoft_seed*.csv")) == ["catsoft_seed3.csv", "catsoft_seed4.csv"]

    def test_compare_rules(self, runner, tmp_path):
        """Test compare writes one trace per rule and one summary row per rule"""
        result = runner.invoke(cli, ["compare", *SMALL_STREAM, "--rules", "soft,tsoft,atsoft", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK, result.output
        for rule in ("soft", "tsoft", "atsoft"):
            assert (tmp_path / f"{rule}_seed0.csv").exists()
        assert list(pd.read_csv(tmp_path / "summary.csv")["rule"]) == ["soft", "tsoft", "atsoft"]

    def test_reruns_are_byte_identical(self, runner, tmp_path):
        """Test identical configurations produce identical CSV files"""
        for name in ("a", "b"):
            result = runner.invoke(cli, ["compare", *SMALL_STREAM, "--seeds", "0,1", "--out", str(tmp_path / name)])
            assert result.exit_code == EXIT_OK, result.output
        files = sorted(p.name for p in (tmp_path / "a").glob("*.csv"))
        assert len(files) == 2 * 4 + 1
        for name in files:
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_config_file_with_flag_override(self, runner, tmp_path):
        """Test --config values are used unless a flag overrides them"""
        config = tmp_path / "run.yaml"
        config.write_text("rule: soft\ndim: 4\nhorizon: 30\n")
        out = tmp_path / "out"
        result = runner.invoke(cli, ["synth", "--config", str(config), "--rule", "tsoft", "--out", str(out)])
        assert result.exit_code == EXIT_OK, result.output
        assert (out / "tsoft_seed0.csv").exists()
        assert len(pd.read_csv(out / "tsoft_seed0.csv")) == 29


class TestExitCodes:
    """Test cases for exit statuses"""

    def test_configuration_error(self, runner, tmp_path):
        """Test an out-of-range value exits with 2 and names the field"""
        result = runner.invoke(cli, ["synth", "--q", "1.5", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG
        assert "q:" in result.output
        assert not (tmp_path / "summary.csv").exists()

    def test_missing_config_file(self, runner, tmp_path):
        """Test a missing configuration file exits with 2"""
        result = runner.invoke(cli, ["synth", "--config", str(tmp_path / "absent.yaml")])
        assert result.exit_code == EXIT_CONFIG

    def test_unwritable_output(self, runner, tmp_path):
        """Test an output path that is a file exits with 1"""
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        result = runner.invoke(cli, ["synth", *CLEAN_STREAM, "--out", str(blocker)])
        assert result.exit_code == EXIT_RUNTIME

    def test_divergence(self, tmp_path, mocker):
        """Test a diverged training run maps to exit status 3"""
        mocker.patch("targetnet.cli.train", side_effect=DivergenceError(0, 1e7, 1e6))
        cfg = parse_config("train", overrides={"out_dir": str(tmp_path), "episodes": 1}, environ={})
        assert run(cfg) == EXIT_DIVERGED


class TestTrainAndEvaluate:
    """Test cases for train and evaluate"""

    def test_train_outputs(self, runner, tmp_path):
        """Test train writes the curve, update log, checkpoints and summary"""
        args = ["train", "--episodes", "2", "--max-steps", "5", "--eval-episodes", "2", "--out", str(tmp_path)]
        result = runner.invoke(cli, args)
        assert result.exit_code == EXIT_OK, result.output
        curve = pd.read_csv(tmp_path / "catsoft_seed0.csv")
        assert list(curve["episode"]) == [0, 1]
        updates = pd.read_csv(tmp_path / "catsoft_seed0_updates.csv")
        assert len(updates) == 2 * 2 * 5
        policy = serialization.read_json(tmp_path / "catsoft_seed0_policy.json")
        assert policy["format"] == "targetnet.params/1"
        assert (tmp_path / "catsoft_seed0_value.json").exists()
        summary = pd.read_csv(tmp_path / "summary.csv")
        assert summary.loc[0, "diverged_mean"] == 0

    def test_evaluate_random_baseline(self, runner, tmp_path):
        """Test evaluate without a checkpoint scores the random policy"""
        result = runner.invoke(cli, ["evaluate", "--eval-episodes", "3", "--max-steps", "5", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_OK, result.output
        record = serialization.read_json(tmp_path / "evaluation.json")
        assert record["policy"] == "random"
        assert record["episodes"] == 3
        assert len(record["returns"]) == 3

    def test_evaluate_checkpoint(self, runner, tmp_path):
        """Test evaluate loads a policy checkpoint written by train"""
        train_dir = tmp_path / "train"
        result = runner.invoke(cli, ["train", "--episodes", "1", "--max-steps", "5", "--eval-episodes", "1",
                                     "--out", str(train_dir)])
        assert result.exit_code == EXIT_OK, result.output
        eval_dir = tmp_path / "eval"
        result = runner.invoke(cli, ["evaluate", "--checkpoint", str(train_dir / "catsoft_seed0_policy.json"),
                                     "--eval-episodes", "2", "--max-steps", "5", "--seeds", "0,1",
                                     "--out", str(eval_dir)])
        assert result.exit_code == EXIT_OK, result.output
        records = serialization.read_json(eval_dir / "evaluation.json")
        assert [r["seed"] for r in records] == [0, 1]
        assert all(r["policy"] == "trained" for r in records)

    def test_evaluate_needs_episodes(self, runner, tmp_path):
        """Test evaluate with zero episodes is a configuration error"""
        result = runner.invoke(cli, ["evaluate", "--eval-episodes", "0", "--out", str(tmp_path)])
        assert result.exit_code == EXIT_CONFIG


if __name__ == "__main__":
    pytest.main([__file__, "-v", "--tb=short"])
