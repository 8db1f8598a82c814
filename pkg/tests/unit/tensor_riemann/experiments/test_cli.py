"""
Tests for the tensor-riemann command line.
"""

import json

import pandas as pd
import pytest
from click.testing import CliRunner

from tensor_riemann import __version__
from tensor_riemann.cli import EXIT_CONFIG_ERROR, EXIT_IO_ERROR, cli
from tensor_riemann.regression import load_instance


pytestmark = [pytest.mark.tensor_riemann, pytest.mark.unit, pytest.mark.experiments]

SMALL_GENERAL = [
    "--model",
    "general",
    "--grid.n_rule=null",
    "--grid.n=[60]",
    "--grid.r=[2]",
    "--grid.seeds=1",
    "--solver.max_iters=3",
]


@pytest.fixture
def runner():
    return CliRunner()


class TestCommands:
    """Test cases for the experiment commands."""

    def test_version(self, runner):
        """Test --version prints the library version."""
        result = runner.invoke(cli, ["--version"])
        assert result.exit_code == 0
        assert __version__ in result.output

    def test_convergence_to_stdout(self, runner):
        """Test a tiny convergence run writes CSV with its header."""
        result = runner.invoke(cli, ["convergence", *SMALL_GENERAL])
        assert result.exit_code == 0, result.output
        assert "# experiment_id=convergence-" in result.output
        assert "experiment_id,model,algorithm,seed" in result.output

    def test_convergence_to_file(self, runner, tmp_path):
        """Test --out writes a CSV that reads back."""
        out = tmp_path / "conv.csv"
        result = runner.invoke(cli, ["convergence", *SMALL_GENERAL, "--out", str(out)])
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out, comment="#")
        assert set(frame["algorithm"]) == {"rgd", "rgn"}
        assert frame["model"].iloc[0] == "general"

    def test_ldp(self, runner, tmp_path):
        """Test the low-degree table command."""
        out = tmp_path / "ldp.csv"
        result = runner.invoke(
            cli,
            [
                "ldp",
                "--ldp.p_grid=[10,20]",
                "--ldp.mc_profiles=2",
                "--ldp.mc_samples=1000",
                "--out",
                str(out),
            ],
        )
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out, comment="#")
        assert list(frame["row_type"]) == ["gap"] * 4 + ["mc"] * 2

    def test_config_file(self, runner, tmp_path):
        """Test a config file written by config init drives a run."""
        path = tmp_path / "exp.json"
        init = runner.invoke(cli, ["config", "init", "--path", str(path)])
        assert init.exit_code == 0
        result = runner.invoke(
            cli, ["convergence", "--config", str(path), *SMALL_GENERAL, "--seed", "5"]
        )
        assert result.exit_code == 0, result.output
        assert "# grid.base_seed=5" in result.output


class TestErrors:
    """Test cases for exit codes."""

    def test_missing_config_file(self, runner, tmp_path):
        """Test an unreadable config exits with the I/O code."""
        missing = str(tmp_path / "none.json")
        result = runner.invoke(cli, ["convergence", "--config", missing])
        assert result.exit_code == EXIT_IO_ERROR

    def test_invalid_value(self, runner):
        """Test an invalid override exits with the configuration code."""
        result = runner.invoke(cli, ["convergence", "--grid.seeds=0"])
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert "grid.seeds" in result.output

    def test_malformed_override(self, runner):
        """Test an override without a section exits with the configuration code."""
        result = runner.invoke(cli, ["convergence", "--bogus"])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_unknown_key(self, runner):
        """Test an override naming no config key is rejected."""
        result = runner.invoke(cli, ["phase", "--grid.bogus=1"])
        assert result.exit_code == EXIT_CONFIG_ERROR

    def test_unwritable_output(self, runner, tmp_path):
        """Test an output path below a regular file exits with the I/O code."""
        blocker = tmp_path / "file"
        blocker.write_text("x")
        result = runner.invoke(
            cli, ["convergence", *SMALL_GENERAL, "--out", str(blocker / "conv.csv")]
        )
        assert result.exit_code == EXIT_IO_ERROR


class TestTools:
    """Test cases for instance generation and TRIP estimation."""

    def test_gen_instance(self, runner, tmp_path):
        """Test the written instance loads back with its sample size."""
        out = tmp_path / "inst"
        result = runner.invoke(
            cli, ["gen-instance", "--n", "20", "--model", "general", "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert (out / "instance.json").exists()
        instance = load_instance(out)
        assert instance.design.n == 20
        assert instance.design.param_shape == (6, 5, 4)

    def test_gen_instance_needs_sample_size(self, runner, tmp_path):
        """Test --n is required unless the sample size follows the drawn truth."""
        result = runner.invoke(
            cli, ["gen-instance", "--model", "general", "--out", str(tmp_path / "inst")]
        )
        assert result.exit_code == EXIT_CONFIG_ERROR
        assert "sample size" in result.output

    def test_trip_estimate(self, runner, tmp_path):
        """Test the sampled constant is written to CSV."""
        out = tmp_path / "trip.csv"
        result = runner.invoke(
            cli,
            ["trip-estimate", "--n", "50", "--model", "general", "--trials", "5"]
            + ["--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        frame = pd.read_csv(out, comment="#")
        row = frame.iloc[0]
        assert row["trials"] == 5
        assert 0.0 < row["rmin"] <= row["rmax"]
        assert row["constant"] >= 0.0


class TestConfigCommands:
    """Test cases for the config group."""

    def test_schema(self, runner):
        """Test the schema is valid JSON describing every section."""
        result = runner.invoke(cli, ["config", "schema"])
        assert result.exit_code == 0
        schema = json.loads(result.output)
        assert {"model", "grid", "solver", "ldp", "output"} <= set(schema["properties"])

    def test_show(self, runner):
        """Test the runtime configuration is printed as JSON."""
        result = runner.invoke(cli, ["config", "show"])
        assert result.exit_code == 0
        assert "jobs" in json.loads(result.output)["runtime"]

    def test_init(self, runner, tmp_path):
        """Test init writes a protocol default once."""
        path = tmp_path / "phase.json"
        result = runner.invoke(
            cli, ["config", "init", "--experiment", "phase", "--path", str(path)]
        )
        assert result.exit_code == 0
        assert json.loads(path.read_text())["model"]["kind"] == "matrix-trace"

        again = runner.invoke(cli, ["config", "init", "--path", str(path)])
        assert "already exists" in again.output
