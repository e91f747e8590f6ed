# tests/integration/test_cli.py

import json

import pytest
from click.testing import CliRunner

from app.cli import FIGURE_PRESETS, SWEEP_PRESETS, cli

SMALL_SWEEP = """
name = "cli-small"
observables = ["log_negativity", "n_eff"]

[fixed]
omega_m_MHz = 10.0
Q = 1e5
mass_ng = 10.0
length_mm = 1.0
wavelength_nm = 810.0
finesse = 1.67e4
temperature_K = 0.4
power_mW = 30.0

[[axes]]
name = "detuning_omega_m"
values = [-1.0, 0.5, 1.0]

[plot]
kind = "line"
x = "detuning_omega_m"
y = "log_negativity"
"""


@pytest.fixture
def runner() -> CliRunner:
    return CliRunner()


def test_steady_preset_as_json(runner):
    result = runner.invoke(cli, ["steady", "set_b"])
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output)
    assert summary["derived"]["kappa"] == pytest.approx(0.75, rel=0.01)
    assert summary["stability"]["stable"]
    assert summary["covariance"]["convention"] == "vacuum_variance=1/2"


def test_steady_with_override_as_csv(runner):
    result = runner.invoke(cli, ["--format", "csv", "steady", "set_b", "--set", "power_mW=60"])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert len(lines) == 2
    header = lines[0]
    assert "log_negativity" in header.split(",")
    assert "n_eff" in header.split(",")


@pytest.mark.parametrize(
    "args",
    [["steady", "no_such_preset"], ["steady", "set_b", "--set", "power_mW"], ["steady", "set_b", "--set", "power_mW=lots"]],
    ids=["unknown_preset", "override_without_value", "override_not_a_number"],
)
def test_usage_errors_exit_2(runner, args):
    assert runner.invoke(cli, args).exit_code == 2


def test_schema_error_exits_2_with_field(runner, tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text("omega_m_MHz = 10.0\nmass = 1e-11\n", encoding="utf-8")
    result = runner.invoke(cli, ["steady", str(path)])
    assert result.exit_code == 2
    assert "no unit suffix" in result.output


def test_toml_syntax_error_exits_2(runner, tmp_path):
    path = tmp_path / "broken.toml"
    path.write_text("name = \n", encoding="utf-8")
    result = runner.invoke(cli, ["sweep", str(path)])
    assert result.exit_code == 2
    assert "TOML syntax" in result.output


def test_sweep_without_axes_exits_2(runner, tmp_path):
    path = tmp_path / "empty.toml"
    path.write_text(SMALL_SWEEP.replace("[[axes]]", "[[unused]]"), encoding="utf-8")
    result = runner.invoke(cli, ["sweep", str(path)])
    assert result.exit_code == 2
    assert "axes" in result.output


def test_sweep_writes_table_sidecar_and_plot(runner, tmp_path):
    config = tmp_path / "small.toml"
    config.write_text(SMALL_SWEEP, encoding="utf-8")
    output = tmp_path / "out" / "small.csv"
    result = runner.invoke(cli, ["sweep", str(config), "--output", str(output)])
    assert result.exit_code == 0, result.output
    assert "1 unstable, 0 failed" in result.output
    assert output.exists()
    assert output.with_suffix(".json").exists()
    assert output.with_suffix(".svg").read_text(encoding="utf-8").startswith("<svg")


def test_spectrum_as_csv(runner):
    result = runner.invoke(cli, ["--format", "csv", "spectrum", "set_b", "--start", "-1", "--stop", "1", "--count", "3"])
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    assert lines[0] == "omega_omega_m,omega_rad_s,S"
    assert len(lines) == 4


def test_tripartite_rejects_non_orthogonal_sidebands(runner):
    result = runner.invoke(cli, ["tripartite", "set_b", "--epsilon-pi", "1.5"])
    assert result.exit_code == 2
    assert "filter modes 0 and 1" in result.output


def test_verify_without_oracle(runner):
    result = runner.invoke(cli, ["verify", "--draws", "2", "--skip-oracle"])
    assert result.exit_code == 0, result.output
    names = [check["name"] for check in json.loads(result.output)]
    assert "oracle_vs_lyapunov" not in names
    assert {"lyapunov_vs_spectral", "rwa_closed_form", "term2_identity", "filter_orthonormality"} <= set(names)


def test_preset_names_come_from_the_presets_directory(runner):
    assert "tripartite_vs_epsilon" in SWEEP_PRESETS
    assert "set_b" not in SWEEP_PRESETS
    assert runner.invoke(cli, ["preset", "no_such_grid"]).exit_code == 2


def test_every_figure_maps_to_a_preset():
    assert set(FIGURE_PRESETS.values()) <= set(SWEEP_PRESETS)
    assert FIGURE_PRESETS["7"] == "sideband_pair_vs_epsilon"


def test_figure_runs_its_preset(runner, tmp_path):
    output = tmp_path / "fig3.csv"
    result = runner.invoke(cli, ["--threads", "1", "figure", "3", "--output", str(output), "--no-plot"])
    assert result.exit_code == 0, result.output
    assert "401 rows, 0 unstable, 0 failed" in result.output
    meta = json.loads(output.with_suffix(".json").read_text(encoding="utf-8"))
    assert meta["sweep"] == "output_spectrum"


def test_unknown_figure_exits_2(runner):
    assert runner.invoke(cli, ["figure", "1"]).exit_code == 2
