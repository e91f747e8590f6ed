# app/cli.py
"""
Command-line interface.

    optomech steady set_b
    optomech sweep my_sweep.toml
    optomech spectrum set_b --start -2 --stop 2 --count 401
    optomech output-scan set_b --epsilon 1 --epsilon 10
    optomech tripartite set_b --epsilon-pi 1
    optomech preset sideband_pair_vs_epsilon
    optomech verify

Parameter files are TOML with unit-suffixed keys; a bare name such as
``set_b`` refers to a file shipped in the presets directory. Schema problems
exit with status 2 and one ``field: message`` line per problem.
"""

import json
import logging
import math
import sys
from functools import wraps
from pathlib import Path
from typing import List, Optional, Tuple

import click
import numpy as np
import pandas as pd
import tomli
from pydantic import ValidationError

from app.core.config import configure_logging, settings
from app.core.exceptions import GridCapExceededError, InvalidParameterError, OptomechError, OrthogonalityError
from app.operations.model import derive_constants, steady_summary
from app.operations.oracle import SCHEMES
from app.operations.output import mech_output_entanglement_scan, output_spectrum
from app.operations.render import render
from app.operations.sweep import load_sweep, run_sweep, validation_messages, write_results
from app.operations.tripartite import sideband_classification
from app.operations.verify import run_verification
from app.schemas.params import SystemParams

logger = logging.getLogger(__name__)

SCHEMA_ERROR = 2
SWEEP_PRESETS = sorted(
    p.stem for p in settings.PRESETS_DIR.glob("*.toml") if p.stem not in ("set_a", "set_b")
)
# Figure numbers of the reproduced plots; "b" marks the second panel.
FIGURE_PRESETS = {
    "2": "detuning_power_surface",
    "2b": "finesse_power_surface",
    "3": "output_spectrum",
    "4": "mech_output_vs_center",
    "5": "mech_stokes_vs_temperature",
    "6": "stokes_pair_vs_center",
    "7": "sideband_pair_vs_epsilon",
    "8": "sideband_pair_vs_temperature",
    "9": "tripartite_vs_epsilon",
    "9b": "tripartite_vs_detuning",
}


def _resolve(path_or_name: str, suffix: str = ".toml") -> Path:
    path = Path(path_or_name)
    if path.exists():
        return path
    preset = settings.PRESETS_DIR / f"{path_or_name}{suffix}"
    if preset.exists():
        return preset
    raise click.BadParameter(f"no file or preset named '{path_or_name}'")


def _parse_overrides(values: Tuple[str, ...]) -> dict:
    overrides = {}
    for item in values:
        key, sep, raw = item.partition("=")
        if not sep:
            raise click.BadParameter(f"expected key=value, got '{item}'", param_hint="--set")
        try:
            overrides[key.strip()] = float(raw)
        except ValueError:
            raise click.BadParameter(f"'{raw}' is not a number", param_hint="--set")
    return overrides


def _schema_errors(func):
    """Turn configuration errors into diagnostics and exit status 2."""
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as exc:
            for line in validation_messages(exc):
                click.echo(f"error: {line}", err=True)
        except tomli.TOMLDecodeError as exc:
            click.echo(f"error: TOML syntax: {exc}", err=True)
        except (InvalidParameterError, GridCapExceededError, OrthogonalityError) as exc:
            click.echo(f"error: {exc}", err=True)
        sys.exit(SCHEMA_ERROR)
    return wrapper


def _emit(ctx: click.Context, payload, frame: Optional[pd.DataFrame] = None) -> None:
    """Print a table as CSV or JSON records, or a mapping as JSON."""
    if frame is not None and ctx.obj["format"] == "csv":
        click.echo(frame.to_csv(index=False, float_format="%.12g", lineterminator="\n"), nl=False)
        return
    if frame is not None:
        payload = json.loads(frame.to_json(orient="records", double_precision=15))
    click.echo(json.dumps(payload, indent=2, default=str))


@click.group()
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker processes (OPTOMECH_THREADS).")
@click.option("--tol", type=float, default=None, help="Relative tolerance of the output-mode quadrature.")
@click.option("--seed", type=int, default=None, help="Seed for stochastic checks (OPTOMECH_SEED).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="json", show_default=True)
@click.option("--log-level", default=None, help="Logging level (OPTOMECH_LOG_LEVEL).")
@click.pass_context
def cli(ctx, threads, tol, seed, fmt, log_level):
    """Steady states, output modes and entanglement of a driven optomechanical cavity."""
    configure_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj.update(
        threads=threads or settings.THREADS,
        tol=tol,
        seed=settings.SEED if seed is None else seed,
        format=fmt,
    )


@cli.command()
@click.argument("params")
@click.option("--set", "overrides", multiple=True, help="Override a parameter, e.g. --set power_mW=40.")
@click.pass_context
@_schema_errors
def steady(ctx, params, overrides):
    """Derived constants, stability, intracavity CM, E_N and cooling for PARAMS."""
    system = SystemParams.from_toml(_resolve(params), **_parse_overrides(overrides))
    summary = steady_summary(system)
    if ctx.obj["format"] == "csv":
        row = dict(summary["derived"])
        row.update(stable=summary["stability"]["stable"], n_eff=summary["n_eff"])
        row["log_negativity"] = (
            summary["entanglement"]["splits"][0]["log_negativity"] if summary["entanglement"] else None
        )
        _emit(ctx, None, pd.DataFrame([row]))
    else:
        _emit(ctx, summary)


@cli.command()
@click.argument("config", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--output", type=click.Path(path_type=Path), default=None, help="CSV path (default: OUTPUT_DIR/<name>.csv).")
@click.option("--no-plot", is_flag=True, help="Skip the SVG rendering.")
@click.pass_context
@_schema_errors
def sweep(ctx, config, output, no_plot):
    """Evaluate the sweep described by CONFIG and write CSV plus a provenance sidecar."""
    spec = load_sweep(config)
    _run_and_write(ctx, spec, output, no_plot)


def _run_and_write(ctx, spec, output: Optional[Path], no_plot: bool) -> None:
    frame = run_sweep(spec, threads=ctx.obj["threads"], epsrel=ctx.obj["tol"])
    csv_path = output or spec.output_csv or settings.OUTPUT_DIR / f"{spec.name}.csv"
    csv_path, sidecar = write_results(
        spec, frame, csv_path, seed=ctx.obj["seed"], epsrel=ctx.obj["tol"], threads=ctx.obj["threads"]
    )
    unstable = int((~frame["stable"].astype(bool)).sum())
    failed = int(frame["error"].notna().sum())
    click.echo(f"wrote {csv_path} ({len(frame)} rows, {unstable} unstable, {failed} failed)")
    click.echo(f"wrote {sidecar}")
    if spec.plot is not None and not no_plot:
        svg_path = Path(csv_path).with_suffix(".svg")
        render(frame, spec.plot, svg_path)
        click.echo(f"wrote {svg_path}")


@cli.command()
@click.argument("params")
@click.option("--start", type=float, default=-2.0, show_default=True, help="First frequency / omega_m.")
@click.option("--stop", type=float, default=2.0, show_default=True, help="Last frequency / omega_m.")
@click.option("--count", type=click.IntRange(min=1), default=401, show_default=True)
@click.option("--ohmic", is_flag=True, help="Use the coth thermal kernel instead of Markovian noise.")
@click.pass_context
@_schema_errors
def spectrum(ctx, params, start, stop, count, ohmic):
    """Normal-ordered output photon spectrum S(omega) for PARAMS."""
    derived = derive_constants(SystemParams.from_toml(_resolve(params)))
    grid = np.linspace(start, stop, count)
    rows = output_spectrum(derived, grid, markovian=not ohmic)
    frame = pd.DataFrame(rows, columns=["omega_omega_m", "S"])
    frame.insert(1, "omega_rad_s", frame["omega_omega_m"] * derived.omega_m_si)
    _emit(ctx, None, frame)


@cli.command("output-scan")
@click.argument("params")
@click.option("--epsilon", "epsilons", type=float, multiple=True, required=True, help="omega_m tau; repeatable.")
@click.option("--start", type=float, default=-2.0, show_default=True)
@click.option("--stop", type=float, default=2.0, show_default=True)
@click.option("--count", type=click.IntRange(min=1), default=41, show_default=True)
@click.pass_context
@_schema_errors
def output_scan(ctx, params, epsilons, start, stop, count):
    """E_N of the mechanics and one filtered output mode over centre frequency and epsilon."""
    derived = derive_constants(SystemParams.from_toml(_resolve(params)))
    frame = mech_output_entanglement_scan(derived, list(epsilons), np.linspace(start, stop, count))
    frame.insert(2, "center_rad_s", frame["center"] * derived.omega_m_si)
    _emit(ctx, None, frame)


@cli.command()
@click.argument("params")
@click.option("--epsilon-pi", type=float, default=1.0, show_default=True, help="omega_m tau / pi (integer for orthogonal sidebands).")
@click.pass_context
@_schema_errors
def tripartite(ctx, params, epsilon_pi):
    """Partial-transpose classification of mechanics, Stokes and anti-Stokes modes."""
    derived = derive_constants(SystemParams.from_toml(_resolve(params)))
    report = sideband_classification(derived, math.pi * epsilon_pi)
    if ctx.obj["format"] == "csv":
        row = {"epsilon_pi": epsilon_pi, **report.cuts, "fully_inseparable": report.fully_inseparable}
        _emit(ctx, None, pd.DataFrame([row]))
    else:
        _emit(ctx, report.model_dump())


@cli.command()
@click.argument("name", type=click.Choice(SWEEP_PRESETS))
@click.option("--output", type=click.Path(path_type=Path), default=None)
@click.option("--no-plot", is_flag=True)
@click.pass_context
@_schema_errors
def preset(ctx, name, output, no_plot):
    """Run one of the shipped sweep presets."""
    spec = load_sweep(settings.PRESETS_DIR / f"{name}.toml")
    _run_and_write(ctx, spec, output, no_plot)


@cli.command()
@click.argument("number", type=click.Choice(list(FIGURE_PRESETS)))
@click.option("--output", type=click.Path(path_type=Path), default=None)
@click.option("--no-plot", is_flag=True)
@click.pass_context
@_schema_errors
def figure(ctx, number, output, no_plot):
    """Reproduce figure NUMBER (2 to 9; 2b and 9b for the second panels)."""
    name = FIGURE_PRESETS[number]
    logger.info("figure %s -> preset %s", number, name)
    spec = load_sweep(settings.PRESETS_DIR / f"{name}.toml")
    _run_and_write(ctx, spec, output, no_plot)


@cli.command()
@click.option("--params", "params", default="set_b", show_default=True, help="Operating point for the point checks.")
@click.option("--draws", type=click.IntRange(min=1), default=20, show_default=True, help="Random stable points.")
@click.option("--trajectories", type=click.IntRange(min=2), default=50000, show_default=True)
@click.option("--skip-oracle", is_flag=True, help="Leave out the stochastic ensemble.")
@click.option("--scheme", type=click.Choice(SCHEMES), default=None, help="Oracle time step (OPTOMECH_ORACLE_SCHEME).")
@click.pass_context
@_schema_errors
def verify(ctx, params, draws, trajectories, skip_oracle, scheme):
    """Cross-method consistency suite; exit status 1 if any check fails."""
    checks = run_verification(
        SystemParams.from_toml(_resolve(params)),
        n_draws=draws,
        n_traj=trajectories,
        seed=ctx.obj["seed"],
        threads=ctx.obj["threads"],
        oracle=not skip_oracle,
        scheme=scheme,
    )
    if ctx.obj["format"] == "json":
        _emit(ctx, [c.model_dump() for c in checks])
    else:
        _emit(ctx, None, pd.DataFrame([c.model_dump() for c in checks]))
    if not all(c.passed for c in checks):
        sys.exit(1)


def main(argv: Optional[List[str]] = None) -> None:
    try:
        cli.main(args=argv, prog_name="optomech")
    except OptomechError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
