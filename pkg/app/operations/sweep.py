# app/operations/sweep.py
"""
Module: sweep

Grid evaluation of sweep configurations and emission of the result table.

Functions:
- load_sweep(path) -> SweepSpec: Parse and validate a TOML sweep file.
- evaluate_point(job) -> dict: One grid record (parameters, derived rates, stability, observables).
- run_sweep(spec, threads, ...) -> DataFrame: Evaluate the whole grid in grid order.
- write_results(spec, frame, csv_path, ...) -> (Path, Path): CSV plus JSON provenance sidecar.

Unstable points are recorded with ``stable = False`` and empty observable
columns. Points where an observable fails (quadrature, Lyapunov residual,
unphysical state) keep empty observables and the message in ``error``.
Neither stops a sweep.
"""

import hashlib
import json
import logging
import platform
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import pandas as pd
import tomli
from pydantic import ValidationError

import app
from app.core.config import settings
from app.core.exceptions import GridCapExceededError, OptomechError, UnstableSystemError
from app.models.covariance import VACUUM_CONVENTION
from app.models.parameters import DerivedParams
from app.operations.dynamics import build_linear_model, stability, steady_cm_lyapunov
from app.operations.gaussian import cooling_rates, effective_occupancy, logarithmic_negativity
from app.operations.model import derive_constants
from app.operations.output import (
    make_filter_bank,
    output_cm,
    output_spectrum,
    two_mode_output_entanglement,
)
from app.operations.tripartite import sideband_classification
from app.schemas.params import SystemParams
from app.schemas.sweep import OBSERVABLE_COLUMNS, Observable, SweepSpec

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"
DERIVED_COLUMNS = [
    "omega_m_rad_s",
    "kappa_omega_m", "kappa_rad_s",
    "detuning_eff_omega_m", "detuning_eff_rad_s",
    "G_omega_m", "G_rad_s",
    "gamma_m_omega_m",
    "n_bar",
]
STABILITY_COLUMNS = ["stable", "s1", "s2", "error"]
LIBRARIES = ("numpy", "scipy", "pandas", "pydantic", "tomli")


def load_sweep(path: Path) -> SweepSpec:
    """
    Read a sweep file.

    Raises:
        tomli.TOMLDecodeError: On TOML syntax errors (the message names the line)
        pydantic.ValidationError: On schema violations (one entry per field)
    """
    with open(path, "rb") as handle:
        data = tomli.load(handle)
    spec = SweepSpec.model_validate(data)
    logger.info("loaded sweep '%s' from %s (%d points)", spec.name, path, spec.size)
    return spec


def _observables(
    observables: List[Observable], derived: DerivedParams, filters: Dict[str, Optional[float]],
    markovian: bool, epsrel: Optional[float],
) -> Dict[str, Any]:
    record: Dict[str, Any] = {}
    needs_cm = {Observable.LOG_NEGATIVITY, Observable.N_EFF, Observable.COOLING} & set(observables)
    V = steady_cm_lyapunov(build_linear_model(derived), derived) if needs_cm else None
    eps = filters["epsilon"]

    for obs in observables:
        if obs is Observable.LOG_NEGATIVITY:
            record["log_negativity"] = logarithmic_negativity(V)
        elif obs is Observable.N_EFF:
            record["n_eff"] = effective_occupancy(V)
        elif obs is Observable.COOLING:
            report = cooling_rates(
                derived.G, derived.kappa, derived.detuning,
                gamma_m=derived.gamma_m, n_bar=derived.n_bar, n_eff_exact=effective_occupancy(V),
            )
            record.update(
                A_plus=report.A_plus, A_minus=report.A_minus, Gamma=report.Gamma,
                n_eff_perturbative=report.n_eff_perturbative,
            )
        elif obs is Observable.SPECTRUM:
            record["spectrum"] = output_spectrum(derived, [filters["omega"]], markovian)[0][1]
        elif obs is Observable.MECH_OUTPUT:
            cm = output_cm(derived, make_filter_bank([filters["center"]], eps), markovian, epsrel)
            record["mech_output_log_negativity"] = logarithmic_negativity(cm)
        elif obs is Observable.TWO_MODE:
            record["two_mode_log_negativity"] = two_mode_output_entanglement(
                derived, filters["center"], filters["center2"], eps, markovian
            )
        elif obs is Observable.TRIPARTITE:
            report = sideband_classification(derived, eps, markovian)
            record.update(
                tripartite_mech=report.cuts["mech"],
                tripartite_stokes=report.cuts["stokes"],
                tripartite_antistokes=report.cuts["antistokes"],
                fully_inseparable=report.fully_inseparable,
            )
    return record


def evaluate_point(job: Tuple[Dict[str, Any], List[str], bool, Optional[float]]) -> Dict[str, Any]:
    """
    Evaluate one grid point.

    ``job`` is (point, observable names, markovian, output quadrature tolerance),
    plain data so it can be shipped to a worker process.
    """
    point, names, markovian, epsrel = job
    observables = [Observable(name) for name in names]
    params = SystemParams.model_validate(SweepSpec.physical(point))
    filters = SweepSpec.filter_settings(point)
    derived = derive_constants(params)
    omega_m = derived.omega_m_si

    record: Dict[str, Any] = dict(point)
    record.update({
        "omega_m_rad_s": omega_m,
        "kappa_omega_m": derived.kappa,
        "kappa_rad_s": derived.kappa_si,
        "detuning_eff_omega_m": derived.detuning,
        "detuning_eff_rad_s": derived.detuning_si,
        "G_omega_m": derived.G,
        "G_rad_s": derived.G_si,
        "gamma_m_omega_m": derived.gamma_m,
        "n_bar": derived.n_bar,
    })
    for key in ("center", "center2", "omega"):
        if f"{key}_omega_m" in point:
            record[f"{key}_rad_s"] = filters[key] * omega_m

    report = stability(build_linear_model(derived), derived)
    record.update(stable=report.stable, s1=report.s1, s2=report.s2, error=None)
    columns = [c for obs in observables for c in OBSERVABLE_COLUMNS[obs]]
    record.update({column: None for column in columns})
    if not report.stable:
        logger.warning("unstable point %s (s1=%.4g, s2=%.4g)", SweepSpec.physical(point), report.s1, report.s2)
        return record
    try:
        record.update(_observables(observables, derived, filters, markovian, epsrel))
    except UnstableSystemError as exc:
        logger.warning("unstable point %s: %s", SweepSpec.physical(point), exc)
        record["stable"] = False
    except OptomechError as exc:
        logger.warning("point %s failed: %s", SweepSpec.physical(point), exc)
        record["error"] = f"{type(exc).__name__}: {exc}"
    return record


def run_sweep(
    spec: SweepSpec,
    threads: Optional[int] = None,
    epsrel: Optional[float] = None,
    grid_cap: Optional[int] = None,
) -> pd.DataFrame:
    """
    Evaluate every grid point; rows come back in grid order whatever the
    number of workers.

    Raises:
        GridCapExceededError: If the grid is larger than the cap (settings.GRID_CAP)
    """
    threads = settings.THREADS if threads is None else threads
    cap = settings.GRID_CAP if grid_cap is None else grid_cap
    if spec.size > cap:
        raise GridCapExceededError(spec.size, cap)

    names = [obs.value for obs in spec.observables]
    jobs = [(point, names, spec.markovian, epsrel) for point in spec.grid()]
    logger.info("sweep '%s': %d points on %d worker(s)", spec.name, len(jobs), threads)

    records: List[Dict[str, Any]] = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunksize = max(1, len(jobs) // (8 * threads))
            # map yields in submission order
            for index, record in enumerate(pool.map(evaluate_point, jobs, chunksize=chunksize)):
                records.append(record)
                _progress(spec, index, len(jobs))
    else:
        for index, job in enumerate(jobs):
            records.append(evaluate_point(job))
            _progress(spec, index, len(jobs))

    axis_columns = [axis.name for axis in spec.axes]
    fixed_columns = list(spec.fixed)
    extra = [c for c in ("center_rad_s", "center2_rad_s", "omega_rad_s") if c in records[0]]
    ordered = axis_columns + fixed_columns + DERIVED_COLUMNS + extra + STABILITY_COLUMNS + spec.columns()
    return pd.DataFrame(records, columns=ordered)


def _progress(spec: SweepSpec, index: int, total: int) -> None:
    step = max(1, total // 10)
    if (index + 1) % step == 0 or index + 1 == total:
        logger.info("sweep '%s': %d/%d points", spec.name, index + 1, total)


def config_hash(spec: SweepSpec) -> str:
    """sha256 of the canonical JSON form of the configuration."""
    payload = json.dumps(spec.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _versions() -> Dict[str, str]:
    versions = {"python": platform.python_version(), "app": app.__version__}
    for name in LIBRARIES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = "unknown"
    return versions


def provenance(spec: SweepSpec, frame: pd.DataFrame, seed: int, epsrel: Optional[float], threads: int) -> Dict[str, Any]:
    return {
        "sweep": spec.name,
        "description": spec.description,
        "config": spec.model_dump(mode="json"),
        "config_sha256": config_hash(spec),
        "created": datetime.now(timezone.utc).isoformat(),
        "versions": _versions(),
        "conventions": {
            "covariance": VACUUM_CONVENTION,
            "rates": "normalized by omega_m; *_rad_s columns in SI",
            "kappa": "kappa = pi c / (L F), amplitude decay rate",
            "frequencies": "rotating frame, measured from the laser; Stokes sideband at -omega_m",
            "diffusion": "markovian" if spec.markovian else "ohmic coth kernel",
        },
        "tolerances": {
            "quad_epsrel": settings.QUAD_EPSREL,
            "output_quad_epsrel": epsrel if epsrel is not None else settings.OUTPUT_QUAD_EPSREL,
        },
        "seed": seed,
        "threads": threads,
        "grid_size": int(len(frame)),
        "unstable_points": int((~frame["stable"].astype(bool)).sum()),
        "error_points": int(frame["error"].notna().sum()),
        "columns": list(frame.columns),
    }


def write_results(
    spec: SweepSpec,
    frame: pd.DataFrame,
    csv_path: Path,
    seed: Optional[int] = None,
    epsrel: Optional[float] = None,
    threads: Optional[int] = None,
) -> Tuple[Path, Path]:
    """
    Write the table as UTF-8 CSV with a header row and the JSON sidecar next
    to it (``<name>.json``). Identical inputs give byte-identical CSV.
    """
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(csv_path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8", lineterminator="\n")
    sidecar = csv_path.with_suffix(".json")
    meta = provenance(
        spec, frame,
        seed=settings.SEED if seed is None else seed,
        epsrel=epsrel,
        threads=settings.THREADS if threads is None else threads,
    )
    meta["csv_sha256"] = hashlib.sha256(csv_path.read_bytes()).hexdigest()
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True), encoding="utf-8")
    logger.info("wrote %s and %s", csv_path, sidecar)
    return csv_path, sidecar


def validation_messages(exc: ValidationError) -> List[str]:
    """``field: message`` lines for a pydantic validation error."""
    lines = []
    for error in exc.errors():
        field = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"{field}: {error['msg']}")
    return lines
