"""
Sweep Schemas Module

Pydantic schemas for parameter-sweep configuration files. A sweep holds a
set of fixed parameters, one or more axes that are combined as a Cartesian
grid (first axis outermost), and the observables to evaluate at every point.

Physical keys carry unit suffixes and are validated by SystemParams. Filter
and detection keys are dimensionless or given in units of omega_m:

- ``epsilon`` / ``epsilon_pi``: omega_m tau, or omega_m tau / pi
- ``center_omega_m``: centre of the first output mode (default -1, Stokes)
- ``center2_omega_m``: centre of the second output mode (default +1, anti-Stokes)
- ``omega_omega_m``: detection frequency of the output spectrum
"""

import itertools
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Iterator, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from app.schemas.params import SystemParams

FILTER_KEYS = {"epsilon", "epsilon_pi", "center_omega_m", "center2_omega_m", "omega_omega_m"}

Scalar = Union[float, int, bool]


class Observable(str, Enum):
    """Quantities a sweep can evaluate at each grid point."""
    LOG_NEGATIVITY = "log_negativity"  # intracavity mech|cav
    N_EFF = "n_eff"
    COOLING = "cooling"
    SPECTRUM = "spectrum"
    MECH_OUTPUT = "mech_output_log_negativity"
    TWO_MODE = "two_mode_log_negativity"
    TRIPARTITE = "tripartite"


# Columns emitted per observable, in order.
OBSERVABLE_COLUMNS: Dict[Observable, List[str]] = {
    Observable.LOG_NEGATIVITY: ["log_negativity"],
    Observable.N_EFF: ["n_eff"],
    Observable.COOLING: ["A_plus", "A_minus", "Gamma", "n_eff_perturbative"],
    Observable.SPECTRUM: ["spectrum"],
    Observable.MECH_OUTPUT: ["mech_output_log_negativity"],
    Observable.TWO_MODE: ["two_mode_log_negativity"],
    Observable.TRIPARTITE: [
        "tripartite_mech", "tripartite_stokes", "tripartite_antistokes", "fully_inseparable",
    ],
}


class Axis(BaseModel):
    """One sweep axis: explicit values, or ``count`` points from ``start`` to ``stop``."""
    name: str = Field(..., min_length=1, description="Parameter key, with unit suffix")
    values: Optional[List[float]] = Field(None, min_length=1)
    start: Optional[float] = None
    stop: Optional[float] = None
    count: Optional[int] = Field(None, ge=1)
    spacing: Literal["linear", "log"] = "linear"

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_range(self) -> "Axis":
        ranged = (self.start, self.stop, self.count)
        if self.values is not None:
            if any(v is not None for v in ranged):
                raise ValueError("give either 'values' or 'start'/'stop'/'count', not both")
            return self
        if any(v is None for v in ranged):
            raise ValueError("a ranged axis needs 'start', 'stop' and 'count'")
        if self.spacing == "log" and (self.start <= 0 or self.stop <= 0):
            raise ValueError("a log-spaced axis needs positive 'start' and 'stop'")
        return self

    def points(self) -> List[float]:
        if self.values is not None:
            return [float(v) for v in self.values]
        if self.spacing == "log":
            grid = np.logspace(math.log10(self.start), math.log10(self.stop), self.count)
        else:
            grid = np.linspace(self.start, self.stop, self.count)
        return [float(v) for v in grid]

    def __len__(self) -> int:
        return len(self.values) if self.values is not None else int(self.count)


class PlotSpec(BaseModel):
    """Optional static rendering of the result table."""
    kind: Literal["line", "heatmap"]
    x: str
    y: str = Field(..., description="Column on the vertical axis (line) or second grid axis (heatmap)")
    value: Optional[str] = Field(None, description="Colour column of a heatmap")
    series: Optional[str] = Field(None, description="Column splitting a line plot into curves")
    title: Optional[str] = None

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def check_heatmap(self) -> "PlotSpec":
        if self.kind == "heatmap" and self.value is None:
            raise ValueError("a heatmap needs a 'value' column")
        return self


class SweepSpec(BaseModel):
    """
    A parameter sweep.

    Example (TOML):

        name = "detuning-power"
        observables = ["log_negativity", "n_eff"]

        [fixed]
        omega_m_MHz = 10.0
        Q = 1e5
        ...

        [[axes]]
        name = "detuning_omega_m"
        start = 0.0
        stop = 2.0
        count = 41
    """
    name: str = Field(..., min_length=1)
    description: str = ""
    fixed: Dict[str, Scalar] = Field(default_factory=dict)
    axes: List[Axis] = Field(..., min_length=1)
    observables: List[Observable] = Field(..., min_length=1)
    markovian: bool = True
    output_csv: Optional[Path] = None
    plot: Optional[PlotSpec] = None

    model_config = ConfigDict(extra="forbid")

    @field_validator("observables")
    @classmethod
    def unique_observables(cls, value: List[Observable]) -> List[Observable]:
        if len(set(value)) != len(value):
            raise ValueError("observables must not repeat")
        return value

    @model_validator(mode="after")
    def check_keys(self) -> "SweepSpec":
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("axis names must not repeat")
        overlap = set(names) & set(self.fixed)
        if overlap:
            raise ValueError(f"{sorted(overlap)} given both as fixed parameters and as axes")

        keys = set(names) | set(self.fixed)
        if "epsilon" in keys and "epsilon_pi" in keys:
            raise ValueError("give either 'epsilon' or 'epsilon_pi'")
        needs_filter = {Observable.MECH_OUTPUT, Observable.TWO_MODE, Observable.TRIPARTITE}
        if needs_filter & set(self.observables) and not {"epsilon", "epsilon_pi"} & keys:
            raise ValueError("output-mode observables need 'epsilon' or 'epsilon_pi'")
        if Observable.SPECTRUM in self.observables and "omega_omega_m" not in keys:
            raise ValueError("the spectrum observable needs 'omega_omega_m'")

        # Physical keys are checked against the parameter schema at the first grid point.
        SystemParams.model_validate(self.physical(next(self.grid())))
        return self

    @property
    def size(self) -> int:
        return math.prod(len(axis) for axis in self.axes)

    def columns(self) -> List[str]:
        return [column for obs in self.observables for column in OBSERVABLE_COLUMNS[obs]]

    def grid(self) -> Iterator[Dict[str, Any]]:
        """Every grid point as fixed parameters plus one value per axis, in grid order."""
        names = [axis.name for axis in self.axes]
        for values in itertools.product(*(axis.points() for axis in self.axes)):
            point = dict(self.fixed)
            point.update(zip(names, values))
            yield point

    @staticmethod
    def physical(point: Dict[str, Any]) -> Dict[str, Any]:
        return {k: v for k, v in point.items() if k not in FILTER_KEYS}

    @staticmethod
    def filter_settings(point: Dict[str, Any]) -> Dict[str, Optional[float]]:
        """epsilon (omega_m tau) and the detection frequencies of a point, in units of omega_m."""
        epsilon = point.get("epsilon")
        if "epsilon_pi" in point:
            epsilon = math.pi * float(point["epsilon_pi"])
        return {
            "epsilon": None if epsilon is None else float(epsilon),
            "center": float(point.get("center_omega_m", -1.0)),
            "center2": float(point.get("center2_omega_m", 1.0)),
            "omega": None if "omega_omega_m" not in point else float(point["omega_omega_m"]),
        }
