"""
System Parameter Schemas

This module defines the Pydantic schema for the physical inputs of the
cavity-plus-mirror system. Every dimensional quantity is carried in SI units
under a field name that spells the unit out (``mass_kg``, ``power_W``, ...).

Configuration files and HTTP bodies may use any of the unit suffixes listed
in ``UNIT_FACTORS`` (``mass_ng``, ``omega_m_MHz``, ``detuning_omega_m``, ...).
They are converted to SI before field validation. A key that names a known
quantity but carries no unit (``mass = 1e-11``) is rejected as ambiguous.
"""

import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import tomli
from pydantic import BaseModel, ConfigDict, Field, model_validator

TWO_PI = 2.0 * math.pi

# Frequencies given in Hz are cycle frequencies: omega = 2*pi*f.
_ANGULAR = {
    "rad_s": 1.0,
    "Hz": TWO_PI,
    "kHz": TWO_PI * 1e3,
    "MHz": TWO_PI * 1e6,
    "GHz": TWO_PI * 1e9,
}

UNIT_FACTORS: Dict[str, Dict[str, float]] = {
    "omega_m": _ANGULAR,
    "mass": {"kg": 1.0, "g": 1e-3, "mg": 1e-6, "ug": 1e-9, "ng": 1e-12, "pg": 1e-15},
    "length": {"m": 1.0, "cm": 1e-2, "mm": 1e-3, "um": 1e-6},
    "wavelength": {"m": 1.0, "um": 1e-6, "nm": 1e-9},
    "power": {"W": 1.0, "mW": 1e-3, "uW": 1e-6},
    "temperature": {"K": 1.0, "mK": 1e-3},
    "kappa": _ANGULAR,
    "detuning": _ANGULAR,
    "bare_detuning": _ANGULAR,
}

# Rates that may also be given in units of the mechanical frequency.
RELATIVE_TO_OMEGA_M = {"kappa", "detuning", "bare_detuning"}

CANONICAL_UNIT = {
    "omega_m": "rad_s",
    "mass": "kg",
    "length": "m",
    "wavelength": "m",
    "power": "W",
    "temperature": "K",
    "kappa": "rad_s",
    "detuning": "rad_s",
    "bare_detuning": "rad_s",
}

DIMENSIONLESS = {"Q", "finesse"}

# Quantities that fix the same physical property; exactly one of each pair is given.
ALTERNATIVES = {
    "finesse": "kappa",
    "kappa": "finesse",
    "detuning": "bare_detuning",
    "bare_detuning": "detuning",
}


def _split_key(key: str):
    """Return (quantity, suffix) for a unit-suffixed key, or (None, None)."""
    # Longest quantity first so "bare_detuning_MHz" is not read as "detuning".
    for quantity in sorted(UNIT_FACTORS, key=len, reverse=True):
        prefix = quantity + "_"
        if key.startswith(prefix):
            return quantity, key[len(prefix):]
    return None, None


def normalize_units(data: Dict[str, Any]) -> Dict[str, Any]:
    """
    Convert a mapping with unit-suffixed keys into canonical SI field names.

    Args:
        data: Raw key/value pairs (from TOML, JSON or keyword arguments)

    Returns:
        dict: The same values keyed by canonical field names, in SI units

    Raises:
        ValueError: On bare (unitless) keys, unknown units, unknown keys or a
            quantity given twice
    """
    out: Dict[str, Any] = {}
    relative: Dict[str, float] = {}
    for key, value in data.items():
        if key in DIMENSIONLESS:
            out[key] = value
            continue
        if key in UNIT_FACTORS:
            raise ValueError(
                f"'{key}' has no unit suffix; use one of "
                f"{', '.join(key + '_' + s for s in UNIT_FACTORS[key])}"
            )
        quantity, suffix = _split_key(key)
        if quantity is None:
            raise ValueError(f"unknown parameter '{key}'")
        canonical = f"{quantity}_{CANONICAL_UNIT[quantity]}"
        if canonical in out or quantity in relative:
            raise ValueError(f"'{quantity}' is given more than once")
        if suffix == "omega_m" and quantity in RELATIVE_TO_OMEGA_M:
            relative[quantity] = value
            continue
        factors = UNIT_FACTORS[quantity]
        if suffix not in factors:
            raise ValueError(
                f"unknown unit '{suffix}' for '{quantity}'; allowed: {', '.join(factors)}"
            )
        if value is None:
            out[canonical] = None
        else:
            out[canonical] = float(value) * factors[suffix]

    if relative:
        omega_m = out.get("omega_m_rad_s")
        if omega_m is None:
            raise ValueError("rates given in units of omega_m need omega_m itself")
        for quantity, value in relative.items():
            out[f"{quantity}_{CANONICAL_UNIT[quantity]}"] = (
                None if value is None else float(value) * float(omega_m)
            )
    return out


class SystemParams(BaseModel):
    """
    Physical inputs of the optomechanical system, in SI units.

    Exactly one of ``finesse`` / ``kappa_rad_s`` fixes the cavity linewidth and
    exactly one of ``detuning_rad_s`` (effective, radiation-pressure shifted)
    / ``bare_detuning_rad_s`` fixes the laser detuning.
    """
    omega_m_rad_s: float = Field(..., gt=0, description="Mechanical angular frequency (rad/s)")
    Q: float = Field(..., ge=1, description="Mechanical quality factor, gamma_m = omega_m / Q")
    mass_kg: float = Field(..., gt=0, description="Effective mass of the mirror mode (kg)")
    length_m: float = Field(..., gt=0, description="Cavity length (m)")
    wavelength_m: float = Field(..., gt=0, description="Laser wavelength (m)")
    power_W: float = Field(..., ge=0, description="Input laser power (W)")
    temperature_K: float = Field(..., ge=0, description="Reservoir temperature (K)")
    finesse: Optional[float] = Field(None, gt=0, description="Cavity finesse")
    kappa_rad_s: Optional[float] = Field(None, gt=0, description="Cavity amplitude decay rate (rad/s)")
    detuning_rad_s: Optional[float] = Field(None, description="Effective detuning Delta (rad/s)")
    bare_detuning_rad_s: Optional[float] = Field(None, description="Bare detuning Delta0 (rad/s)")

    @model_validator(mode="before")
    @classmethod
    def convert_units(cls, data: Any) -> Any:
        if isinstance(data, dict):
            return normalize_units(data)
        return data

    @model_validator(mode="after")
    def check_alternatives(self) -> "SystemParams":
        if (self.finesse is None) == (self.kappa_rad_s is None):
            raise ValueError("exactly one of 'finesse' and 'kappa' must be given")
        if (self.detuning_rad_s is None) == (self.bare_detuning_rad_s is None):
            raise ValueError("exactly one of 'detuning' and 'bare_detuning' must be given")
        return self

    @classmethod
    def from_toml(cls, path: Union[str, Path], **overrides: Any) -> "SystemParams":
        """
        Load parameters from a TOML file, either at top level or under a
        [params] table. Overrides replace file keys of the same quantity.
        """
        with open(path, "rb") as handle:
            data = tomli.load(handle)
        data = dict(data.get("params", data))
        if overrides:
            quantities = {_split_key(k)[0] or k for k in overrides}
            quantities |= {ALTERNATIVES[q] for q in quantities if q in ALTERNATIVES}
            data = {k: v for k, v in data.items() if (_split_key(k)[0] or k) not in quantities}
            data.update(overrides)
        return cls.model_validate(data)

    @property
    def detuning_is_bare(self) -> bool:
        return self.bare_detuning_rad_s is not None

    def replace(self, **changes: Any) -> "SystemParams":
        """Copy with some fields changed; keys may carry any supported unit suffix."""
        data = self.model_dump()
        changes = dict(changes)
        if not any(key.startswith("omega_m_") for key in changes):
            changes["omega_m_rad_s"] = self.omega_m_rad_s
        incoming = normalize_units(changes)
        # Switching between finesse/kappa or detuning/bare_detuning drops the other.
        if "finesse" in incoming:
            data["kappa_rad_s"] = None
        if "kappa_rad_s" in incoming:
            data["finesse"] = None
        if "detuning_rad_s" in incoming:
            data["bare_detuning_rad_s"] = None
        if "bare_detuning_rad_s" in incoming:
            data["detuning_rad_s"] = None
        data.update(incoming)
        return SystemParams.model_validate(data)

    model_config = ConfigDict(
        extra="forbid",
        frozen=True,
        json_schema_extra={
            "examples": [
                {
                    "omega_m_MHz": 10.0,
                    "Q": 1e5,
                    "mass_ng": 50.0,
                    "length_mm": 1.0,
                    "wavelength_nm": 810.0,
                    "finesse": 2e4,
                    "power_mW": 30.0,
                    "detuning_omega_m": 1.0,
                    "temperature_K": 0.4,
                }
            ]
        },
    )
