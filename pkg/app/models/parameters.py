# app/models/parameters.py
"""
Derived Parameter Models

DerivedParams holds every rate of the linearized model in units of the
mechanical frequency omega_m (so omega_m itself is 1). The SI scale is kept in
``omega_m_si`` and the ``*_si`` properties convert back at the boundary.

Two factory constructors exist:

- ``operations.model.derive_constants`` builds one from physical SystemParams.
- ``DerivedParams.from_rates`` builds one directly from normalized rates,
  which is what analytic checks and random property draws need.
"""

import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field


def thermal_ratio_from_occupancy(n_bar: float) -> float:
    """k_B T / (hbar omega_m) that produces the Bose occupancy n_bar."""
    if n_bar <= 0.0:
        return 0.0
    return 1.0 / math.log1p(1.0 / n_bar)


class DerivedParams(BaseModel):
    """Rates and couplings of the linearized model, normalized by omega_m."""
    omega_m_si: float = Field(1.0, gt=0, description="omega_m in rad/s (normalization scale)")
    kappa: float = Field(..., gt=0, description="Cavity amplitude decay rate / omega_m")
    gamma_m: float = Field(..., gt=0, description="Mechanical damping rate / omega_m")
    detuning: float = Field(..., description="Effective detuning Delta / omega_m")
    G: float = Field(..., ge=0, description="Effective optomechanical coupling / omega_m")
    n_bar: float = Field(0.0, ge=0, description="Mean thermal phonon number")
    theta: float = Field(0.0, ge=0, description="k_B T / (hbar omega_m)")

    # Present only when built from physical parameters.
    bare_detuning: Optional[float] = Field(None, description="Bare detuning Delta0 / omega_m")
    G0: Optional[float] = Field(None, ge=0, description="Bare coupling / omega_m")
    E_drive: Optional[float] = Field(None, ge=0, description="Drive amplitude |E| / omega_m")
    alpha_s: Optional[float] = Field(None, ge=0, description="Stationary intracavity amplitude")
    q_s: Optional[float] = Field(None, description="Static displacement (dimensionless)")

    model_config = ConfigDict(frozen=True)

    @classmethod
    def from_rates(
        cls,
        kappa: float,
        gamma_m: float,
        G: float,
        detuning: float,
        n_bar: float = 0.0,
        omega_m_si: float = 1.0,
    ) -> "DerivedParams":
        """
        Build a parameter set directly from omega_m-normalized rates.

        The reservoir temperature is inferred from n_bar so the
        frequency-dependent thermal kernel stays consistent with it.
        """
        return cls(
            omega_m_si=omega_m_si,
            kappa=kappa,
            gamma_m=gamma_m,
            G=G,
            detuning=detuning,
            n_bar=n_bar,
            theta=thermal_ratio_from_occupancy(n_bar),
        )

    def with_rates(self, **changes) -> "DerivedParams":
        """Copy with some normalized rates changed (physical provenance dropped)."""
        data = self.model_dump()
        data.update(changes)
        if "n_bar" in changes and "theta" not in changes:
            data["theta"] = thermal_ratio_from_occupancy(changes["n_bar"])
        for key in ("bare_detuning", "G0", "E_drive", "alpha_s", "q_s"):
            if key not in changes:
                data[key] = None
        return DerivedParams(**data)

    @property
    def omega_m(self) -> float:
        return 1.0

    @property
    def alpha_s_sq(self) -> Optional[float]:
        return None if self.alpha_s is None else self.alpha_s ** 2

    @property
    def kappa_si(self) -> float:
        return self.kappa * self.omega_m_si

    @property
    def gamma_m_si(self) -> float:
        return self.gamma_m * self.omega_m_si

    @property
    def detuning_si(self) -> float:
        return self.detuning * self.omega_m_si

    @property
    def G_si(self) -> float:
        return self.G * self.omega_m_si

    @property
    def G0_si(self) -> Optional[float]:
        return None if self.G0 is None else self.G0 * self.omega_m_si

    @property
    def E_drive_si(self) -> Optional[float]:
        return None if self.E_drive is None else self.E_drive * self.omega_m_si

    @property
    def bare_detuning_si(self) -> Optional[float]:
        return None if self.bare_detuning is None else self.bare_detuning * self.omega_m_si

    @property
    def rwa_threshold(self) -> float:
        """Blue-detuned RWA stability threshold sqrt(2 kappa gamma_m)."""
        return math.sqrt(2.0 * self.kappa * self.gamma_m)

    def summary(self) -> dict:
        """Flat dict of normalized and SI values for tables and JSON."""
        row = self.model_dump()
        row.update(
            kappa_rad_s=self.kappa_si,
            gamma_m_rad_s=self.gamma_m_si,
            detuning_rad_s=self.detuning_si,
            G_rad_s=self.G_si,
            G0_rad_s=self.G0_si,
            bare_detuning_rad_s=self.bare_detuning_si,
        )
        return row

    def __repr__(self) -> str:
        return (
            f"<DerivedParams(kappa={self.kappa:.4g}, gamma_m={self.gamma_m:.3g}, "
            f"Delta={self.detuning:.4g}, G={self.G:.4g}, n_bar={self.n_bar:.4g})>"
        )


class SteadyBranch(BaseModel):
    """One real solution of the classical steady-state equations."""
    alpha_s_sq: float = Field(..., ge=0, description="|alpha_s|^2")
    effective_detuning: float = Field(..., description="Delta / omega_m on this branch")
    stable: bool

    model_config = ConfigDict(frozen=True)
