"""
Report Schemas Module

Pydantic schemas for the results that leave the numerical core: entanglement
reports per bipartition, cooling rates, tripartite classification. All of them
serialize to JSON for the CLI and the HTTP surface.
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.models.covariance import VACUUM_CONVENTION


class Sideband(str, Enum):
    """Which motional sideband the laser drives in the rotating-wave picture."""
    BLUE = "blue"  # Delta = -omega_m, two-mode squeezing
    RED = "red"  # Delta = +omega_m, beam splitter


class BipartiteSplit(BaseModel):
    """A cut of a multimode state into two nonempty, disjoint sides covering all modes."""
    side_a: List[int] = Field(..., min_length=1, description="Mode indices on the first side")
    side_b: List[int] = Field(..., min_length=1, description="Mode indices on the second side")

    @model_validator(mode="after")
    def check_disjoint(self) -> "BipartiteSplit":
        if set(self.side_a) & set(self.side_b):
            raise ValueError("the two sides of a split must be disjoint")
        if len(set(self.side_a)) != len(self.side_a) or len(set(self.side_b)) != len(self.side_b):
            raise ValueError("mode indices must not repeat")
        return self

    @classmethod
    def one_vs_rest(cls, mode: int, n_modes: int) -> "BipartiteSplit":
        return cls(side_a=[mode], side_b=[k for k in range(n_modes) if k != mode])

    def check_covers(self, n_modes: int) -> None:
        if sorted(self.side_a + self.side_b) != list(range(n_modes)):
            raise ValueError(f"split {self.side_a}|{self.side_b} does not cover {n_modes} modes")

    def __str__(self) -> str:
        return f"{','.join(map(str, self.side_a))}|{','.join(map(str, self.side_b))}"


class SplitEntanglement(BaseModel):
    """Partial-transpose analysis of one bipartition."""
    split: str = Field(..., description="Mode labels, e.g. 'mech|out1'")
    log_negativity: float = Field(..., ge=0)
    pt_spectrum: List[float] = Field(..., description="Symplectic eigenvalues after partial transposition")
    min_pt_eigenvalue: float
    simon_entangled: Optional[bool] = Field(
        None, description="Simon inequality 4 det V < Sigma - 1/4 (two-mode splits only)"
    )
    entangled: bool


class EntanglementReport(BaseModel):
    """Entanglement of a covariance matrix across the requested bipartitions."""
    labels: List[str]
    convention: str = VACUUM_CONVENTION
    symplectic_spectrum: List[float]
    splits: List[SplitEntanglement]

    def by_split(self) -> Dict[str, SplitEntanglement]:
        return {s.split: s for s in self.splits}


class CoolingReport(BaseModel):
    """
    Sideband scattering rates and mechanical occupancies, rates in units of omega_m.

    ``Gamma`` is negative when the laser heats the mirror; the perturbative
    occupancy is then undefined (``n_eff_perturbative`` is None).
    """
    A_plus: float = Field(..., ge=0, description="Stokes scattering rate")
    A_minus: float = Field(..., ge=0, description="Anti-Stokes scattering rate")
    Gamma: float = Field(..., description="Net laser cooling rate A_minus - A_plus")
    n_eff_perturbative: Optional[float] = None
    perturbative_valid: bool
    n_eff_exact: Optional[float] = None

    @property
    def heating(self) -> bool:
        return self.Gamma < 0.0

    model_config = ConfigDict(
        json_schema_extra={
            "examples": [
                {
                    "A_plus": 8.2192e-4,
                    "A_minus": 6.6667e-3,
                    "Gamma": 5.8447e-3,
                    "n_eff_perturbative": 1.5632,
                    "perturbative_valid": True,
                    "n_eff_exact": None,
                }
            ]
        }
    )


class TripartiteReport(BaseModel):
    """
    Partial-transpose test of each 1|2 cut of a three-mode state.

    ``cuts`` maps the isolated mode's label to nu_min - 1/2, the smallest
    symplectic eigenvalue of the transposed state shifted by the vacuum value.
    """
    order: List[str]
    cuts: Dict[str, float]
    fully_inseparable: bool

    @model_validator(mode="after")
    def check_cuts(self) -> "TripartiteReport":
        if len(self.order) != 3 or set(self.order) != set(self.cuts):
            raise ValueError("a tripartite report lists exactly the three 1|2 cuts")
        return self

    def values(self) -> List[float]:
        return [self.cuts[label] for label in self.order]


class VerificationCheck(BaseModel):
    """Outcome of one cross-method consistency check."""
    name: str
    passed: bool
    achieved: float = Field(..., description="Achieved discrepancy, in the check's own measure")
    tolerance: float
    detail: str = ""
