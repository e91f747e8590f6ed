"""
HTTP Request Schemas Module

Request bodies of the HTTP surface. Each one nests the physical parameters
(unit-suffixed keys, validated by SystemParams) with the settings of one
operation. Frequencies are in units of omega_m.
"""

from typing import List

from pydantic import BaseModel, Field

from app.schemas.params import SystemParams

MAX_GRID = 10000


class SpectrumRequest(BaseModel):
    params: SystemParams
    omega: List[float] = Field(..., min_length=1, max_length=MAX_GRID, description="Frequencies / omega_m")
    markovian: bool = True


class OutputCMRequest(BaseModel):
    params: SystemParams
    centers: List[float] = Field(..., min_length=1, max_length=8, description="Filter centres / omega_m")
    epsilon: float = Field(..., gt=0, description="omega_m tau")
    markovian: bool = True


class TripartiteRequest(BaseModel):
    params: SystemParams
    epsilon: float = Field(..., gt=0, description="omega_m tau; a multiple of pi")
    markovian: bool = True
