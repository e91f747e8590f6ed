# app/schemas/__init__.py
from .params import SystemParams, normalize_units

from .reports import (
    Sideband,
    BipartiteSplit,
    SplitEntanglement,
    EntanglementReport,
    CoolingReport,
    TripartiteReport,
    VerificationCheck,
)
from .sweep import Axis, Observable, PlotSpec, SweepSpec

__all__ = [
    'SystemParams',
    'normalize_units',
    'Sideband',
    'BipartiteSplit',
    'SplitEntanglement',
    'EntanglementReport',
    'CoolingReport',
    'TripartiteReport',
    'VerificationCheck',
    'Axis',
    'Observable',
    'PlotSpec',
    'SweepSpec',
]
