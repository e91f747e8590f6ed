# app/operations/tripartite.py
"""
Module: tripartite

Partial-transpose classification of three-mode states, in particular the
mechanics together with the Stokes and anti-Stokes output modes.

Functions:
- classify_tripartite(V) -> TripartiteReport: nu_min - 1/2 for each 1|2 cut.
- sideband_state(derived, epsilon) -> CovarianceMatrix: mech, Stokes and anti-Stokes modes.
- sideband_classification(derived, epsilon) -> TripartiteReport.
"""

import logging
from typing import Sequence

from app.models.covariance import CovarianceMatrix
from app.models.parameters import DerivedParams
from app.operations.gaussian import NPT_TOLERANCE, MatrixLike, partial_transpose, symplectic_spectrum
from app.operations.output import make_filter_bank, output_cm
from app.schemas.reports import TripartiteReport

logger = logging.getLogger(__name__)

SIDEBAND_LABELS = ("mech", "stokes", "antistokes")


def classify_tripartite(V: MatrixLike) -> TripartiteReport:
    """
    Transpose each mode in turn and report the smallest symplectic eigenvalue
    of the result minus the vacuum value 1/2. The state is fully inseparable
    when all three numbers are negative.

    Raises:
        ValueError: If V is not a three-mode covariance matrix
    """
    cm = V if isinstance(V, CovarianceMatrix) else CovarianceMatrix(V)
    if cm.n_modes != 3:
        raise ValueError(f"tripartite classification needs three modes, got {cm.n_modes}")

    cuts = {}
    for mode, label in enumerate(cm.labels):
        nu_min = float(symplectic_spectrum(partial_transpose(cm, [mode]))[0])
        cuts[label] = nu_min - 0.5
    inseparable = all(value < -NPT_TOLERANCE for value in cuts.values())
    logger.debug("tripartite cuts %s (fully inseparable: %s)", cuts, inseparable)
    return TripartiteReport(order=list(cm.labels), cuts=cuts, fully_inseparable=inseparable)


def sideband_state(
    derived: DerivedParams, epsilon: float, centers: Sequence[float] = (-1.0, 1.0), markovian: bool = True
) -> CovarianceMatrix:
    """
    Stationary state of the mechanics and the two output modes centred on the
    Stokes (-omega_m) and anti-Stokes (+omega_m) sidebands.

    Raises:
        OrthogonalityError: Unless epsilon is a multiple of pi, the sideband
            separation 2 omega_m being then a multiple of 2 pi / tau
    """
    cm = output_cm(derived, make_filter_bank(centers, epsilon), markovian)
    return CovarianceMatrix(cm.matrix, SIDEBAND_LABELS)


def sideband_classification(derived: DerivedParams, epsilon: float, markovian: bool = True) -> TripartiteReport:
    return classify_tripartite(sideband_state(derived, epsilon, markovian=markovian))
