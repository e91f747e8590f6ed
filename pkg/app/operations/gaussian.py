# app/operations/gaussian.py
"""
Module: gaussian

Covariance-matrix algebra for Gaussian states and the sideband physics that
follows from it.

Functions:
- symplectic_spectrum(V) -> ndarray: Symplectic eigenvalues, ascending.
- partial_transpose(V, modes) -> CovarianceMatrix: Flip the momenta of the given modes.
- logarithmic_negativity(V, split) -> float: E_N of a bipartition.
- simon_criterion(V) -> bool: NPT verdict 4 det V < Sigma - 1/4 of a two-mode state.
- entanglement_report(V, splits) -> EntanglementReport: Per-split PT analysis.
- rwa_drift / rwa_cm / rwa_en_bound: Rotating-wave sideband model and its closed forms.
- effective_occupancy(V) -> float: n_eff = (V11 + V22 - 1)/2.
- cooling_rates(G, kappa, Delta, omega_m, gamma_m, n_bar) -> CoolingReport.

The vacuum variance is 1/2: a state is entangled across a cut exactly when a
partially transposed symplectic eigenvalue falls below 1/2.
"""

import logging
import math
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from app.core.exceptions import InternalConsistencyError, RWAInstabilityError, UnphysicalStateError
from app.models.covariance import CovarianceMatrix
from app.schemas.reports import (
    BipartiteSplit,
    CoolingReport,
    EntanglementReport,
    Sideband,
    SplitEntanglement,
)

logger = logging.getLogger(__name__)

MatrixLike = Union[CovarianceMatrix, np.ndarray]

# Sigma^2 - 4 det V may undershoot zero by this fraction of Sigma^2 from rounding.
DISCRIMINANT_TOLERANCE = 1e-12
CROSS_CHECK_TOLERANCE = 1e-9
# A partially transposed eigenvalue counts as below 1/2 only past this margin.
NPT_TOLERANCE = 1e-12


def _matrix(V: MatrixLike) -> np.ndarray:
    return V.matrix if isinstance(V, CovarianceMatrix) else np.asarray(V, dtype=float)


def _as_cm(V: MatrixLike) -> CovarianceMatrix:
    return V if isinstance(V, CovarianceMatrix) else CovarianceMatrix(V)


def symplectic_form(n_modes: int) -> np.ndarray:
    """J = direct sum of [[0, 1], [-1, 0]] over the modes."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_spectrum(V: MatrixLike) -> np.ndarray:
    """
    Symplectic eigenvalues of V: the moduli of the eigenvalues of iJV, which
    come in +- pairs, one per pair, ascending.
    """
    M = _matrix(V)
    n_modes = M.shape[0] // 2
    moduli = np.sort(np.abs(np.linalg.eigvals(1j * symplectic_form(n_modes) @ M)))
    return moduli[::2]


def partial_transpose(V: MatrixLike, modes: Iterable[int]) -> CovarianceMatrix:
    """P V P with P = diag(1, -1) on each listed mode and the identity elsewhere."""
    cm = _as_cm(V)
    sign = np.ones(cm.dim)
    for mode in modes:
        sign[2 * cm.index(mode) + 1] = -1.0
    return CovarianceMatrix(sign[:, None] * cm.matrix * sign[None, :], cm.labels)


def _ordered(V: CovarianceMatrix, split: BipartiteSplit) -> CovarianceMatrix:
    split.check_covers(V.n_modes)
    return V.submatrix(split.side_a + split.side_b)


def two_mode_invariants(V: MatrixLike) -> Tuple[float, float]:
    """(Sigma, det V) with Sigma = det V_a + det V_b - 2 det C for a two-mode CM."""
    M = _matrix(V)
    sigma = np.linalg.det(M[:2, :2]) + np.linalg.det(M[2:, 2:]) - 2.0 * np.linalg.det(M[:2, 2:])
    return float(sigma), float(np.linalg.det(M))


def eta_minus(V: MatrixLike) -> float:
    """
    Smaller PT symplectic eigenvalue of a two-mode state,
    eta^2 = (Sigma - sqrt(Sigma^2 - 4 det V)) / 2, in its cancellation-free form
    2 det V / (Sigma + sqrt(Sigma^2 - 4 det V)).

    Raises:
        UnphysicalStateError: If Sigma^2 < 4 det V beyond rounding, or det V <= 0
    """
    sigma, det = two_mode_invariants(V)
    disc = sigma * sigma - 4.0 * det
    if disc < -DISCRIMINANT_TOLERANCE * sigma * sigma:
        raise UnphysicalStateError(
            f"Sigma^2 < 4 det V (Sigma={sigma:.6g}, det={det:.6g}): not a covariance matrix"
        )
    if det <= 0.0 or sigma <= 0.0:
        raise UnphysicalStateError(f"degenerate covariance matrix (Sigma={sigma:.6g}, det={det:.6g})")
    return math.sqrt(2.0 * det / (sigma + math.sqrt(max(disc, 0.0))))


def simon_criterion(V: MatrixLike) -> bool:
    """True when the two-mode state is NPT, i.e. 4 det V < Sigma - 1/4."""
    sigma, det = two_mode_invariants(V)
    return 4.0 * det < sigma - 0.25


def _negativity_from_spectrum(spectrum: np.ndarray) -> float:
    below = spectrum[spectrum < 0.5 - NPT_TOLERANCE]
    return float(np.sum(-np.log(2.0 * below))) if below.size else 0.0


def logarithmic_negativity(V: MatrixLike, split: Optional[BipartiteSplit] = None) -> float:
    """
    Logarithmic negativity of a bipartition.

    Two-mode 1|1 splits use E_N = max[0, -ln 2 eta_minus] from Sigma and det V,
    cross-checked against the partially transposed symplectic spectrum. Larger
    splits sum -ln 2 nu over every PT symplectic eigenvalue nu below 1/2.

    Args:
        V: Covariance matrix
        split: Bipartition; defaults to first mode | the rest

    Raises:
        UnphysicalStateError: On inputs that are not covariance matrices
        InternalConsistencyError: If the two two-mode routes disagree
    """
    cm = _as_cm(V)
    split = split or BipartiteSplit.one_vs_rest(0, cm.n_modes)
    ordered = _ordered(cm, split)
    n_a = len(split.side_a)
    pt_spectrum = symplectic_spectrum(partial_transpose(ordered, range(n_a)))

    if ordered.n_modes != 2:
        return _negativity_from_spectrum(pt_spectrum)

    eta = eta_minus(ordered)
    tolerance = CROSS_CHECK_TOLERANCE * max(1.0, float(pt_spectrum[-1]))
    if abs(eta - pt_spectrum[0]) > tolerance:
        raise InternalConsistencyError(
            f"eta_minus {eta:.12g} disagrees with PT spectrum {pt_spectrum[0]:.12g}",
            first=eta,
            second=float(pt_spectrum[0]),
        )
    return max(0.0, -math.log(2.0 * eta))


def _split_label(cm: CovarianceMatrix, split: BipartiteSplit) -> str:
    side = lambda idx: ",".join(cm.labels[k] for k in idx)
    return f"{side(split.side_a)}|{side(split.side_b)}"


def entanglement_report(
    V: MatrixLike, splits: Optional[Sequence[BipartiteSplit]] = None
) -> EntanglementReport:
    """
    Partial-transpose analysis of V across each split (default: every 1|rest cut,
    or the single cut for two modes).
    """
    cm = _as_cm(V)
    if splits is None:
        cut_modes = range(1) if cm.n_modes == 2 else range(cm.n_modes)
        splits = [BipartiteSplit.one_vs_rest(k, cm.n_modes) for k in cut_modes]

    entries: List[SplitEntanglement] = []
    for split in splits:
        ordered = _ordered(cm, split)
        spectrum = symplectic_spectrum(partial_transpose(ordered, range(len(split.side_a))))
        e_n = logarithmic_negativity(cm, split)
        entries.append(
            SplitEntanglement(
                split=_split_label(cm, split),
                log_negativity=e_n,
                pt_spectrum=spectrum.tolist(),
                min_pt_eigenvalue=float(spectrum[0]),
                simon_entangled=simon_criterion(ordered) if ordered.n_modes == 2 else None,
                entangled=bool(spectrum[0] < 0.5 - NPT_TOLERANCE),
            )
        )
    return EntanglementReport(
        labels=list(cm.labels),
        symplectic_spectrum=symplectic_spectrum(cm).tolist(),
        splits=entries,
    )


# ---------------------------------------------------------------------------
# Rotating-wave sideband model
# ---------------------------------------------------------------------------

def rwa_drift(G: float, kappa: float, gamma_m: float, n_bar: float, sign: Sideband):
    """
    Drift and diffusion of the resonant sideband model in the frame rotating
    at omega_m, for Delta = -omega_m (blue) or +omega_m (red):

        blue: q' = -g/2 q + G/2 Y, p' = -g/2 p + G/2 X, X' = -k X + G/2 p, Y' = -k Y + G/2 q
        red:  q' = -g/2 q - G/2 Y, p' = -g/2 p + G/2 X, X' = -k X - G/2 p, Y' = -k Y + G/2 q

    with D = Diag[g(n + 1/2), g(n + 1/2), k, k].
    """
    a, h = 0.5 * gamma_m, 0.5 * G
    s = 1.0 if Sideband(sign) is Sideband.BLUE else -1.0
    drift = np.array([
        [-a, 0.0, 0.0, s * h],
        [0.0, -a, h, 0.0],
        [0.0, s * h, -kappa, 0.0],
        [h, 0.0, 0.0, -kappa],
    ])
    diffusion = np.diag([gamma_m * (n_bar + 0.5), gamma_m * (n_bar + 0.5), kappa, kappa])
    return drift, diffusion


def rwa_cm(G: float, kappa: float, gamma_m: float, n_bar: float, sign: Sideband) -> CovarianceMatrix:
    """
    Closed-form stationary CM of the rotating-wave sideband model.

    With a = gamma_m/2 and g = G/2 the only nonzero entries are
        V11 = V22 = n + 1/2 +- g V14 / a,   V33 = V44 = 1/2 + g |V14| / kappa,
        V14 = +-V23 = g a kappa (n + 1) / ((a + kappa)(a kappa - g^2))   (blue, V23 = V14)
        V14 = -V23 = g a kappa n / ((a + kappa)(a kappa + g^2))         (red)

    Raises:
        RWAInstabilityError: Blue sideband with G >= sqrt(2 kappa gamma_m)
    """
    sign = Sideband(sign)
    a, g = 0.5 * gamma_m, 0.5 * G
    if sign is Sideband.BLUE:
        threshold = math.sqrt(2.0 * kappa * gamma_m)
        if G >= threshold:
            raise RWAInstabilityError(G, threshold)
        v14 = g * a * kappa * (n_bar + 1.0) / ((a + kappa) * (a * kappa - g * g))
        v23 = v14
        v11 = n_bar + 0.5 + g * v14 / a
    else:
        v14 = g * a * kappa * n_bar / ((a + kappa) * (a * kappa + g * g))
        v23 = -v14
        v11 = n_bar + 0.5 - g * v14 / a
    v33 = 0.5 + g * abs(v14) / kappa

    V = np.diag([v11, v11, v33, v33])
    V[0, 3] = V[3, 0] = v14
    V[1, 2] = V[2, 1] = v23
    return CovarianceMatrix(V, ("mech", "cav"))


def rwa_en_bound(G: float, kappa: float, gamma_m: float, n_bar: float) -> float:
    """
    Bound ln[(1 + G / sqrt(2 kappa gamma_m)) / (1 + n)] on blue-sideband E_N, clamped at 0.

    It is the leading term for gamma_m << kappa: the exact E_N of ``rwa_cm`` may
    exceed it by up to about 2 gamma_m / (2 kappa + gamma_m), which is positive
    even at n >= 1.
    """
    ratio = G / math.sqrt(2.0 * kappa * gamma_m)
    return max(0.0, math.log((1.0 + ratio) / (1.0 + n_bar)))


# ---------------------------------------------------------------------------
# Cooling
# ---------------------------------------------------------------------------

def effective_occupancy(V: MatrixLike, mode: int = 0) -> float:
    """n_eff = (V11 + V22 - 1)/2 on the mechanical block."""
    block = _as_cm(V).block(mode, mode)
    return float((block[0, 0] + block[1, 1] - 1.0) / 2.0)


def cooling_rates(
    G: float,
    kappa: float,
    Delta: float,
    omega_m: float = 1.0,
    gamma_m: float = 0.0,
    n_bar: float = 0.0,
    n_eff_exact: Optional[float] = None,
) -> CoolingReport:
    """
    Stokes and anti-Stokes scattering rates and the resulting occupancy:

        A_+- = (G^2 kappa / 2) / (kappa^2 + (Delta +- omega_m)^2),  Gamma = A_- - A_+,
        n_eff = (gamma_m n + A_+) / (gamma_m + Gamma).

    The perturbative occupancy is reported invalid when gamma_m + Gamma <= 0.
    """
    prefactor = 0.5 * G * G * kappa
    A_plus = prefactor / (kappa * kappa + (Delta + omega_m) ** 2)
    A_minus = prefactor / (kappa * kappa + (Delta - omega_m) ** 2)
    Gamma = A_minus - A_plus
    total = gamma_m + Gamma
    valid = total > 0.0
    if not valid:
        logger.warning("net damping gamma_m + Gamma = %.4g <= 0: perturbative n_eff undefined", total)
    return CoolingReport(
        A_plus=A_plus,
        A_minus=A_minus,
        Gamma=Gamma,
        n_eff_perturbative=(gamma_m * n_bar + A_plus) / total if valid else None,
        perturbative_valid=valid,
        n_eff_exact=n_eff_exact,
    )
