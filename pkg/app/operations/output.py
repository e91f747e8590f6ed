# app/operations/output.py
"""
Module: output

Filtered cavity output modes: their joint stationary state with the mirror,
the output photon spectrum, and the entanglement scans built on them.

Functions:
- make_filter_bank(centers, tau) -> FilterBank: Orthonormal step-filter modes.
- output_cm(derived, bank) -> CovarianceMatrix: (2N+2)-dim state of mechanics + N output modes.
- term2_identity(bank) -> (ndarray, ndarray): Quadrature of the reflected-vacuum term vs P_out/2.
- output_spectrum(derived, omega_grid) -> list[(omega, S)]: Normal-ordered photon-number spectrum.
- mech_output_entanglement(derived, center, epsilon) -> float: E_N of mechanics | one output mode.
- mech_output_entanglement_scan(derived, epsilon_list, center_grid) -> DataFrame.
- two_mode_output_entanglement(derived, center1, center2, tau) -> float: E_N between two output modes.

The output covariance matrix is the sum of three terms,
    V_out = (1/2pi) Int dw T [E M D M^dag E + E M R + R^T M^dag E] T^dag  +  P_out / 2,
the last one being the reflected input vacuum, which integrates to P_out/2
for any orthonormal bank and is inserted exactly.
"""

import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core.config import settings
from app.core.exceptions import UnstableSystemError
from app.models.covariance import CovarianceMatrix, labels_for
from app.models.filters import ExtendedModel, FilterBank
from app.models.linear import thermal_kernel
from app.models.parameters import DerivedParams
from app.operations.dynamics import (
    build_linear_model,
    check_physical,
    frequency_integral,
    resonance_points,
    stability,
    tail_integral,
)
from app.operations.gaussian import logarithmic_negativity, symplectic_spectrum, partial_transpose
from app.schemas.reports import BipartiteSplit

logger = logging.getLogger(__name__)

OUTPUT_PHYSICALITY_TOLERANCE = 1e-6
# Breakpoints every pi/(2 tau) within 20 pi/tau of each filter centre.
FILTER_CLUSTER_HALF_WIDTH = 20.0 * math.pi
FILTER_PANEL = 0.5 * math.pi
# Output integrals run to 200 max(omega_m, kappa, |Delta|).
OUTPUT_WINDOW_FACTOR = 200.0
# The term-2 check integrates 200 lobes either side of each centre.
TERM2_HALF_WIDTH = 400.0 * math.pi


def make_filter_bank(centers: Sequence[float], tau: float) -> FilterBank:
    """
    Orthonormal bank of step filters of duration tau (in units of 1/omega_m).

    Raises:
        OrthogonalityError: Naming the first pair of centres that is not
            separated by a nonzero integer multiple of 2 pi / tau
    """
    return FilterBank.create(list(centers), tau)


def _require_stable(derived: DerivedParams) -> None:
    report = stability(build_linear_model(derived), derived)
    if not report.stable:
        raise UnstableSystemError(
            f"linearized dynamics unstable (s1={report.s1:.4g}, s2={report.s2:.4g})", report=report
        )


def _filter_points(bank: FilterBank) -> List[float]:
    tau = bank.tau
    offsets = np.arange(-FILTER_CLUSTER_HALF_WIDTH, FILTER_CLUSTER_HALF_WIDTH + 1e-12, FILTER_PANEL) / tau
    points = []
    for center in bank.centers:
        points.extend((abs(center) + offsets).tolist())
    return points


def _output_window(derived: DerivedParams, bank: FilterBank) -> float:
    """Cutoff of the output integrals, past every cavity scale and the main lobes of every filter."""
    reach = max(abs(c) for c in bank.centers) + 2.0 * FILTER_CLUSTER_HALF_WIDTH / bank.tau
    return max(OUTPUT_WINDOW_FACTOR * max(1.0, derived.kappa, abs(derived.detuning)), reach)


def _scaled_integral(integrand_for, dim, upper, points, epsrel, label, floor):
    """Coarse pass for per-quadrature scales (at least ``floor``), then the scaled fine pass."""
    coarse = frequency_integral(
        integrand_for(np.ones((dim, dim))), upper, points, 1e-3, tail=False, label=f"{label} (coarse)"
    ).reshape(dim, dim)
    diag = np.maximum(np.abs(np.diag(coarse)), floor)
    scale = 1.0 / np.sqrt(np.outer(diag, diag))
    fine = frequency_integral(
        integrand_for(scale), upper, points, epsrel, tail=False, label=label
    ).reshape(dim, dim)
    return fine / scale


def output_cm(
    derived: DerivedParams,
    bank: FilterBank,
    markovian: bool = True,
    epsrel: Optional[float] = None,
) -> CovarianceMatrix:
    """
    Stationary covariance matrix of the mechanics and the N filtered output modes.

    The frequency integral is cut at the output window. Past it the filtered
    blocks are negligible; the mechanical block keeps a slowly decaying
    momentum tail, which is added with white inputs. With the Ohmic kernel the
    thermal entry is dropped from that tail, the window being the bath cutoff.

    Args:
        derived: Normalized system rates
        bank: Orthonormal filter bank
        markovian: Constant thermal diffusion (default) or the coth kernel with
            the integration window as cutoff
        epsrel: Relative quadrature tolerance (settings.OUTPUT_QUAD_EPSREL)

    Returns:
        CovarianceMatrix: Modes labelled mech, out1, ..., outN

    Raises:
        UnstableSystemError: If the intracavity dynamics is unstable
        QuadratureError: If the frequency integral does not converge
    """
    _require_stable(derived)
    epsrel = settings.OUTPUT_QUAD_EPSREL if epsrel is None else epsrel
    ext = ExtendedModel(derived, bank)
    E = ext.gain
    D0, R0 = ext.diffusion_ext(), ext.cross_ext()

    def integrand_for(scale):
        def integrand(omega: float) -> np.ndarray:
            if markovian:
                D, R = D0, R0
            else:
                D, R = ext.diffusion_ext(omega, False), ext.cross_ext(omega, False)
            M = E @ ext.transfer(omega)
            inner = M @ D @ M.conj().T + M @ R + R.T @ M.conj().T
            T = ext.filter_matrix(omega)
            return ((T @ inner @ T.conj().T).real * scale).ravel() / np.pi
        return integrand

    upper = _output_window(derived, bank)
    points = _filter_points(bank) + resonance_points(ext.drift_ext, upper, extra=(1.0, abs(derived.detuning)))
    V = _scaled_integral(
        integrand_for, ext.dim, upper, points, epsrel, "output CM",
        floor=np.diag(0.5 * ext.projector_out) + 1e-12,
    )
    D_tail = D0.copy()
    if not markovian:
        D_tail[1, 1] = 0.0

    def mech_tail(omega: float) -> np.ndarray:
        M = ext.transfer(omega)[:2]
        return (M @ D_tail @ M.conj().T).real.ravel() / np.pi

    V[:2, :2] += tail_integral(
        mech_tail, upper, 0.1 * epsrel * abs(V[1, 1]), label="output CM mechanical tail"
    ).reshape(2, 2)
    V = V + 0.5 * ext.projector_out

    cm = CovarianceMatrix.create(V, labels_for(len(bank)), symmetrize=True)
    check_physical(cm, OUTPUT_PHYSICALITY_TOLERANCE)
    logger.debug("output CM for %r: diag %s", bank, np.round(np.diag(V), 6).tolist())
    return cm


def _tail_weight(first: float, second: float, upper: float) -> float:
    """Int over |w| > upper of dw / ((w - first)(w - second))."""
    if first == second:
        return 1.0 / (upper - first) + 1.0 / (upper + first)
    return (
        math.log((upper - second) / (upper - first)) + math.log((upper + first) / (upper + second))
    ) / (first - second)


def term2_identity(bank: FilterBank, epsrel: float = 1e-7) -> Tuple[np.ndarray, np.ndarray]:
    """
    Numerical check of the reflected-vacuum term: returns the quadrature of
    (1/2pi) Int dw T (Q N_in Q^T) T^dag together with its exact value P_out/2.

    Beyond 200 lobes from every centre the integrand is replaced by its lobe
    average, which integrates in closed form. For an orthogonal bank the product
    of two responses is tau sin^2(x_k) / (x_j x_k) there, so filter pairs get a
    tail as well as single filters.
    """
    vacuum = bank.reflected_vacuum()
    dim = vacuum.shape[0]

    def integrand(omega: float) -> np.ndarray:
        T = bank.transfer_matrix(omega)
        return (T @ vacuum @ T.conj().T).real.ravel() / np.pi

    upper = max(abs(c) for c in bank.centers) + TERM2_HALF_WIDTH / bank.tau
    numeric = frequency_integral(
        integrand, upper, _filter_points(bank), epsrel, tail=False, label="term-2 identity"
    ).reshape(dim, dim)
    for j, first in enumerate(bank.centers):
        for k, second in enumerate(bank.centers):
            tail = _tail_weight(first, second, upper) / (2.0 * np.pi * bank.tau)
            numeric[2 + 2 * j, 2 + 2 * k] += tail
            numeric[3 + 2 * j, 3 + 2 * k] += tail
    expected = np.diag([0.0, 0.0] + [0.5] * (dim - 2))
    return numeric, expected


# ---------------------------------------------------------------------------
# Output spectrum
# ---------------------------------------------------------------------------

# delta a = (X + iY)/sqrt(2) picks these components of the quadrature vector.
_ANNIHILATION = np.array([0.0, 0.0, 1.0, 1.0j]) / math.sqrt(2.0)


def _normal_ordered_noise(derived: DerivedParams, omega: float, markovian: bool) -> np.ndarray:
    """
    <n(w)^dag n(w)> for the input noise (0, xi, sqrt(2k) Xin, sqrt(2k) Yin) with a
    vacuum optical input. The optical block kappa [[1, i], [-i, 1]] annihilates
    the vacuum; the thermal entry is the Markovian value or the emission part
    of the Ohmic kernel, gamma_m w (coth(w / 2 theta) - 1).
    """
    k = derived.kappa
    if markovian:
        thermal = derived.gamma_m * (2.0 * derived.n_bar + 1.0)
    else:
        thermal = float(thermal_kernel(omega, derived.gamma_m, derived.theta)) - derived.gamma_m * omega
    return np.array([
        [0.0, 0.0, 0.0, 0.0],
        [0.0, thermal, 0.0, 0.0],
        [0.0, 0.0, k, 1j * k],
        [0.0, 0.0, -1j * k, k],
    ])


def output_spectrum(
    derived: DerivedParams, omega_grid: Sequence[float], markovian: bool = True
) -> List[Tuple[float, float]]:
    """
    Photon-number spectrum S(w) = <da(w)^dag da(w)> of the intracavity field
    fluctuations, normal ordered so that S = 0 without optomechanical scattering.

    Frequencies are measured from the laser: the Stokes sideband is at -omega_m,
    the anti-Stokes sideband at +omega_m.
    """
    _require_stable(derived)
    model = build_linear_model(derived)
    spectrum = []
    for omega in omega_grid:
        v = model.transfer(float(omega)).T @ _ANNIHILATION
        noise = _normal_ordered_noise(derived, float(omega), markovian)
        value = float(np.real(v.conj() @ noise @ v))
        spectrum.append((float(omega), value))
    return spectrum


# ---------------------------------------------------------------------------
# Entanglement scans
# ---------------------------------------------------------------------------

def mech_output_entanglement(
    derived: DerivedParams, center: float, epsilon: float, markovian: bool = True
) -> float:
    """E_N between the mirror and one output mode centred at ``center`` with omega_m tau = epsilon."""
    cm = output_cm(derived, make_filter_bank([center], epsilon), markovian)
    return logarithmic_negativity(cm)


def mech_output_entanglement_scan(
    derived: DerivedParams,
    epsilon_list: Sequence[float],
    center_grid: Sequence[float],
    markovian: bool = True,
) -> pd.DataFrame:
    """
    E_N of mechanics | output mode over a grid of filter centres and inverse bandwidths.

    Returns:
        DataFrame with columns epsilon, center, log_negativity, min_pt_eigenvalue
    """
    rows = []
    for epsilon in epsilon_list:
        for center in center_grid:
            cm = output_cm(derived, make_filter_bank([center], epsilon), markovian)
            nu = symplectic_spectrum(partial_transpose(cm, [0]))[0]
            rows.append({
                "epsilon": float(epsilon),
                "center": float(center),
                "log_negativity": logarithmic_negativity(cm),
                "min_pt_eigenvalue": float(nu),
            })
        logger.info("mech-output scan: epsilon=%.4g done (%d centres)", epsilon, len(center_grid))
    return pd.DataFrame(rows, columns=["epsilon", "center", "log_negativity", "min_pt_eigenvalue"])


def two_mode_output_entanglement(
    derived: DerivedParams, center1: float, center2: float, tau: float, markovian: bool = True
) -> float:
    """
    E_N between two output modes (the mechanics is traced out).

    Raises:
        OrthogonalityError: If the centres are not separated by a multiple of 2 pi / tau
    """
    cm = output_cm(derived, make_filter_bank([center1, center2], tau), markovian)
    optical = cm.submatrix([1, 2])
    return logarithmic_negativity(optical, BipartiteSplit(side_a=[0], side_b=[1]))
