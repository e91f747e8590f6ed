# app/operations/dynamics.py
"""
Module: dynamics

Linearized fluctuation model of the cavity and the mirror, its stability, and
the stationary intracavity covariance matrix computed two independent ways.

Functions:
- build_linear_model(derived) -> LinearModel: Drift A and diffusion D (Markovian and kernel forms).
- stability(model, derived) -> StabilityReport: Routh-Hurwitz conditions cross-checked against eigenvalues.
- steady_cm_lyapunov(model) -> CovarianceMatrix: Solves A V + V A^T = -D.
- steady_cm_spectral(model, markovian) -> CovarianceMatrix: Frequency integral of M D M^dagger.
- frequency_integral(integrand, upper, points, epsrel) -> ndarray: Adaptive Gauss-Kronrod on [0, upper] plus tail.
- mechanical_eigenvalue(model) -> complex: Dressed mechanical resonance of A.

Quadrature order is (dq, dp, dX, dY) and all rates are in units of omega_m.
"""

import logging
from typing import Callable, Iterable, Optional

import numpy as np
from scipy.integrate import quad_vec

from app.core.config import settings
from app.core.exceptions import (
    InternalConsistencyError,
    LyapunovResidualError,
    QuadratureError,
    UnphysicalStateError,
    UnstableSystemError,
)
from app.models.covariance import CovarianceMatrix
from app.models.linear import MODE_LABELS, LinearModel, StabilityReport
from app.models.parameters import DerivedParams
from app.operations.gaussian import symplectic_spectrum

logger = logging.getLogger(__name__)

# Eigenvalue route: max Re(lambda) above -MARGIN * omega_m counts as unstable.
STABILITY_MARGIN = 1e-12
# Routes may disagree only this close to the stability boundary.
DEGENERACY_TOLERANCE = 1e-8
LYAPUNOV_TOLERANCE = 1e-10
PHYSICALITY_TOLERANCE = 1e-9
# Integration window in units of the largest system frequency.
WINDOW_FACTOR = 40.0


# ---------------------------------------------------------------------------
# Linear model
# ---------------------------------------------------------------------------

def build_linear_model(derived: DerivedParams) -> LinearModel:
    """
    Drift and diffusion of (dq, dp, dX, dY):

        A = [[ 0,  1,   0,   0 ],
             [-1, -g,   G,   0 ],
             [ 0,  0,  -k,   D ],
             [ G,  0,  -D,  -k ]]

    with g = gamma_m, k = kappa, D = Delta, and D = Diag[0, g(2n+1), k, k].
    The frequency-dependent form replaces the (p, p) entry by the thermal kernel.
    """
    g, k, d, G = derived.gamma_m, derived.kappa, derived.detuning, derived.G
    drift = np.array([
        [0.0, 1.0, 0.0, 0.0],
        [-1.0, -g, G, 0.0],
        [0.0, 0.0, -k, d],
        [G, 0.0, -d, -k],
    ])
    diffusion = np.diag([0.0, g * (2.0 * derived.n_bar + 1.0), k, k])
    return LinearModel(
        drift,
        diffusion,
        labels=MODE_LABELS,
        kernel_slot=1,
        gamma_m=g,
        theta=derived.theta,
    )


def characteristic_polynomial(derived: DerivedParams) -> list:
    """Coefficients [a1, a2, a3, a4] of det(lambda I - A)."""
    g, k, d, G = derived.gamma_m, derived.kappa, derived.detuning, derived.G
    k2d2 = k * k + d * d
    return [
        g + 2.0 * k,
        1.0 + k2d2 + 2.0 * k * g,
        g * k2d2 + 2.0 * k,
        k2d2 - d * G * G,
    ]


def routh_hurwitz(derived: DerivedParams):
    """The two nontrivial Routh-Hurwitz conditions s1 > 0 and s2 > 0."""
    g, k, d, G = derived.gamma_m, derived.kappa, derived.detuning, derived.G
    k2 = k * k
    s1 = (
        2.0 * g * k * (
            (k2 + (1.0 - d) ** 2) * (k2 + (1.0 + d) ** 2)
            + g * ((g + 2.0 * k) * (k2 + d * d) + 2.0 * k)
        )
        + d * G * G * (g + 2.0 * k) ** 2
    )
    s2 = (k2 + d * d) - G * G * d
    return s1, s2


def max_real_eigenvalue(drift: np.ndarray) -> float:
    return float(np.max(np.linalg.eigvals(drift).real))


def stability(model: LinearModel, derived: DerivedParams) -> StabilityReport:
    """
    Stability of the linearized dynamics by two independent routes.

    The Routh-Hurwitz conditions s1, s2 are evaluated in closed form and the
    eigenvalues of A are computed numerically. ``stable`` requires both.

    Raises:
        InternalConsistencyError: If the routes disagree away from the boundary
    """
    s1, s2 = routh_hurwitz(derived)
    eig_max = max_real_eigenvalue(model.drift)
    rh_stable = s1 > 0.0 and s2 > 0.0
    eigen_stable = eig_max < -STABILITY_MARGIN

    if rh_stable != eigen_stable:
        g, k, d, G = derived.gamma_m, derived.kappa, derived.detuning, derived.G
        s1_scale = 2.0 * g * k * (k * k + (1.0 + abs(d)) ** 2) ** 2 + abs(d) * G * G * (g + 2.0 * k) ** 2
        s2_scale = k * k + d * d + G * G * abs(d)
        near_boundary = (
            abs(eig_max) < DEGENERACY_TOLERANCE
            or abs(s1) < DEGENERACY_TOLERANCE * s1_scale
            or abs(s2) < DEGENERACY_TOLERANCE * s2_scale
        )
        if not near_boundary:
            raise InternalConsistencyError(
                f"Routh-Hurwitz (s1={s1:.6g}, s2={s2:.6g}) and eigenvalue "
                f"(max Re={eig_max:.6g}) stability verdicts disagree",
                first=rh_stable,
                second=eigen_stable,
            )
        logger.debug("marginal stability at %r, treated as unstable", derived)

    return StabilityReport(
        s1=s1,
        s2=s2,
        char_poly=characteristic_polynomial(derived),
        eig_max_real_part=eig_max,
        routh_hurwitz_stable=rh_stable,
        eigen_stable=eigen_stable,
        stable=rh_stable and eigen_stable,
    )


def _require_stable(model: LinearModel, derived: Optional[DerivedParams]) -> None:
    if derived is not None:
        report = stability(model, derived)
        if not report.stable:
            raise UnstableSystemError(
                f"linearized dynamics unstable (s1={report.s1:.4g}, s2={report.s2:.4g})",
                report=report,
            )
        return
    eig_max = max_real_eigenvalue(model.drift)
    if eig_max >= -STABILITY_MARGIN:
        raise UnstableSystemError(f"drift matrix unstable (max Re eigenvalue {eig_max:.4g})")


def physicality_tolerance(V: CovarianceMatrix, drift: Optional[np.ndarray] = None) -> float:
    """
    Rounding margin of the uncertainty check. Grows with the largest entry of V
    and, when the drift is given, with its slowest decay time 1/min|Re lambda|.
    """
    scale = max(1.0, float(np.max(np.abs(V.matrix))))
    if drift is not None:
        slowest = float(np.min(np.abs(np.linalg.eigvals(drift).real)))
        if slowest > 0.0:
            scale *= max(1.0, 1.0 / slowest)
    return PHYSICALITY_TOLERANCE * scale


def check_physical(
    V: CovarianceMatrix,
    tolerance: Optional[float] = None,
    drift: Optional[np.ndarray] = None,
) -> float:
    """
    Smallest symplectic eigenvalue of V, clamped to 1/2 when it lies within
    the tolerance below it.

    Args:
        V: Covariance matrix to check
        tolerance: Absolute margin; from ``physicality_tolerance`` if None
        drift: Drift matrix that produced V, used to scale the default margin

    Raises:
        UnphysicalStateError: If it is below 1/2 - tolerance
    """
    if tolerance is None:
        tolerance = physicality_tolerance(V, drift)
    nu_min = float(symplectic_spectrum(V)[0])
    if nu_min < 0.5 - tolerance:
        raise UnphysicalStateError(
            f"covariance matrix violates the uncertainty principle (min symplectic eigenvalue {nu_min:.6g})"
        )
    return max(nu_min, 0.5)


# ---------------------------------------------------------------------------
# Lyapunov route
# ---------------------------------------------------------------------------

def _duplication_matrix(n: int) -> np.ndarray:
    """Maps the n(n+1)/2 upper-triangle unknowns onto vec(V) (column-major)."""
    pairs = [(i, j) for j in range(n) for i in range(j + 1)]
    dup = np.zeros((n * n, len(pairs)))
    for k, (i, j) in enumerate(pairs):
        dup[i + j * n, k] = 1.0
        dup[j + i * n, k] = 1.0
    return dup


def _solve_symmetric_lyapunov(drift: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve A V + V A^T = -rhs over symmetric V as a reduced dense linear system."""
    n = drift.shape[0]
    eye = np.eye(n)
    kron = np.kron(eye, drift) + np.kron(drift, eye)
    dup = _duplication_matrix(n)
    reduced = dup.T @ kron @ dup
    vech = np.linalg.solve(reduced, -dup.T @ rhs.reshape(-1, order="F"))
    V = (dup @ vech).reshape((n, n), order="F")
    return V


def lyapunov_residual(drift: np.ndarray, V: np.ndarray, diffusion: np.ndarray) -> float:
    """||A V + V A^T + D||_F relative to ||D||_F."""
    residual = drift @ V + V @ drift.T + diffusion
    scale = np.linalg.norm(diffusion) or 1.0
    return float(np.linalg.norm(residual) / scale)


def steady_cm_lyapunov(
    model: LinearModel,
    derived: Optional[DerivedParams] = None,
    check: bool = True,
) -> CovarianceMatrix:
    """
    Stationary covariance matrix from the Lyapunov equation A V + V A^T = -D.

    The symmetric problem is vectorized into n(n+1)/2 unknowns and solved
    directly. One step of residual refinement is applied if the residual is
    above 1e-10 ||D||.

    Args:
        model: Linear model (Markovian diffusion is used)
        derived: Parameters for the Routh-Hurwitz check; eigenvalues alone if None
        check: Verify the result is a physical state

    Raises:
        UnstableSystemError: If the drift is not strictly stable
        LyapunovResidualError: If the residual stays above tolerance
    """
    _require_stable(model, derived)
    A, D = model.drift, model.diffusion
    V = _solve_symmetric_lyapunov(A, D)
    residual = lyapunov_residual(A, V, D)
    if residual > LYAPUNOV_TOLERANCE:
        logger.warning("Lyapunov residual %.3e, refining once", residual)
        correction = A @ V + V @ A.T + D
        V = V + _solve_symmetric_lyapunov(A, correction)
        residual = lyapunov_residual(A, V, D)
        if residual > LYAPUNOV_TOLERANCE:
            raise LyapunovResidualError(residual, LYAPUNOV_TOLERANCE)
    logger.debug("Lyapunov residual %.3e", residual)

    cm = CovarianceMatrix.create(V, model.labels, symmetrize=True)
    if check:
        check_physical(cm, drift=A)
    return cm


# ---------------------------------------------------------------------------
# Spectral route
# ---------------------------------------------------------------------------

def resonance_points(drift: np.ndarray, upper: float, extra: Iterable[float] = ()) -> list:
    """
    Breakpoints clustered around the resonances of A on (0, upper).

    Each eigenvalue lambda contributes Im(lambda) and Im(lambda) +- w, 10 w, 100 w
    with w = |Re(lambda)| its half width, so narrow peaks are bracketed.
    """
    points = set(float(p) for p in extra)
    for lam in np.linalg.eigvals(drift):
        centre, width = abs(lam.imag), abs(lam.real)
        points.add(centre)
        for factor in (1.0, 10.0, 100.0):
            points.add(centre - factor * width)
            points.add(centre + factor * width)
    return sorted(p for p in points if 0.0 < p < upper)


def frequency_integral(
    integrand: Callable[[float], np.ndarray],
    upper: float,
    points: Iterable[float],
    epsrel: float,
    tail: bool = True,
    label: str = "spectral integral",
    tail_integrand: Optional[Callable[[float], np.ndarray]] = None,
) -> np.ndarray:
    """
    Adaptive Gauss-Kronrod integral of a vector-valued integrand over [0, upper],
    plus the tail [upper, inf) when ``tail`` is set. The tail uses
    ``tail_integrand`` when given, the window integrand otherwise.

    The tail is integrated to an absolute accuracy set by the window integral,
    since it only has to be small next to the total.

    Raises:
        QuadratureError: If the achieved error is above the requested tolerance
            after the subinterval budget is used
    """
    points = sorted(p for p in points if 0.0 < p < upper)
    value, err, info = quad_vec(
        integrand, 0.0, upper,
        epsrel=epsrel, epsabs=1e-200, norm="max",
        limit=settings.QUAD_LIMIT, points=points or None, full_output=True,
    )
    size = float(np.max(np.abs(value))) or 1.0
    if not info.success and err > epsrel * size:
        raise QuadratureError(f"{label} did not converge", achieved_error=err / size, target=epsrel)
    logger.debug("%s: %d evaluations, error estimate %.3e", label, info.neval, err / size)
    if tail:
        value = value + tail_integral(tail_integrand or integrand, upper, 0.1 * epsrel * size, label=f"{label} tail")
    return value


def tail_integral(
    integrand: Callable[[float], np.ndarray],
    lower: float,
    epsabs: float,
    label: str = "tail integral",
) -> np.ndarray:
    """
    Integral over [lower, inf) to absolute accuracy ``epsabs``.

    Raises:
        QuadratureError: If the budget is exhausted above that accuracy
    """
    value, err, info = quad_vec(
        integrand, lower, np.inf,
        epsrel=0.0, epsabs=epsabs, norm="max",
        limit=settings.QUAD_LIMIT, full_output=True,
    )
    if not info.success and err > epsabs:
        raise QuadratureError(f"{label} did not converge", achieved_error=err, target=epsabs)
    logger.debug("%s: %d evaluations, error estimate %.3e", label, info.neval, err)
    return value


def tail_diffusion(model: LinearModel, markovian: bool) -> np.ndarray:
    """Diffusion above the integration window; the thermal bath is band-limited there unless ``markovian``."""
    D = model.diffusion.copy()
    if not markovian and model.kernel_slot is not None:
        D[model.kernel_slot, model.kernel_slot] = 0.0
    return D


def mechanical_eigenvalue(model: LinearModel) -> complex:
    """
    The slowest-decaying eigenvalue of A with Im > 0: the optically dressed
    mechanical resonance, frequency Im(lambda) and linewidth -2 Re(lambda).
    """
    eigenvalues = [lam for lam in np.linalg.eigvals(model.drift) if lam.imag > 0.0]
    return complex(max(eigenvalues, key=lambda lam: lam.real))


def integration_window(model: LinearModel) -> float:
    """W = 40 max(omega_m, largest frequency scale of A)."""
    scale = max(1.0, float(np.max(np.abs(model.drift))), float(np.max(np.abs(np.linalg.eigvals(model.drift)))))
    return WINDOW_FACTOR * scale


def steady_cm_spectral(
    model: LinearModel,
    markovian: bool = True,
    derived: Optional[DerivedParams] = None,
    epsrel: Optional[float] = None,
) -> CovarianceMatrix:
    """
    Stationary covariance matrix from its frequency representation

        V = (1/2 pi) Int dw M(w) D(w) M(w)^dagger = (1/pi) Re Int_0^inf dw M D M^dagger,

    with M(w) = (i w + A)^-1.

    With ``markovian`` the constant D is used throughout. Otherwise the thermal
    kernel is used up to the window W, which acts as the bath cutoff (the Ohmic
    momentum variance diverges logarithmically without one). Beyond W only the
    thermal entry is dropped; the optical inputs stay white out to infinity.

    A coarse pass sets a per-quadrature scale so the fine pass meets the
    relative tolerance on small and large variances alike.
    """
    _require_stable(model, derived)
    epsrel = settings.QUAD_EPSREL if epsrel is None else epsrel
    diffusion = model.diffusion_function(markovian)
    upper = integration_window(model)
    points = resonance_points(model.drift, upper, extra=(1.0,))
    n = model.dim

    beyond = tail_diffusion(model, markovian)

    def make_integrand(scale: np.ndarray, noise: Callable[[float], np.ndarray] = diffusion):
        def integrand(omega: float) -> np.ndarray:
            M = model.transfer(omega)
            S = (M @ noise(omega) @ M.conj().T).real
            return (S * scale).ravel() / np.pi
        return integrand

    def integrate(scale: np.ndarray, tolerance: float, label: str) -> np.ndarray:
        return frequency_integral(
            make_integrand(scale), upper, points, tolerance, label=label,
            tail_integrand=make_integrand(scale, lambda omega: beyond),
        ).reshape(n, n)

    ones = np.ones((n, n))
    coarse = integrate(ones, 1e-4, "spectral CM (coarse)")
    diag = np.abs(np.diag(coarse))
    diag = np.where(diag > 0.0, diag, 1.0)
    scale = 1.0 / np.sqrt(np.outer(diag, diag))

    fine = integrate(scale, epsrel, "spectral CM")
    cm = CovarianceMatrix.create(fine / scale, model.labels, symmetrize=True)
    check_physical(cm, drift=model.drift)
    return cm
