# app/operations/model.py
"""
Module: model

Derived constants and the classical steady state of the driven cavity.

Functions:
- bose_occupation(omega, temperature) -> float: Mean thermal phonon number.
- derive_constants(params) -> DerivedParams: All rates and couplings, normalized by omega_m.
- solve_steady_cubic(kappa, G0, E_drive, bare_detuning) -> list[float]: Real roots |alpha_s|^2.
- classical_steady_state(params) -> list[SteadyBranch]: Every classical fixed point with its stability.
- steady_summary(params) -> dict: Derived constants, stability, intracavity state and cooling.

Conventions:
- Cavity linewidth from finesse: kappa = pi c / (L F). This is twice the
  common half-linewidth convention kappa = pi c / (2 L F).
- G0 = (omega_0 / L) sqrt(hbar / (m omega_m)), with omega_c ~ omega_0 in prefactors.
- |E| = sqrt(2 P kappa / (hbar omega_0)), alpha_s real and nonnegative.
- Delta = Delta0 - G0^2 |alpha_s|^2 / omega_m and G = sqrt(2) G0 alpha_s.
"""

import logging
import math
from typing import Any, Dict, List

import numpy as np
from scipy import constants

from app.core.exceptions import InvalidParameterError
from app.models.parameters import DerivedParams, SteadyBranch
from app.operations.dynamics import build_linear_model, stability, steady_cm_lyapunov
from app.operations.gaussian import cooling_rates, effective_occupancy, entanglement_report
from app.schemas.params import SystemParams

logger = logging.getLogger(__name__)

# Roots with |Im| below this fraction of the root scale are taken as real.
IMAG_TOLERANCE = 1e-9


def bose_occupation(omega: float, temperature: float) -> float:
    """
    Mean thermal excitation number 1 / (exp(hbar omega / k_B T) - 1).

    Returns 0 at T = 0 and whenever the exponent would overflow.
    """
    if temperature <= 0.0:
        return 0.0
    x = constants.hbar * omega / (constants.k * temperature)
    if x > 700.0:
        return 0.0
    return 1.0 / math.expm1(x)


def thermal_ratio(omega: float, temperature: float) -> float:
    """k_B T / (hbar omega)."""
    return constants.k * temperature / (constants.hbar * omega)


def cavity_decay_rate(params: SystemParams) -> float:
    """kappa in rad/s, from the finesse (kappa = pi c / L F) or taken as given."""
    if params.kappa_rad_s is not None:
        return params.kappa_rad_s
    return math.pi * constants.c / (params.length_m * params.finesse)


def solve_steady_cubic(kappa: float, G0: float, E_drive: float, bare_detuning: float) -> List[float]:
    """
    Real nonnegative solutions |alpha_s|^2 of |alpha_s|^2 (kappa^2 + Delta^2) = |E|^2,
    with Delta = Delta0 - G0^2 |alpha_s|^2 (all quantities normalized by omega_m).

    In y = G0^2 |alpha_s|^2 the condition is the cubic
        y^3 - 2 Delta0 y^2 + (kappa^2 + Delta0^2) y - G0^2 |E|^2 = 0,
    solved from its companion matrix and polished by Newton steps.

    Returns:
        list[float]: Ascending |alpha_s|^2 values (at least one)
    """
    E_sq = E_drive * E_drive
    if E_sq == 0.0:
        return [0.0]
    beta = G0 * G0
    if beta == 0.0:
        return [E_sq / (kappa * kappa + bare_detuning * bare_detuning)]

    c2 = -2.0 * bare_detuning
    c1 = kappa * kappa + bare_detuning * bare_detuning
    c0 = -beta * E_sq
    roots = np.roots([1.0, c2, c1, c0])
    scale = max(1.0, float(np.max(np.abs(roots))))

    def cubic(y):
        return ((y + c2) * y + c1) * y + c0

    def slope(y):
        return (3.0 * y + 2.0 * c2) * y + c1

    real = []
    for root in roots:
        if abs(root.imag) >= IMAG_TOLERANCE * scale:
            continue
        y = max(float(root.real), 0.0)
        for _ in range(4):
            d = slope(y)
            if d == 0.0:
                break
            step = cubic(y) / d
            y = max(y - step, 0.0)
            if abs(step) <= 1e-16 * max(y, 1e-300):
                break
        real.append(y)

    real.sort()
    unique: List[float] = []
    for y in real:
        if not unique or abs(y - unique[-1]) > IMAG_TOLERANCE * scale:
            unique.append(y)
    return [y / beta for y in unique]


def _steady_params(
    base: dict, alpha_sq: float, detuning: float, bare_detuning: float
) -> DerivedParams:
    alpha_s = math.sqrt(alpha_sq)
    return DerivedParams(
        **base,
        detuning=detuning,
        bare_detuning=bare_detuning,
        alpha_s=alpha_s,
        G=math.sqrt(2.0) * base["G0"] * alpha_s,
        q_s=base["G0"] * alpha_sq,
    )


def _base_rates(params: SystemParams) -> dict:
    omega_m = params.omega_m_rad_s
    kappa = cavity_decay_rate(params)
    omega_0 = 2.0 * math.pi * constants.c / params.wavelength_m
    G0 = (omega_0 / params.length_m) * math.sqrt(constants.hbar / (params.mass_kg * omega_m))
    E_drive = math.sqrt(2.0 * params.power_W * kappa / (constants.hbar * omega_0))
    return {
        "omega_m_si": omega_m,
        "kappa": kappa / omega_m,
        "gamma_m": 1.0 / params.Q,
        "G0": G0 / omega_m,
        "E_drive": E_drive / omega_m,
        "n_bar": bose_occupation(omega_m, params.temperature_K),
        "theta": thermal_ratio(omega_m, params.temperature_K),
    }


def _branches(base: dict, bare_detuning: float) -> List[SteadyBranch]:
    branches = []
    for alpha_sq in solve_steady_cubic(base["kappa"], base["G0"], base["E_drive"], bare_detuning):
        detuning = bare_detuning - base["G0"] ** 2 * alpha_sq
        derived = _steady_params(base, alpha_sq, detuning, bare_detuning)
        report = stability(build_linear_model(derived), derived)
        branches.append(
            SteadyBranch(alpha_s_sq=alpha_sq, effective_detuning=detuning, stable=report.stable)
        )
    return branches


def classical_steady_state(params: SystemParams) -> List[SteadyBranch]:
    """
    All classical fixed points for a given bare detuning Delta0.

    Args:
        params: System parameters with ``bare_detuning_rad_s`` set

    Returns:
        list[SteadyBranch]: Branches sorted by |alpha_s|^2, each with its
            effective detuning and linear stability

    Raises:
        InvalidParameterError: If the effective detuning was given instead of Delta0
    """
    if not params.detuning_is_bare:
        raise InvalidParameterError(
            "bare_detuning", "classical steady state needs the bare detuning Delta0"
        )
    base = _base_rates(params)
    branches = _branches(base, params.bare_detuning_rad_s / params.omega_m_rad_s)
    logger.debug("steady state: %d branch(es) %s", len(branches), branches)
    return branches


def derive_constants(params: SystemParams) -> DerivedParams:
    """
    Derive every rate of the linearized model from physical parameters.

    With the effective detuning given, alpha_s follows in closed form and the
    bare detuning Delta0 is back-computed. With Delta0 given, the classical
    steady state is solved and the stable branch with the smallest
    |alpha_s|^2 is used (the smallest branch if none is stable).

    Returns:
        DerivedParams: Rates normalized by omega_m
    """
    base = _base_rates(params)
    if params.detuning_is_bare:
        bare = params.bare_detuning_rad_s / params.omega_m_rad_s
        branches = _branches(base, bare)
        stable = [b for b in branches if b.stable]
        chosen = (stable or branches)[0]
        if len(branches) > 1:
            logger.info(
                "bistable steady state: %d branches, using |alpha_s|^2=%.6g (stable=%s)",
                len(branches), chosen.alpha_s_sq, chosen.stable,
            )
        return _steady_params(base, chosen.alpha_s_sq, chosen.effective_detuning, bare)

    detuning = params.detuning_rad_s / params.omega_m_rad_s
    alpha_sq = base["E_drive"] ** 2 / (base["kappa"] ** 2 + detuning ** 2)
    bare = detuning + base["G0"] ** 2 * alpha_sq
    return _steady_params(base, alpha_sq, detuning, bare)


def steady_summary(params: SystemParams) -> Dict[str, Any]:
    """
    Everything known about one operating point, as JSON-ready data: derived
    constants, stability, and (when stable) the intracavity covariance
    matrix with its entanglement and cooling analysis.
    """
    derived = derive_constants(params)
    model = build_linear_model(derived)
    report = stability(model, derived)
    summary: Dict[str, Any] = {
        "derived": derived.summary(),
        "stability": report.model_dump(),
        "covariance": None,
        "entanglement": None,
        "n_eff": None,
        "cooling": None,
    }
    if not report.stable:
        logger.warning("operating point unstable: s1=%.4g, s2=%.4g", report.s1, report.s2)
        return summary
    V = steady_cm_lyapunov(model, derived)
    n_eff = effective_occupancy(V)
    summary.update(
        covariance=V.to_dict(),
        entanglement=entanglement_report(V).model_dump(),
        n_eff=n_eff,
        cooling=cooling_rates(
            derived.G, derived.kappa, derived.detuning,
            gamma_m=derived.gamma_m, n_bar=derived.n_bar, n_eff_exact=n_eff,
        ).model_dump(),
    )
    return summary
