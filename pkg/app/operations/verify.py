# app/operations/verify.py
"""
Module: verify

Cross-method consistency suite: every steady state this package computes
has at least two independent routes, and this module compares them.

Functions:
- random_stable_rates(rng) -> DerivedParams: A random stable operating point.
- check_lyapunov_vs_spectral(n_draws, seed) -> VerificationCheck
- check_markovian_kernel(derived) -> VerificationCheck
- check_rwa(seed) -> list[VerificationCheck]
- check_oracle(derived, n_traj, seed, threads, scheme) -> VerificationCheck
- check_term2() -> VerificationCheck
- check_orthonormality(tau) -> VerificationCheck
- run_verification(...) -> list[VerificationCheck]
"""

import logging
import math
from typing import List, Optional

import numpy as np

from app.core.config import settings
from app.models.covariance import relative_gap
from app.models.filters import FilterBank
from app.models.linear import LinearModel
from app.models.parameters import DerivedParams
from app.operations.dynamics import build_linear_model, stability, steady_cm_lyapunov, steady_cm_spectral
from app.operations.gaussian import logarithmic_negativity, rwa_cm, rwa_drift
from app.operations.model import derive_constants
from app.operations.oracle import burn_in_time, max_step, simulate_ensemble
from app.operations.output import term2_identity
from app.schemas.params import SystemParams
from app.schemas.reports import Sideband, VerificationCheck

logger = logging.getLogger(__name__)

SPECTRAL_TOLERANCE = 1e-6
KERNEL_TOLERANCE = 1e-2
RWA_TOLERANCE = 1e-10
RWA_WORKED_EN = 9.81e-3
RWA_WORKED_TOLERANCE = 1e-4
ORACLE_SIGMAS = 3.0
TERM2_TOLERANCE = 1e-4
ORTHONORMALITY_TOLERANCE = 1e-10


def random_stable_rates(rng: np.random.Generator, max_tries: int = 1000) -> DerivedParams:
    """Draw kappa, gamma_m, Delta, G and n_bar until the linearized dynamics is stable."""
    for _ in range(max_tries):
        derived = DerivedParams.from_rates(
            kappa=float(rng.uniform(0.1, 2.0)),
            gamma_m=float(10.0 ** rng.uniform(-3.0, -1.0)),
            G=float(rng.uniform(0.0, 0.8)),
            detuning=float(rng.uniform(-2.0, 2.0)),
            n_bar=float(rng.uniform(0.0, 10.0)),
        )
        if stability(build_linear_model(derived), derived).stable:
            return derived
    raise RuntimeError("no stable operating point found")


def check_lyapunov_vs_spectral(n_draws: int = 20, seed: Optional[int] = None) -> VerificationCheck:
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    worst = 0.0
    for _ in range(n_draws):
        derived = random_stable_rates(rng)
        model = build_linear_model(derived)
        gap = relative_gap(
            steady_cm_lyapunov(model, derived).matrix, steady_cm_spectral(model, derived=derived).matrix
        )
        worst = max(worst, gap)
    return VerificationCheck(
        name="lyapunov_vs_spectral",
        passed=worst < SPECTRAL_TOLERANCE,
        achieved=worst,
        tolerance=SPECTRAL_TOLERANCE,
        detail=f"{n_draws} random stable points",
    )


def check_markovian_kernel(derived: DerivedParams) -> VerificationCheck:
    """Ohmic coth kernel vs constant thermal diffusion, relative gap of the spectral CMs."""
    model = build_linear_model(derived)
    gap = relative_gap(
        steady_cm_spectral(model, markovian=True, derived=derived).matrix,
        steady_cm_spectral(model, markovian=False, derived=derived).matrix,
    )
    return VerificationCheck(
        name="markovian_vs_ohmic", passed=gap < KERNEL_TOLERANCE, achieved=gap, tolerance=KERNEL_TOLERANCE,
        detail=f"n_bar={derived.n_bar:.4g}",
    )


def check_rwa(seed: Optional[int] = None, n_draws: int = 20) -> List[VerificationCheck]:
    """Closed-form sideband CMs against the Lyapunov solve of the same drift, plus the worked blue point."""
    rng = np.random.default_rng(settings.SEED if seed is None else seed)
    worst = 0.0
    for _ in range(n_draws):
        kappa = float(rng.uniform(0.2, 2.0))
        gamma_m = float(10.0 ** rng.uniform(-3.0, -1.0))
        n_bar = float(rng.uniform(0.0, 5.0))
        for sign in Sideband:
            limit = math.sqrt(2.0 * kappa * gamma_m) if sign is Sideband.BLUE else 1.0
            G = float(rng.uniform(0.0, 0.95)) * limit
            A, D = rwa_drift(G, kappa, gamma_m, n_bar, sign)
            numeric = steady_cm_lyapunov(LinearModel(A, D)).matrix
            worst = max(worst, relative_gap(rwa_cm(G, kappa, gamma_m, n_bar, sign).matrix, numeric))
    worked = logarithmic_negativity(rwa_cm(0.0707107, 1.0, 0.01, 0.0, Sideband.BLUE))
    return [
        VerificationCheck(
            name="rwa_closed_form", passed=worst < RWA_TOLERANCE, achieved=worst, tolerance=RWA_TOLERANCE,
            detail=f"{n_draws} draws per sideband",
        ),
        VerificationCheck(
            name="rwa_worked_point",
            passed=abs(worked - RWA_WORKED_EN) < RWA_WORKED_TOLERANCE,
            achieved=abs(worked - RWA_WORKED_EN),
            tolerance=RWA_WORKED_TOLERANCE,
            detail=f"E_N = {worked:.6g}",
        ),
    ]


def check_oracle(
    derived: DerivedParams,
    n_traj: int = 50000,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    scheme: Optional[str] = None,
) -> VerificationCheck:
    """
    Stochastic ensemble against the Lyapunov CM, as the largest |z| over the entries.

    ``scheme`` defaults to settings.ORACLE_SCHEME. ``exponential`` samples the
    exact one-step transition; ``euler`` is plain Euler-Maruyama and carries
    an O(dt) bias in the stationary covariance.
    """
    scheme = scheme or settings.ORACLE_SCHEME
    model = build_linear_model(derived)
    reference = steady_cm_lyapunov(model, derived).matrix
    dt = max_step(model)
    estimate = simulate_ensemble(
        model, dt=dt, t_end=burn_in_time(model), n_traj=n_traj, seed=seed,
        scheme=scheme, threads=threads,
    )
    worst = float(np.max(np.abs(estimate.z_scores(reference))))
    return VerificationCheck(
        name="oracle_vs_lyapunov", passed=worst <= ORACLE_SIGMAS, achieved=worst, tolerance=ORACLE_SIGMAS,
        detail=f"scheme={scheme}, {n_traj} trajectories, dt={dt:.3g}, seed={estimate.seed}",
    )


TERM2_BANKS = {
    "Stokes": ([-1.0], 10.0),
    "sidebands": ([-1.0, 1.0], 10.0 * math.pi),
    "three adjacent": ([-1.0, -0.8, -0.6], 10.0 * math.pi),
}


def check_term2() -> VerificationCheck:
    """Reflected-vacuum identity on one, two and three filters; the worst entry over all banks."""
    gaps = {}
    for name, (centers, tau) in TERM2_BANKS.items():
        numeric, expected = term2_identity(FilterBank.create(centers, tau))
        gaps[name] = float(np.max(np.abs(numeric - expected)))
    worst = max(gaps, key=gaps.get)
    return VerificationCheck(
        name="term2_identity", passed=gaps[worst] < TERM2_TOLERANCE, achieved=gaps[worst],
        tolerance=TERM2_TOLERANCE, detail=f"worst bank: {worst}",
    )


def check_orthonormality(tau: float = 10.0 * math.pi) -> VerificationCheck:
    bank = FilterBank.create([-1.0, 1.0], tau)
    first, second = bank.modes
    overlap = abs(first.overlap(second))
    norm_gap = abs(abs(first.overlap(first)) - 1.0)
    worst = max(overlap, norm_gap)
    return VerificationCheck(
        name="filter_orthonormality", passed=worst < ORTHONORMALITY_TOLERANCE, achieved=worst,
        tolerance=ORTHONORMALITY_TOLERANCE, detail=f"Stokes / anti-Stokes pair, epsilon={tau:.4g}",
    )


def run_verification(
    params: SystemParams,
    n_draws: int = 20,
    n_traj: int = 50000,
    seed: Optional[int] = None,
    threads: Optional[int] = None,
    oracle: bool = True,
    scheme: Optional[str] = None,
) -> List[VerificationCheck]:
    """Run the whole suite at the operating point ``params`` (plus random draws)."""
    derived = derive_constants(params)
    checks = [check_lyapunov_vs_spectral(n_draws, seed), check_markovian_kernel(derived)]
    checks.extend(check_rwa(seed))
    if oracle:
        checks.append(check_oracle(derived, n_traj, seed, threads, scheme))
    checks.extend([check_term2(), check_orthonormality()])
    for check in checks:
        log = logger.info if check.passed else logger.warning
        log("%s: %s (%.3e, tolerance %.1e)", check.name, "pass" if check.passed else "FAIL",
            check.achieved, check.tolerance)
    return checks
