# app/operations/oracle.py
"""
Module: oracle

Stochastic time-domain sampling of the linearized Langevin system
du = A u dt + sqrt(D) dW, used to cross-check the analytic steady states.
Its classical stationary covariance coincides with the symmetrized quantum
covariance matrix of the linear model (a moment-level equivalence).

Functions:
- max_step(model) -> float: Largest admissible step 0.05 / max(|eig A|, |A_ii|, omega_m).
- burn_in_time(model) -> float: 10 / |max Re eig A|.
- increment_factors(drift, diffusion, dt, scheme) -> (F, L): One-step propagator and noise factor.
- simulate_ensemble(model, dt, t_end, n_traj, seed) -> EnsembleEstimate.

Trajectories are processed in fixed-size batches. Batch k draws from a
Philox stream keyed by SeedSequence([seed, k]), so the estimate depends on
the seed and the batch size only, never on the number of worker processes.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import expm

from app.core.config import settings
from app.core.exceptions import InvalidParameterError, OracleDivergenceError
from app.models.covariance import CovarianceMatrix, EnsembleEstimate
from app.models.linear import LinearModel
from app.operations.dynamics import _require_stable, max_real_eigenvalue

logger = logging.getLogger(__name__)

STEP_FACTOR = 0.05
BURN_IN_FACTOR = 10.0
DIVERGENCE_NORM = 1e12
CHECK_EVERY = 100
SCHEMES = ("euler", "exponential")


def max_step(model: LinearModel) -> float:
    scale = max(
        1.0,
        float(np.max(np.abs(np.linalg.eigvals(model.drift)))),
        float(np.max(np.abs(np.diag(model.drift)))),
    )
    return STEP_FACTOR / scale


def burn_in_time(model: LinearModel) -> float:
    return BURN_IN_FACTOR / abs(max_real_eigenvalue(model.drift))


def _psd_factor(matrix: np.ndarray) -> np.ndarray:
    """L with L L^T = matrix for a positive semidefinite (possibly singular) matrix."""
    w, v = np.linalg.eigh(0.5 * (matrix + matrix.T))
    return v * np.sqrt(np.clip(w, 0.0, None))


def increment_factors(
    drift: np.ndarray, diffusion: np.ndarray, dt: float, scheme: str = "euler"
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Update u <- F u + L xi with xi standard normal.

    ``euler``: F = 1 + A dt, L L^T = D dt.
    ``exponential``: F = exp(A dt) and L L^T = Int_0^dt exp(A s) D exp(A^T s) ds,
    both from one matrix exponential of the Van Loan block matrix. Its
    stationary covariance carries no step-size bias.
    """
    n = drift.shape[0]
    if scheme == "euler":
        return np.eye(n) + drift * dt, _psd_factor(diffusion * dt)
    if scheme == "exponential":
        block = np.zeros((2 * n, 2 * n))
        block[:n, :n] = -drift
        block[:n, n:] = diffusion
        block[n:, n:] = drift.T
        E = expm(block * dt)
        F = E[n:, n:].T
        return F, _psd_factor(F @ E[:n, n:])
    raise InvalidParameterError("scheme", f"unknown scheme {scheme!r}, expected one of {SCHEMES}")


def _run_batch(job) -> Tuple[np.ndarray, np.ndarray]:
    """Integrate one batch from rest; return the sums of u_i u_j and of (u_i u_j)^2 at the final time."""
    F, L, n_steps, size, seed, index = job
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))
    n = F.shape[0]
    u = np.zeros((size, n))
    Ft, Lt = F.T, L.T
    for step in range(1, n_steps + 1):
        u = u @ Ft + rng.standard_normal((size, n)) @ Lt
        if step % CHECK_EVERY == 0 or step == n_steps:
            norm = float(np.max(np.abs(u)))
            if not math.isfinite(norm) or norm > DIVERGENCE_NORM:
                raise OracleDivergenceError(step, norm)
    products = u[:, :, None] * u[:, None, :]
    return products.sum(axis=0), (products ** 2).sum(axis=0)


def simulate_ensemble(
    model: LinearModel,
    dt: float,
    t_end: float,
    n_traj: int,
    seed: Optional[int] = None,
    scheme: str = "euler",
    threads: Optional[int] = None,
    batch_size: Optional[int] = None,
) -> EnsembleEstimate:
    """
    Empirical stationary covariance matrix from an ensemble of trajectories.

    Every trajectory starts at u = 0 and is sampled once at t_end, so the
    samples are independent and the standard error of each entry is
    std(u_i u_j) / sqrt(n_traj).

    Args:
        model: Stable linear model (its Markovian diffusion matrix is used)
        dt: Time step, at most 0.05 / max(|eig A|, |A_ii|, omega_m)
        t_end: Sampling time, at least the burn-in 10 / |max Re eig A|
        n_traj: Number of trajectories
        seed: Master seed (settings.SEED)
        scheme: ``euler`` or ``exponential`` (see increment_factors)
        threads: Worker processes (settings.THREADS)
        batch_size: Trajectories per PRNG stream (settings.ORACLE_BATCH)

    Raises:
        UnstableSystemError: If the drift matrix is not Hurwitz
        InvalidParameterError: On a step above the limit, a sampling time
            inside the burn-in, or fewer than two trajectories
        OracleDivergenceError: If a trajectory blows up
    """
    _require_stable(model, None)
    seed = settings.SEED if seed is None else seed
    threads = settings.THREADS if threads is None else threads
    batch_size = settings.ORACLE_BATCH if batch_size is None else batch_size

    limit = max_step(model)
    if not 0.0 < dt <= limit * (1.0 + 1e-12):
        raise InvalidParameterError("dt", f"step {dt:.4g} outside (0, {limit:.4g}]")
    burn_in = burn_in_time(model)
    if t_end < burn_in:
        raise InvalidParameterError("t_end", f"sampling time {t_end:.4g} is inside the burn-in {burn_in:.4g}")
    if n_traj < 2:
        raise InvalidParameterError("n_traj", "at least two trajectories are needed for a standard error")

    F, L = increment_factors(model.drift, model.diffusion, dt, scheme)
    n_steps = int(math.ceil(t_end / dt))
    sizes = [batch_size] * (n_traj // batch_size)
    if n_traj % batch_size:
        sizes.append(n_traj % batch_size)
    jobs = [(F, L, n_steps, size, seed, index) for index, size in enumerate(sizes)]
    logger.info(
        "oracle: %d trajectories in %d batches, %d steps of %.3g (%s), %d worker(s)",
        n_traj, len(jobs), n_steps, dt, scheme, threads,
    )

    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_batch, jobs))
    else:
        results = [_run_batch(job) for job in jobs]

    first = sum(r[0] for r in results)
    second = sum(r[1] for r in results)
    mean = first / n_traj
    variance = np.clip(second / n_traj - mean ** 2, 0.0, None) * n_traj / (n_traj - 1)
    std_error = np.maximum(np.sqrt(variance / n_traj), np.finfo(float).tiny)

    covariance = CovarianceMatrix.create(mean, model.labels, symmetrize=True)
    return EnsembleEstimate(covariance, std_error, n_traj=n_traj, dt=dt, burn_in=burn_in, seed=seed)
