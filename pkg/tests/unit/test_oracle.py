# tests/unit/test_oracle.py

import math
import pickle

import numpy as np
import pytest

from app.core.exceptions import InvalidParameterError, OracleDivergenceError, UnstableSystemError
from app.models.linear import LinearModel
from app.models.parameters import DerivedParams
from app.operations.dynamics import build_linear_model, steady_cm_lyapunov
from app.operations.oracle import (
    _run_batch,
    burn_in_time,
    increment_factors,
    max_step,
    simulate_ensemble,
)


@pytest.fixture
def toy() -> LinearModel:
    """Two independent relaxing coordinates with stationary variance 1/2."""
    return LinearModel.create(-np.eye(2), np.eye(2))


@pytest.fixture
def damped_coupled() -> DerivedParams:
    """Strongly damped mirror so that the burn-in stays short."""
    return DerivedParams.from_rates(kappa=0.75, gamma_m=0.5, G=0.3, detuning=1.0, n_bar=2.0)


# ---------------------------------------------
# Step size, burn-in and propagators
# ---------------------------------------------

def test_step_and_burn_in_of_toy(toy):
    assert max_step(toy) == pytest.approx(0.05)
    assert burn_in_time(toy) == pytest.approx(10.0)


def test_exponential_factors_are_exact(toy):
    dt = 0.05
    F, L = increment_factors(toy.drift, toy.diffusion, dt, "exponential")
    np.testing.assert_allclose(F, math.exp(-dt) * np.eye(2), rtol=1e-12)
    np.testing.assert_allclose(L @ L.T, 0.5 * (1.0 - math.exp(-2.0 * dt)) * np.eye(2), rtol=1e-10)


def test_euler_factors(toy):
    F, L = increment_factors(toy.drift, toy.diffusion, 0.01, "euler")
    np.testing.assert_allclose(F, 0.99 * np.eye(2))
    np.testing.assert_allclose(L @ L.T, 0.01 * np.eye(2))


def test_singular_diffusion_has_a_factor(damped_coupled):
    """The mechanical position receives no noise; its factor row must vanish."""
    model = build_linear_model(damped_coupled)
    _, L = increment_factors(model.drift, model.diffusion, 0.01, "euler")
    np.testing.assert_allclose(L @ L.T, 0.01 * model.diffusion, atol=1e-14)


# ---------------------------------------------
# Ensemble estimates
# ---------------------------------------------

def test_toy_ensemble_relaxes_to_half(toy):
    estimate = simulate_ensemble(toy, dt=0.05, t_end=12.0, n_traj=4000, seed=7, scheme="exponential")
    assert estimate.agrees_with(0.5 * np.eye(2), n_sigma=4.0), estimate.z_scores(0.5 * np.eye(2))
    assert estimate.n_traj == 4000
    assert estimate.burn_in == pytest.approx(10.0)


def test_toy_ensemble_with_small_euler_steps(toy):
    estimate = simulate_ensemble(toy, dt=0.002, t_end=10.0, n_traj=4000, seed=11, scheme="euler")
    assert estimate.agrees_with(0.5 * np.eye(2), n_sigma=4.0), estimate.z_scores(0.5 * np.eye(2))


def test_coupled_ensemble_matches_lyapunov(damped_coupled):
    model = build_linear_model(damped_coupled)
    reference = steady_cm_lyapunov(model, damped_coupled).matrix
    t_end = burn_in_time(model)
    estimate = simulate_ensemble(model, dt=max_step(model), t_end=t_end, n_traj=3000, seed=3, scheme="exponential")
    assert estimate.agrees_with(reference, n_sigma=4.0), estimate.z_scores(reference)
    assert estimate.covariance.labels == ("mech", "cav")


def test_same_seed_reproduces_estimate(toy):
    first = simulate_ensemble(toy, dt=0.05, t_end=10.0, n_traj=500, seed=42, scheme="exponential", batch_size=100)
    second = simulate_ensemble(toy, dt=0.05, t_end=10.0, n_traj=500, seed=42, scheme="exponential", batch_size=100)
    other = simulate_ensemble(toy, dt=0.05, t_end=10.0, n_traj=500, seed=43, scheme="exponential", batch_size=100)
    np.testing.assert_array_equal(first.matrix, second.matrix)
    assert not np.array_equal(first.matrix, other.matrix)


def test_estimate_does_not_depend_on_worker_count(toy):
    kwargs = dict(dt=0.05, t_end=10.0, n_traj=450, seed=5, scheme="exponential", batch_size=100)
    serial = simulate_ensemble(toy, threads=1, **kwargs)
    parallel = simulate_ensemble(toy, threads=2, **kwargs)
    np.testing.assert_array_equal(serial.matrix, parallel.matrix)
    np.testing.assert_array_equal(serial.std_error, parallel.std_error)


# ---------------------------------------------
# Input validation and failures
# ---------------------------------------------

@pytest.mark.parametrize(
    "overrides, field",
    [
        ({"dt": 0.1}, "dt"),
        ({"dt": 0.0}, "dt"),
        ({"t_end": 5.0}, "t_end"),
        ({"n_traj": 1}, "n_traj"),
        ({"scheme": "milstein"}, "scheme"),
    ],
    ids=["step_too_large", "zero_step", "inside_burn_in", "single_trajectory", "unknown_scheme"],
)
def test_invalid_arguments_name_the_field(toy, overrides, field):
    kwargs = dict(dt=0.05, t_end=10.0, n_traj=10, seed=0, scheme="euler")
    kwargs.update(overrides)
    with pytest.raises(InvalidParameterError) as exc_info:
        simulate_ensemble(toy, **kwargs)
    assert exc_info.value.field == field


def test_unstable_model_is_rejected():
    with pytest.raises(UnstableSystemError):
        simulate_ensemble(LinearModel.create(np.eye(2), np.eye(2)), dt=0.01, t_end=10.0, n_traj=10, seed=0)


def test_growing_trajectories_raise_divergence():
    job = (2.0 * np.eye(2), np.eye(2), 500, 3, 0, 0)
    with pytest.raises(OracleDivergenceError) as exc_info:
        _run_batch(job)
    assert exc_info.value.step == 100
    assert exc_info.value.norm > 1e12


def test_divergence_error_survives_pickling():
    restored = pickle.loads(pickle.dumps(OracleDivergenceError(200, 3e14)))
    assert isinstance(restored, OracleDivergenceError)
    assert (restored.step, restored.norm) == (200, 3e14)
