# tests/unit/test_output.py

import math

import numpy as np
import pytest

from app.core.exceptions import OrthogonalityError, UnstableSystemError
from app.models.covariance import relative_gap
from app.models.filters import FilterMode
from app.models.parameters import DerivedParams
from app.operations.dynamics import build_linear_model, mechanical_eigenvalue, steady_cm_lyapunov
from app.operations.gaussian import cooling_rates
from app.operations.output import (
    make_filter_bank,
    output_cm,
    output_spectrum,
    term2_identity,
    two_mode_output_entanglement,
)

TEN_PI = 10.0 * math.pi


# ---------------------------------------------
# Filter modes
# ---------------------------------------------

@pytest.mark.parametrize("tau", [1.0, 10.0, TEN_PI], ids=["tau_1", "tau_10", "tau_10pi"])
def test_filter_mode_is_normalized(tau):
    mode = FilterMode(center=-1.0, tau=tau)
    assert abs(mode.overlap(mode) - 1.0) < 1e-12


def test_filters_separated_by_a_full_period_are_orthogonal():
    tau = 10.0
    first = FilterMode(center=0.0, tau=tau)
    second = FilterMode(center=2.0 * math.pi / tau, tau=tau)
    assert abs(first.overlap(second)) < 1e-10


def test_transfer_peaks_at_the_centre():
    mode = FilterMode(center=-1.0, tau=10.0)
    assert abs(mode.transfer(-1.0)) == pytest.approx(math.sqrt(10.0), rel=1e-14)
    assert abs(mode.transfer(-1.0 + 2.0 * math.pi / 10.0)) < 1e-12


def test_sideband_pair_is_orthogonal_for_multiples_of_pi():
    bank = make_filter_bank([-1.0, 1.0], TEN_PI)
    assert bank.centers == [-1.0, 1.0]
    assert len(bank) == 2


def test_non_orthogonal_centres_name_the_pair():
    with pytest.raises(OrthogonalityError) as exc_info:
        make_filter_bank([-1.0, 1.0, 0.5], TEN_PI)
    assert exc_info.value.pair == (0, 2)


def test_sidebands_need_epsilon_multiple_of_pi():
    with pytest.raises(OrthogonalityError) as exc_info:
        make_filter_bank([-1.0, 1.0], 10.0)
    assert exc_info.value.pair == (0, 1)


# ---------------------------------------------
# Output covariance matrix
# ---------------------------------------------

def test_zero_coupling_output_is_thermal_plus_vacuum(decoupled):
    cm = output_cm(decoupled, make_filter_bank([-1.0], 10.0))
    np.testing.assert_allclose(cm.matrix, np.diag([2.5, 2.5, 0.5, 0.5]), rtol=1e-5, atol=1e-5)
    assert cm.labels == ("mech", "out1")


def test_mechanical_block_matches_intracavity(set_b):
    """The filters read the cavity without acting back, so the mirror state is unchanged."""
    cm = output_cm(set_b, make_filter_bank([-1.0], 10.0))
    intracavity = steady_cm_lyapunov(build_linear_model(set_b), set_b)
    assert relative_gap(intracavity.block(0, 0), cm.block(0, 0)) < 1e-5


def test_output_cm_is_symmetric_and_physical(set_b):
    cm = output_cm(set_b, make_filter_bank([-1.0, 1.0], TEN_PI))
    assert cm.labels == ("mech", "out1", "out2")
    np.testing.assert_array_equal(cm.matrix, cm.matrix.T)


def test_unstable_point_is_rejected():
    derived = DerivedParams.from_rates(kappa=0.75, gamma_m=1e-3, G=1.3, detuning=1.0)
    with pytest.raises(UnstableSystemError):
        output_cm(derived, make_filter_bank([-1.0], 10.0))


@pytest.mark.parametrize(
    "centers, tau",
    [([-1.0], 10.0), ([-1.0, 1.0], TEN_PI), ([-1.0, -0.8, -0.6], TEN_PI)],
    ids=["single", "sidebands", "three_adjacent"],
)
def test_reflected_vacuum_integrates_to_half(centers, tau):
    numeric, expected = term2_identity(make_filter_bank(centers, tau), epsrel=1e-8)
    assert np.max(np.abs(numeric - expected)) < 1e-4


@pytest.mark.parametrize(
    "centers",
    [[-1.0, 1.0], [-1.0, -0.8, -0.6]],
    ids=["sidebands", "three_adjacent"],
)
def test_reflected_vacuum_has_no_cross_filter_term(centers):
    numeric, _ = term2_identity(make_filter_bank(centers, TEN_PI), epsrel=1e-8)
    optical = numeric[2:, 2:]
    cross = optical - np.kron(np.eye(len(centers)), np.ones((2, 2))) * optical
    assert np.max(np.abs(cross)) < 2e-5


# ---------------------------------------------
# Output spectrum
# ---------------------------------------------

def test_spectrum_vanishes_without_coupling(decoupled):
    values = [s for _, s in output_spectrum(decoupled, np.linspace(-3.0, 3.0, 61))]
    assert max(abs(v) for v in values) < 1e-12


def test_spectrum_has_two_sideband_peaks(set_b):
    grid = np.round(np.arange(-2.0, 2.0 + 1e-9, 0.01), 10)
    spectrum = np.array([s for _, s in output_spectrum(set_b, grid)])
    assert np.all(spectrum >= -1e-9)

    inner = spectrum[1:-1]
    peaks = np.where((inner > spectrum[:-2]) & (inner > spectrum[2:]))[0] + 1
    assert len(peaks) == 2, grid[peaks]
    stokes, antistokes = sorted(grid[peaks])
    # the optical spring pulls the sidebands in from omega_m
    dressed = mechanical_eigenvalue(build_linear_model(set_b)).imag
    assert dressed == pytest.approx(0.98, abs=0.005)
    assert stokes == pytest.approx(-dressed, abs=0.01)
    assert antistokes == pytest.approx(dressed, abs=0.01)


def test_stokes_linewidth_matches_cooling_rate(set_b):
    grid = np.linspace(-1.4, -0.6, 4001)
    spectrum = np.array([s for _, s in output_spectrum(set_b, grid)])
    top = int(np.argmax(spectrum))
    half = 0.5 * spectrum[top]
    # the spectrum rises on the left flank and falls on the right one
    left = np.interp(half, spectrum[: top + 1], grid[: top + 1])
    right = np.interp(-half, -spectrum[top:], grid[top:])
    rates = cooling_rates(set_b.G, set_b.kappa, set_b.detuning)
    assert right - left == pytest.approx(set_b.gamma_m + rates.Gamma, rel=0.3)


# ---------------------------------------------
# Output-mode entanglement
# ---------------------------------------------

def test_uncoupled_output_modes_are_separable(decoupled):
    assert two_mode_output_entanglement(decoupled, -1.0, 1.0, TEN_PI) < 1e-6


def test_two_mode_output_rejects_overlapping_filters(set_b):
    with pytest.raises(OrthogonalityError):
        two_mode_output_entanglement(set_b, -1.0, 1.0, 10.0)
