# tests/unit/test_model.py

import math

import pytest
from hypothesis import given, settings as hsettings, strategies as st

from app.core.exceptions import InvalidParameterError
from app.operations.model import (
    bose_occupation,
    classical_steady_state,
    derive_constants,
    solve_steady_cubic,
)
from app.schemas.params import SystemParams

TWO_PI_10MHZ = 2.0 * math.pi * 1e7


# ---------------------------------------------
# Derived constants of the two reference sets
# ---------------------------------------------

@pytest.mark.parametrize(
    "fixture, quantity, expected, rel",
    [
        ("set_a", "G0_si", 950.0, 0.01),
        ("set_a", "kappa", 0.90, 0.01),
        ("set_b", "G0_si", 430.0, 0.02),
        ("set_b", "kappa", 0.75, 0.01),
        ("set_b", "G", 0.41, 0.02),
    ],
    ids=["set_a_G0", "set_a_kappa", "set_b_G0", "set_b_kappa", "set_b_G"],
)
def test_reference_constants(request, fixture, quantity, expected, rel):
    derived = request.getfixturevalue(fixture)
    value = getattr(derived, quantity)
    assert value == pytest.approx(expected, rel=rel), f"{quantity} = {value}"


def test_thermal_occupancy_at_0_4_K(set_a):
    assert set_a.n_bar == pytest.approx(833.0, abs=1.0)


def test_coupling_relation(set_b):
    assert set_b.G == pytest.approx(math.sqrt(2.0) * set_b.G0 * set_b.alpha_s, rel=1e-14)
    assert set_b.omega_m == 1.0
    assert set_b.omega_m_si == pytest.approx(TWO_PI_10MHZ)


def test_bare_detuning_back_computed(set_b):
    """Delta0 = Delta + G0^2 alpha_s^2 and q_s = G0 alpha_s^2."""
    assert set_b.bare_detuning == pytest.approx(set_b.detuning + set_b.G0 ** 2 * set_b.alpha_s_sq, rel=1e-14)
    assert set_b.q_s == pytest.approx(set_b.G0 * set_b.alpha_s_sq, rel=1e-14)


def test_doubling_power_scales_intensity_and_coupling(set_b_params, set_b):
    doubled = derive_constants(set_b_params.replace(power_mW=60.0))
    assert doubled.alpha_s_sq == pytest.approx(2.0 * set_b.alpha_s_sq, rel=1e-12)
    assert doubled.G == pytest.approx(math.sqrt(2.0) * set_b.G, rel=1e-12)
    assert doubled.detuning == pytest.approx(set_b.detuning, rel=1e-14)


def test_kappa_given_directly(set_b_params, set_b):
    direct = derive_constants(set_b_params.replace(kappa_omega_m=set_b.kappa))
    assert direct.kappa == pytest.approx(set_b.kappa, rel=1e-14)
    assert direct.G == pytest.approx(set_b.G, rel=1e-12)


# ---------------------------------------------
# Bose occupancy
# ---------------------------------------------

def test_bose_occupation_vanishes_at_zero_temperature():
    assert bose_occupation(TWO_PI_10MHZ, 0.0) == 0.0
    assert bose_occupation(TWO_PI_10MHZ, 1e-9) == 0.0


@given(st.floats(min_value=1e-4, max_value=100.0), st.floats(min_value=1.0001, max_value=10.0))
@hsettings(max_examples=50, deadline=None)
def test_bose_occupation_monotone_in_temperature(temperature, factor):
    assert bose_occupation(TWO_PI_10MHZ, temperature * factor) >= bose_occupation(TWO_PI_10MHZ, temperature)


# ---------------------------------------------
# Classical steady state
# ---------------------------------------------

def test_undriven_cavity_has_single_empty_branch(set_b_data):
    set_b_data.pop("detuning_omega_m")
    set_b_data.pop("power_mW")
    set_b_data.update(power_W=0.0, bare_detuning_omega_m=1.0)
    branches = classical_steady_state(SystemParams.model_validate(set_b_data))
    assert len(branches) == 1
    assert branches[0].alpha_s_sq == 0.0
    assert branches[0].effective_detuning == pytest.approx(1.0, rel=1e-14)
    assert branches[0].stable


def test_no_back_action_single_root():
    roots = solve_steady_cubic(kappa=0.75, G0=0.0, E_drive=3.0, bare_detuning=1.0)
    assert roots == [pytest.approx(9.0 / (0.75 ** 2 + 1.0), rel=1e-15)]


def test_branch_round_trip(set_b_params, set_b):
    """Solving from the back-computed Delta0 recovers the operating branch Delta = omega_m."""
    params = set_b_params.replace(bare_detuning_omega_m=set_b.bare_detuning)
    branches = classical_steady_state(params)
    assert [b.alpha_s_sq for b in branches] == sorted(b.alpha_s_sq for b in branches)
    detunings = [b.effective_detuning for b in branches]
    assert min(abs(d - 1.0) for d in detunings) < 1e-10
    chosen = derive_constants(params)
    assert chosen.detuning == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize(
    "bare_detuning",
    [0.5, 1.0, 2.0, 5.0],
    ids=["half", "one", "two", "five"],
)
def test_branches_satisfy_both_relations(set_b_params, bare_detuning):
    params = set_b_params.replace(bare_detuning_omega_m=bare_detuning, power_mW=300.0)
    derived = derive_constants(params)
    for branch in classical_steady_state(params):
        # Delta = Delta0 - G0^2 |alpha_s|^2
        assert branch.effective_detuning == pytest.approx(
            bare_detuning - derived.G0 ** 2 * branch.alpha_s_sq, rel=1e-10, abs=1e-12
        )
        # |alpha_s|^2 (kappa^2 + Delta^2) = |E|^2
        lhs = branch.alpha_s_sq * (derived.kappa ** 2 + branch.effective_detuning ** 2)
        assert lhs == pytest.approx(derived.E_drive ** 2, rel=1e-10)


def test_classical_steady_state_needs_bare_detuning(set_b_params):
    with pytest.raises(InvalidParameterError) as exc_info:
        classical_steady_state(set_b_params)
    assert exc_info.value.field == "bare_detuning"
