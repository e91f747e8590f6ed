# tests/integration/test_schemas.py

import math

import pytest
from pydantic import ValidationError

from app.schemas.api import OutputCMRequest, SpectrumRequest
from app.schemas.params import SystemParams, normalize_units
from app.schemas.reports import BipartiteSplit, TripartiteReport


def test_unit_suffixes_convert_to_si(set_b_data):
    params = SystemParams.model_validate(set_b_data)
    assert params.omega_m_rad_s == pytest.approx(2.0 * math.pi * 1e7)
    assert params.mass_kg == pytest.approx(50e-12)
    assert params.length_m == pytest.approx(1e-3)
    assert params.wavelength_m == pytest.approx(810e-9)
    assert params.power_W == pytest.approx(0.03)
    assert params.detuning_rad_s == pytest.approx(params.omega_m_rad_s)
    assert not params.detuning_is_bare


def test_same_quantity_in_other_units(set_b_data):
    set_b_data.pop("omega_m_MHz")
    set_b_data.pop("mass_ng")
    set_b_data.update(omega_m_kHz=1e4, mass_pg=5e4)
    params = SystemParams.model_validate(set_b_data)
    assert params.omega_m_rad_s == pytest.approx(2.0 * math.pi * 1e7, rel=1e-14)
    assert params.mass_kg == pytest.approx(50e-12, rel=1e-14)


@pytest.mark.parametrize(
    "change, message",
    [
        ({"mass": 1e-11}, "no unit suffix"),
        ({"colour_nm": 500.0}, "unknown parameter"),
        ({"mass_kg": 5e-11}, "given more than once"),
        ({"kappa_omega_m": 0.75}, "exactly one of 'finesse' and 'kappa'"),
        ({"bare_detuning_omega_m": 1.0}, "exactly one of 'detuning' and 'bare_detuning'"),
        ({"power_mW": -1.0}, "greater than or equal to 0"),
        ({"Q": 0.5}, "greater than or equal to 1"),
    ],
    ids=[
        "bare_key", "unknown_key", "duplicate_quantity",
        "finesse_and_kappa", "detuning_and_bare", "negative_power", "low_quality_factor",
    ],
)
def test_invalid_parameters_are_rejected(set_b_data, change, message):
    set_b_data.update(change)
    with pytest.raises(ValidationError, match=message):
        SystemParams.model_validate(set_b_data)


def test_unknown_unit_is_rejected(set_b_data):
    set_b_data.pop("mass_ng")
    set_b_data["mass_lb"] = 1.0
    with pytest.raises(ValidationError, match="unknown unit 'lb' for 'mass'"):
        SystemParams.model_validate(set_b_data)


def test_relative_rates_need_omega_m():
    with pytest.raises(ValueError, match="need omega_m"):
        normalize_units({"kappa_omega_m": 0.75})


def test_params_are_immutable(set_b_params):
    with pytest.raises(ValidationError):
        set_b_params.power_W = 1.0


def test_from_toml_with_overrides(tmp_path):
    path = tmp_path / "point.toml"
    path.write_text(
        "[params]\n"
        "omega_m_MHz = 10.0\nQ = 1e5\nmass_ng = 50.0\nlength_mm = 1.0\n"
        "wavelength_nm = 810.0\nfinesse = 2e4\npower_mW = 30.0\n"
        "detuning_omega_m = 1.0\ntemperature_K = 0.4\n",
        encoding="utf-8",
    )
    params = SystemParams.from_toml(path, power_W=0.05, kappa_omega_m=0.5, bare_detuning_omega_m=1.2)
    assert params.power_W == 0.05
    assert params.finesse is None
    assert params.kappa_rad_s == pytest.approx(0.5 * params.omega_m_rad_s)
    assert params.detuning_is_bare
    assert params.detuning_rad_s is None


def test_replace_switches_detuning_kind(set_b_params):
    bare = set_b_params.replace(bare_detuning_MHz=12.0)
    assert bare.detuning_rad_s is None
    assert bare.bare_detuning_rad_s == pytest.approx(2.0 * math.pi * 12e6)
    assert set_b_params.detuning_rad_s is not None


# ---------------------------------------------
# Request and report schemas
# ---------------------------------------------

def test_spectrum_request_needs_frequencies(set_b_data):
    with pytest.raises(ValidationError):
        SpectrumRequest.model_validate({"params": set_b_data, "omega": []})
    request = SpectrumRequest.model_validate({"params": set_b_data, "omega": [-1.0, 1.0]})
    assert request.markovian
    assert request.params.mass_kg == pytest.approx(50e-12)


@pytest.mark.parametrize("epsilon", [0.0, -1.0], ids=["zero", "negative"])
def test_output_request_needs_positive_epsilon(set_b_data, epsilon):
    with pytest.raises(ValidationError):
        OutputCMRequest.model_validate({"params": set_b_data, "centers": [-1.0], "epsilon": epsilon})


def test_bipartite_split_rules():
    assert str(BipartiteSplit.one_vs_rest(1, 3)) == "1|0,2"
    with pytest.raises(ValidationError, match="disjoint"):
        BipartiteSplit(side_a=[0, 1], side_b=[1, 2])
    with pytest.raises(ValueError, match="does not cover"):
        BipartiteSplit(side_a=[0], side_b=[2]).check_covers(3)


def test_tripartite_report_lists_three_cuts():
    report = TripartiteReport(order=["a", "b", "c"], cuts={"a": -0.1, "b": -0.2, "c": 0.0}, fully_inseparable=False)
    assert report.values() == [-0.1, -0.2, 0.0]
    with pytest.raises(ValidationError):
        TripartiteReport(order=["a", "b"], cuts={"a": -0.1, "b": -0.2}, fully_inseparable=False)
