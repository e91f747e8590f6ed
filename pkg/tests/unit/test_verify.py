# tests/unit/test_verify.py

import pytest

from app.core.config import settings
from app.core.exceptions import InvalidParameterError
from app.models.parameters import DerivedParams
from app.operations.verify import TERM2_BANKS, TERM2_TOLERANCE, check_oracle, check_term2


@pytest.fixture
def damped_coupled() -> DerivedParams:
    return DerivedParams.from_rates(kappa=0.75, gamma_m=0.5, G=0.3, detuning=1.0, n_bar=2.0)


def test_term2_identity_holds_on_every_bank():
    check = check_term2()
    assert check.passed
    assert check.achieved < TERM2_TOLERANCE
    assert check.detail.split(": ", 1)[1] in TERM2_BANKS


def test_term2_banks_cover_several_filters():
    assert max(len(centers) for centers, _ in TERM2_BANKS.values()) == 3


@pytest.mark.parametrize("scheme", ["euler", "exponential"])
def test_oracle_reports_its_scheme(damped_coupled, scheme):
    check = check_oracle(damped_coupled, n_traj=2000, seed=7, threads=1, scheme=scheme)
    assert check.detail.startswith(f"scheme={scheme}, 2000 trajectories")


def test_oracle_scheme_defaults_to_settings(damped_coupled):
    check = check_oracle(damped_coupled, n_traj=2000, seed=7, threads=1)
    assert check.detail.startswith(f"scheme={settings.ORACLE_SCHEME},")


def test_unknown_oracle_scheme_is_rejected(damped_coupled):
    with pytest.raises(InvalidParameterError):
        check_oracle(damped_coupled, n_traj=2000, seed=7, threads=1, scheme="milstein")
