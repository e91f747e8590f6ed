import logging
from typing import Dict

import numpy as np
import pytest

from app.core.config import LOG_FORMAT
from app.models.parameters import DerivedParams
from app.operations.model import derive_constants
from app.schemas.params import SystemParams

# ======================================================================================
# Logging Configuration
# ======================================================================================
logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
logger = logging.getLogger(__name__)

# ======================================================================================
# Parameter Sets
# ======================================================================================
# Intracavity regime (detuning-power surface).
SET_A: Dict[str, float] = {
    "omega_m_MHz": 10.0,
    "Q": 1e5,
    "mass_ng": 10.0,
    "length_mm": 1.0,
    "wavelength_nm": 810.0,
    "finesse": 1.67e4,
    "power_mW": 50.0,
    "detuning_omega_m": 1.0,
    "temperature_K": 0.4,
}

# Output-mode regime.
SET_B: Dict[str, float] = {
    "omega_m_MHz": 10.0,
    "Q": 1e5,
    "mass_ng": 50.0,
    "length_mm": 1.0,
    "wavelength_nm": 810.0,
    "finesse": 2e4,
    "power_mW": 30.0,
    "detuning_omega_m": 1.0,
    "temperature_K": 0.4,
}


# ======================================================================================
# Helper Functions
# ======================================================================================
def two_mode_squeezed(r: float) -> np.ndarray:
    """Covariance matrix of a two-mode squeezed vacuum (vacuum variance 1/2)."""
    c, s = np.cosh(2.0 * r), np.sinh(2.0 * r)
    Z = np.diag([1.0, -1.0])
    return 0.5 * np.block([[c * np.eye(2), s * Z], [s * Z, c * np.eye(2)]])


# ======================================================================================
# Parameter Fixtures
# ======================================================================================
@pytest.fixture
def set_a_data() -> Dict[str, float]:
    return dict(SET_A)


@pytest.fixture
def set_b_data() -> Dict[str, float]:
    return dict(SET_B)


@pytest.fixture(scope="session")
def set_a_params() -> SystemParams:
    return SystemParams.model_validate(SET_A)


@pytest.fixture(scope="session")
def set_b_params() -> SystemParams:
    return SystemParams.model_validate(SET_B)


@pytest.fixture(scope="session")
def set_a(set_a_params) -> DerivedParams:
    return derive_constants(set_a_params)


@pytest.fixture(scope="session")
def set_b(set_b_params) -> DerivedParams:
    derived = derive_constants(set_b_params)
    logger.info("set B: %r", derived)
    return derived


@pytest.fixture
def decoupled() -> DerivedParams:
    """No optomechanical coupling: thermal mechanics next to an empty cavity."""
    return DerivedParams.from_rates(kappa=0.75, gamma_m=0.01, G=0.0, detuning=1.0, n_bar=2.0)


@pytest.fixture
def red_rates() -> DerivedParams:
    """Weak coupling on the red sideband, set-B linewidth."""
    return DerivedParams.from_rates(kappa=0.75, gamma_m=1e-5, G=0.1, detuning=1.0, n_bar=833.0)


# ======================================================================================
# Pytest Command-Line Options
# ======================================================================================
def pytest_addoption(parser):
    """
    Add custom command line options:
      --run-slow    : Run tests marked as 'slow'
    """
    parser.addoption("--run-slow", action="store_true", help="Run tests marked as slow")


def pytest_collection_modifyitems(config, items):
    """
    Skip tests marked as 'slow' unless --run-slow is specified.
    """
    if not config.getoption("--run-slow"):
        skip_slow = pytest.mark.skip(reason="use --run-slow to run")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)
