"""
Integration tests for the FastAPI application in app/main.py.

Requests go through the TestClient, so routing, request validation (422),
domain errors (400) and JSON serialization are all exercised.
"""

import pytest
from fastapi.testclient import TestClient

from app.main import app
from tests.conftest import SET_B


# ------------------------------------------------------------------------------
# Fixtures
# ------------------------------------------------------------------------------

@pytest.fixture
def client():
    """Create a test client for the FastAPI app."""
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture
def params():
    return dict(SET_B)


# ------------------------------------------------------------------------------
# Health and steady state
# ------------------------------------------------------------------------------

def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


def test_steady_set_b(client, params):
    response = client.post("/steady", json=params)
    assert response.status_code == 200
    body = response.json()
    assert body["derived"]["G"] == pytest.approx(0.41, rel=0.02)
    assert body["stability"]["stable"] is True
    assert len(body["covariance"]["matrix"]) == 4
    assert body["entanglement"]["convention"] == "vacuum_variance=1/2"
    assert body["cooling"]["Gamma"] > 0.0


def test_steady_unstable_point_has_no_covariance(client, params):
    params["detuning_omega_m"] = -1.0
    response = client.post("/steady", json=params)
    assert response.status_code == 200
    body = response.json()
    assert body["stability"]["stable"] is False
    assert body["covariance"] is None


@pytest.mark.parametrize(
    "change",
    [{"mass": 5e-11}, {"power_mW": -1.0}, {"finesse": None}],
    ids=["bare_key", "negative_power", "no_linewidth"],
)
def test_steady_rejects_invalid_parameters(client, params, change):
    params.update(change)
    response = client.post("/steady", json=params)
    assert response.status_code == 422


# ------------------------------------------------------------------------------
# Output field
# ------------------------------------------------------------------------------

def test_spectrum(client, params):
    response = client.post("/spectrum", json={"params": params, "omega": [-1.0, 0.0, 1.0]})
    assert response.status_code == 200
    spectrum = response.json()["spectrum"]
    assert [point[0] for point in spectrum] == [-1.0, 0.0, 1.0]
    assert spectrum[0][1] > spectrum[1][1]


def test_spectrum_needs_frequencies(client, params):
    response = client.post("/spectrum", json={"params": params, "omega": []})
    assert response.status_code == 422


def test_output_cm(client, params):
    response = client.post("/output-cm", json={"params": params, "centers": [-1.0], "epsilon": 10.0})
    assert response.status_code == 200
    body = response.json()
    assert body["covariance"]["labels"] == ["mech", "out1"]
    split = body["entanglement"]["splits"][0]
    assert split["split"] == "mech|out1"
    assert split["log_negativity"] > 0.0


def test_output_cm_rejects_overlapping_filters(client, params):
    response = client.post("/output-cm", json={"params": params, "centers": [-1.0, 1.0], "epsilon": 10.0})
    assert response.status_code == 400
    assert "filter modes 0 and 1" in response.json()["detail"]


def test_output_cm_rejects_unstable_point(client, params):
    params["detuning_omega_m"] = -1.0
    response = client.post("/output-cm", json={"params": params, "centers": [-1.0], "epsilon": 10.0})
    assert response.status_code == 400
    assert "unstable" in response.json()["detail"]


def test_tripartite(client, params):
    response = client.post("/tripartite", json={"params": params, "epsilon": 3.141592653589793})
    assert response.status_code == 200
    body = response.json()
    assert body["order"] == ["mech", "stokes", "antistokes"]
    assert set(body["cuts"]) == {"mech", "stokes", "antistokes"}
