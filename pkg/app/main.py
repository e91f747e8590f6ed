"""
FastAPI Main Application Module

This module exposes the numerical operations over HTTP:
- GET  /health       liveness check
- POST /steady       derived constants, stability, intracavity CM, E_N, cooling
- POST /spectrum     normal-ordered output photon spectrum on a frequency grid
- POST /output-cm    stationary CM of the mechanics and N filtered output modes
- POST /tripartite   partial-transpose classification of mech / Stokes / anti-Stokes

Domain errors become HTTP 400; request bodies that fail validation are
answered with 422 by FastAPI itself.
"""

import logging
from contextlib import asynccontextmanager  # Used for startup/shutdown events

from fastapi import FastAPI, HTTPException, status

import uvicorn  # ASGI server for running FastAPI apps

import app as package
from app.core.config import configure_logging
from app.core.exceptions import OptomechError
from app.operations.gaussian import entanglement_report
from app.operations.model import derive_constants, steady_summary
from app.operations.output import make_filter_bank, output_cm, output_spectrum
from app.operations.tripartite import sideband_classification
from app.schemas.api import OutputCMRequest, SpectrumRequest, TripartiteRequest
from app.schemas.params import SystemParams

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    configure_logging()
    logger.info("optomechanics API ready")
    yield


# Initialize the FastAPI application with metadata and lifespan
app = FastAPI(
    title="Optomechanics API",
    description="Steady states, output modes and entanglement of a driven optomechanical cavity",
    version=package.__version__,
    lifespan=lifespan,
)


def _bad_request(exc: Exception) -> HTTPException:
    logger.warning("request rejected: %s", exc)
    return HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(exc))


# ------------------------------------------------------------------------------
# Health Endpoint
# ------------------------------------------------------------------------------
@app.get("/health", tags=["health"])
def read_health():
    """Health check."""
    return {"status": "ok"}


# ------------------------------------------------------------------------------
# Intracavity steady state
# ------------------------------------------------------------------------------
@app.post("/steady", tags=["steady"])
def steady(params: SystemParams):
    """
    Derived constants and stability; for a stable point also the intracavity
    CM, its entanglement report, n_eff and the sideband cooling rates.
    """
    try:
        return steady_summary(params)
    except OptomechError as e:
        raise _bad_request(e)


# ------------------------------------------------------------------------------
# Output field
# ------------------------------------------------------------------------------
@app.post("/spectrum", tags=["output"])
def spectrum(request: SpectrumRequest):
    """List of [omega / omega_m, S(omega)] pairs."""
    try:
        derived = derive_constants(request.params)
        return {"spectrum": output_spectrum(derived, request.omega, request.markovian)}
    except OptomechError as e:
        raise _bad_request(e)


@app.post("/output-cm", tags=["output"])
def output_covariance(request: OutputCMRequest):
    """Output CM (modes mech, out1, ...) with the PT analysis of every 1|rest split."""
    try:
        derived = derive_constants(request.params)
        bank = make_filter_bank(request.centers, request.epsilon)
        cm = output_cm(derived, bank, request.markovian)
        return {"covariance": cm.to_dict(), "entanglement": entanglement_report(cm).model_dump()}
    except OptomechError as e:
        raise _bad_request(e)


@app.post("/tripartite", tags=["output"])
def tripartite(request: TripartiteRequest):
    try:
        derived = derive_constants(request.params)
        return sideband_classification(derived, request.epsilon, request.markovian).model_dump()
    except OptomechError as e:
        raise _bad_request(e)


# ------------------------------------------------------------------------------
# Main Block to Run the Server
# ------------------------------------------------------------------------------
if __name__ == "__main__":
    uvicorn.run("app.main:app", host="127.0.0.1", port=8001, log_level="info")
