import logging
from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI, HTTPException, status
from pydantic import BaseModel, Field

from circgate import __version__
from circgate.blockade import BlockadeResult, Orientation, blockade_shift
from circgate.config import CS_CLOCK_OMEGA_10, DEFAULT_EXCLUSION_RADIUS, RunConfig, configure_logging
from circgate.error_model import ErrorBudget, error_budget, gate_params_for, intrinsic_error_E1
from circgate.exceptions import CircgateError
from circgate.reports import GateSummary, QptReport, build_qpt_report

logger = logging.getLogger(__name__)


class BlockadeRequest(BaseModel):
    n: int = Field(..., ge=2, description="Principal quantum number of the circular state")
    separation: float = Field(default=2e-6, gt=0.0, description="Interatomic separation (m)")
    orientation: Orientation = Field(default=Orientation.PARALLEL)
    exclusion_radius: float = Field(default=DEFAULT_EXCLUSION_RADIUS, gt=0.0)


class GateRequest(BaseModel):
    n: int = Field(..., ge=2, description="Principal quantum number of the circular state")
    temperature: float = Field(default=0.0, ge=0.0, description="Blackbody temperature (K)")
    separation: float = Field(default=2e-6, gt=0.0, description="Interatomic separation (m)")
    omega_10: float = Field(default=CS_CLOCK_OMEGA_10, gt=0.0, description="Qubit splitting (rad/s)")


class GateResponse(BaseModel):
    gate: GateSummary
    e1: float
    budget: ErrorBudget
    status: str = Field(default="success")


@asynccontextmanager
async def lifespan(app: FastAPI):
    configure_logging()
    logger.info("Starting circgate service")
    yield
    logger.info("Shutting down circgate service")


app = FastAPI(
    title="circgate",
    description="Blockade shifts, analytic gate errors and simulated process tomography for circular-Rydberg CZ gates",
    version=__version__,
    lifespan=lifespan,
)


def _failure(exc, what):
    if isinstance(exc, CircgateError):
        logger.error(f"Rejected {what}: {exc}")
        return HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY, detail=str(exc))
    logger.error(f"Error computing {what}: {str(exc)}", exc_info=True)
    return HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR, detail=str(exc))


@app.get("/health", description="Health check endpoint")
async def health_check():
    return {"status": "healthy", "version": __version__}


@app.post("/blockade", response_model=BlockadeResult, description="Dipole-dipole coupling and blockade shift")
async def compute_blockade(request: BlockadeRequest):
    try:
        return blockade_shift(request.n, request.separation, orientation=request.orientation,
                              exclusion_radius=request.exclusion_radius)
    except Exception as e:
        raise _failure(e, "blockade shift")


@app.post("/gate", response_model=GateResponse, description="Gate parameters at the optimal Rabi frequency")
async def compute_gate(request: GateRequest):
    try:
        params = gate_params_for(request.n, temperature=request.temperature, separation=request.separation,
                                 omega_10=request.omega_10)
        return GateResponse(gate=GateSummary.from_params(params), e1=intrinsic_error_E1(params),
                            budget=error_budget(params))
    except Exception as e:
        raise _failure(e, "gate parameters")


@app.post("/qpt", response_model=QptReport, description="Full simulated process tomography")
def compute_qpt(config: RunConfig):
    try:
        logger.info(f"Running QPT for n={config.n}, T={config.temperature} K")
        return build_qpt_report(config)
    except Exception as e:
        raise _failure(e, "process tomography")


def run_server(host: str, port: int):
    try:
        logger.info(f"Starting FastAPI server on {host}:{port}")
        uvicorn.run(app, host=host, port=port, log_level="info", access_log=True)
    except Exception as e:
        logger.error(f"Failed to start server: {str(e)}", exc_info=True)
        raise
