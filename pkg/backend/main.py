"""
FastAPI service for random access coverage depth computations.
Exposes the exact, Monte Carlo, asymptotic and construction engines as JSON endpoints.
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import logging
from typing import List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, Field, ValidationError

from backend.data.figure_grids import FIGURES
from backend.reports import sweep_figure
from engines.asym import ratio_bound, tk_bound
from engines.codes import format_matrix, parse_matrix, profile_k2
from engines.construct import build_gk, construction_for, verify_recovery_complete
from engines.exact import closed_form_expectation, exact_expectation, k2_report, ExpectationReport
from engines.sim import GraphModelParams, mc_matrix_report, mc_tau_graph, mc_tau_matrix
from utils.errors import ConstructionError, GuardError, InputError, RandomAccessError
from utils.settings import configure_logging, get_settings

configure_logging()
logger = logging.getLogger(__name__)

MAX_HTTP_TRIALS = 1_000_000

app = FastAPI(
    title="Random Access Coverage Depth",
    description="Expected reads to recover one information strand from a linearly coded DNA pool",
    version="1.0.0",
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Pydantic models for request/response
class ConstructionRequest(BaseModel):
    k: int = Field(ge=2)
    x: int = Field(ge=0)
    y: int = Field(ge=1)
    q: Optional[int] = None


class GraphRequest(BaseModel):
    k: int
    p: float
    P: float


class ExactRequest(BaseModel):
    matrix: Optional[str] = None
    construction: Optional[ConstructionRequest] = None
    closed_form: bool = False


class SimulateRequest(BaseModel):
    matrix: Optional[str] = None
    construction: Optional[ConstructionRequest] = None
    graph: Optional[GraphRequest] = None
    strand: Optional[int] = None
    trials: int = Field(default=10_000, ge=1, le=MAX_HTTP_TRIALS)
    seed: Optional[int] = None


class AsymptoticRequest(BaseModel):
    k: int = Field(ge=2)
    p: Optional[float] = None
    P: Optional[float] = None
    alpha: Optional[float] = None


class ExpectationResponse(BaseModel):
    per_strand: List[float]
    t_max: float
    method: str
    stderr: List[float]
    exact: Optional[List[str]] = None
    trials: int = 0


STATUS_BY_ERROR = {InputError: 422, GuardError: 413, ConstructionError: 409}


def _http_error(error):
    for cls, status in STATUS_BY_ERROR.items():
        if isinstance(error, cls):
            return HTTPException(status_code=status, detail=str(error))
    return HTTPException(status_code=500, detail=str(error))


def _expectation_response(report: ExpectationReport):
    return ExpectationResponse(
        per_strand=report.per_strand,
        t_max=report.t_max,
        method=report.method,
        stderr=report.stderr,
        exact=[str(v) for v in report.exact] if report.exact is not None else None,
        trials=report.trials,
    )


def _single_source(*sources):
    if sum(s is not None for s in sources) != 1:
        raise InputError("give exactly one input source")


def _build(construction: ConstructionRequest):
    params = construction_for(construction.k, construction.x, construction.y, construction.q)
    return params, build_gk(params)


@app.get("/")
async def root():
    """Root endpoint with API information."""
    return {
        "message": "Random Access Coverage Depth API",
        "version": "1.0.0",
        "endpoints": {
            "/exact": "Exact per-strand expectations",
            "/simulate": "Monte Carlo estimates",
            "/asymptotic": "Graph-model upper bounds",
            "/construct": "Recovery-complete G_k(x, y)",
            "/figures/{name}": "Figure data series",
            "/health": "Health check",
        },
    }


@app.get("/health")
async def health_check():
    """Health check endpoint."""
    settings = get_settings()
    return {"status": "healthy", "threads": settings.threads, "seed": settings.seed}


@app.post("/exact", response_model=ExpectationResponse)
def exact(request: ExactRequest):
    """
    Exact expectations of a matrix (text format) or a construction.

    Args:
        request: Matrix text or construction parameters

    Returns:
        Per-strand expectations; exact rationals as strings when known
    """
    try:
        _single_source(request.matrix, request.construction)
        if request.closed_form and request.construction is not None:
            c = request.construction
            if c.k not in (3, 4):
                raise InputError("closed forms cover G_3(x, y) and G_4(x, y)")
            value = closed_form_expectation(c.k, c.x, c.y)
            report = ExpectationReport.build([value] * c.k, f"closed_form_k{c.k}")
        elif request.construction is not None:
            report = exact_expectation(_build(request.construction)[1])
        elif request.closed_form:
            report = k2_report(profile_k2(parse_matrix(request.matrix)))
        else:
            report = exact_expectation(parse_matrix(request.matrix))
        return _expectation_response(report)
    except RandomAccessError as e:
        raise _http_error(e)


@app.post("/simulate", response_model=ExpectationResponse)
def simulate(request: SimulateRequest):
    """Monte Carlo estimate from a matrix, a construction or the graph model."""
    try:
        _single_source(request.matrix, request.construction, request.graph)
        if request.graph is not None:
            try:
                params = GraphModelParams(**request.graph.model_dump())
            except ValidationError as e:
                raise InputError(e.errors()[0]["msg"]) from e
            report = mc_tau_graph(params, request.trials, request.seed)
        else:
            if request.matrix is not None:
                G = parse_matrix(request.matrix)
            else:
                G = _build(request.construction)[1]
            if request.strand:
                report = mc_tau_matrix(G, request.strand, request.trials, request.seed)
            else:
                report = mc_matrix_report(G, request.trials, request.seed)
        return _expectation_response(report)
    except RandomAccessError as e:
        raise _http_error(e)


@app.post("/asymptotic")
def asymptotic(request: AsymptoticRequest):
    """Upper bound for a point (p, P), or for the ratio alpha = P / p."""
    try:
        if request.alpha is not None:
            bound = ratio_bound(request.k, request.alpha)
        elif request.p is not None and request.P is not None:
            bound = tk_bound(request.k, request.p, request.P)
        else:
            raise InputError("give p and P, or alpha")
        return {**bound.model_dump(), "normalized": bound.normalized}
    except RandomAccessError as e:
        raise _http_error(e)


@app.post("/construct")
def construct(request: ConstructionRequest):
    """Build G_k(x, y), verify it and return the matrix text with its parameters."""
    try:
        params, G = _build(request)
        certificate = verify_recovery_complete(G)
        return {
            "matrix": format_matrix(G),
            "parameters": params.sidecar(),
            "n": G.n,
            "certificate": certificate.model_dump(),
        }
    except RandomAccessError as e:
        raise _http_error(e)


@app.get("/figures/{name}")
def figure(name: str):
    """Data series of one figure as a list of rows."""
    if name not in FIGURES:
        raise HTTPException(status_code=404, detail=f"Unknown figure {name}")
    try:
        return sweep_figure(name).to_dict(orient="records")
    except RandomAccessError as e:
        raise _http_error(e)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
