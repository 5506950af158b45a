"""HTTP surface: a FastAPI app exposing the service handlers.

Run with ``scopic serve`` or ``uvicorn scopic.api:app``. Deliberate input
errors map to 400 with an error category; validation errors surface as
FastAPI's usual 422.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, service
from .errors import ScopicError, SoundnessViolationError

app = FastAPI(
    title="scopic",
    version=__version__,
    description=(
        "Certifies the minimum extent S of generalized S-scopic quantum "
        "superpositions from quadrature-measurement statistics."
    ),
)


@app.exception_handler(ScopicError)
async def _scopic_error_handler(_: Request, exc: ScopicError) -> JSONResponse:
    status = 500 if isinstance(exc, SoundnessViolationError) else 400
    return JSONResponse(
        status_code=status,
        content={"error": type(exc).__name__, "detail": str(exc)},
    )


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/analyze", response_model=service.Report)
def analyze(request: service.AnalyzeRequest) -> service.Report:
    return service.run_analysis(request)


@app.post("/simulate", response_model=service.Report)
def simulate(request: service.SimulateRequest) -> service.Report:
    return service.simulate(request)


@app.post("/smax", response_model=service.SmaxResponse)
def smax(request: service.SmaxRequest) -> service.SmaxResponse:
    return service.smax_analytic(request)


@app.post("/curve", response_model=service.CurveResponse)
def curve(request: service.CurveRequest) -> service.CurveResponse:
    return service.curve(request)


@app.post("/verify", response_model=service.VerifyReport)
def verify(request: service.VerifyRequest) -> service.VerifyReport:
    return service.verify(request)
