"""FastAPI surface over the verification service."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from . import service
from .schemas import (
    InspectRequest,
    InspectResponse,
    LawsRequest,
    LawsResponse,
    ScenarioError,
    ScenarioModel,
    VerifyRequest,
    VerifyResponse,
)

app = FastAPI(title="regcalc", version="0.1.0",
              description="Register-calculus verification service")


def _scenario_error(exc: ScenarioError) -> HTTPException:
    return HTTPException(status_code=422,
                         detail={"path": exc.path, "message": str(exc)})


@app.get("/health")
def health() -> dict:
    return {"status": "ok"}


@app.post("/verify", response_model=VerifyResponse)
def verify(request: VerifyRequest) -> VerifyResponse:
    try:
        return service.verify(request)
    except ScenarioError as exc:
        raise _scenario_error(exc) from exc


@app.post("/laws", response_model=LawsResponse)
def laws(request: LawsRequest) -> LawsResponse:
    try:
        return service.laws(request)
    except ScenarioError as exc:
        raise _scenario_error(exc) from exc


@app.post("/inspect", response_model=InspectResponse)
def inspect(request: InspectRequest) -> InspectResponse:
    try:
        return service.inspect(request)
    except ScenarioError as exc:
        raise _scenario_error(exc) from exc


@app.get("/scenarios/{name}", response_model=ScenarioModel)
def builtin_scenario(name: str) -> ScenarioModel:
    try:
        return service.builtin_scenario(name)
    except ScenarioError as exc:
        raise _scenario_error(exc) from exc
