"""Read-only HTTP service exposing the dataset and trained ensembles.

Endpoints (JSON):
    GET  /api/routes               route list with spans
    GET  /api/routes/{id}/history  monthly values, computed classes, monthly s
    GET  /api/models               artifact metadata
    POST /api/forecast             range + per-month summaries for a class vector

Errors are always ``{"code": ..., "message": ...}``. Nothing here mutates
artifacts or datasets.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .classify import classify_series, monthly_stats
from .dataio import MonthlySeries, TimePoint, parse_route_csv
from .forecast import (
    SCHEMA_VERSION,
    ArtifactError,
    HorizonRequest,
    forecast_route,
    load_ensemble,
    month_summary,
)
from .sieve import Ensemble


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message


class MonthDto(BaseModel):
    year: int
    month: int = Field(ge=1, le=12)


class ForecastRequestDto(BaseModel):
    route: str
    class_vector: list[float]
    months: int = 12
    start: MonthDto | None = None
    seed: int | None = None


class MonthSummaryDto(BaseModel):
    month: str
    min: float
    q10: float
    median: float
    q90: float
    max: float
    retained: int


class ModelInfoDto(BaseModel):
    route: str
    training_cutoff: str
    layer_sizes: list[int]
    hidden_activation: str
    seed: int
    schema_version: int


class ForecastResponseDto(BaseModel):
    schema_version: int
    route: str
    start: str
    months: int
    low: float
    high: float
    per_month: list[MonthSummaryDto]
    model: ModelInfoDto
    seed_used: int


def _model_info(ensemble: Ensemble) -> ModelInfoDto:
    return ModelInfoDto(
        route=ensemble.route_id,
        training_cutoff=str(ensemble.training_cutoff),
        layer_sizes=list(ensemble.spec.layer_sizes),
        hidden_activation=ensemble.spec.hidden_activation,
        seed=ensemble.seed,
        schema_version=SCHEMA_VERSION,
    )


def create_app(dataset_path: str | Path, artifacts_dir: str | Path) -> FastAPI:
    """Build the service over one dataset file and a directory of artifacts."""
    dataset = {s.route_id: s for s in parse_route_csv(Path(dataset_path).read_text())}
    artifacts_dir = Path(artifacts_dir)
    models: dict[str, Ensemble] = {}
    for path in sorted(artifacts_dir.glob("*.json")):
        ensemble = load_ensemble(path)
        models[ensemble.route_id] = ensemble
    if not models:
        raise ArtifactError(f"no model artifacts found in {artifacts_dir}")

    app = FastAPI(title="rangecast", version="0.1.0")

    @app.exception_handler(ApiError)
    async def _api_error(_: Request, exc: ApiError) -> JSONResponse:
        return JSONResponse(
            status_code=exc.status, content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_: Request, exc: RequestValidationError) -> JSONResponse:
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(p) for p in first.get("loc", ()))
        return JSONResponse(
            status_code=422,
            content={
                "code": "validation_error",
                "message": f"{where}: {first.get('msg', 'invalid request')}",
            },
        )

    @app.exception_handler(Exception)
    async def _unexpected(_: Request, exc: Exception) -> JSONResponse:
        return JSONResponse(
            status_code=500, content={"code": "internal_error", "message": str(exc)}
        )

    def _series(route: str) -> MonthlySeries:
        if route not in dataset:
            raise ApiError(404, "unknown_route", f"no data for route {route!r}")
        return dataset[route]

    @app.get("/api/routes")
    def routes() -> list[dict]:
        return [
            {
                "route": s.route_id,
                "start": str(s.start),
                "end": str(s.end),
                "months": len(s),
            }
            for s in dataset.values()
        ]

    @app.get("/api/routes/{route}/history")
    def history(route: str) -> dict:
        series = _series(route)
        stats = monthly_stats(series)
        classes = classify_series(series, stats)
        return {
            "route": series.route_id,
            "start": str(series.start),
            "values": list(series.values),
            "classes": list(classes.values),
            "monthly_s": list(stats.s_by_month),
        }

    @app.get("/api/models")
    def model_list() -> list[ModelInfoDto]:
        return [_model_info(m) for m in models.values()]

    @app.post("/api/forecast")
    def forecast(body: ForecastRequestDto) -> ForecastResponseDto:
        if body.route not in models:
            raise ApiError(404, "unknown_route", f"no model for route {body.route!r}")
        ensemble = models[body.route]
        if len(body.class_vector) != body.months:
            raise ApiError(
                400,
                "class_vector_length",
                f"class vector has {len(body.class_vector)} entries for "
                f"{body.months} months",
            )
        start = (
            TimePoint(body.start.year, body.start.month)
            if body.start is not None
            else ensemble.training_cutoff.plus(1)
        )
        request = HorizonRequest(
            route_id=body.route,
            start=start,
            class_vector=tuple(body.class_vector),
            months=body.months,
        )
        seed_used = ensemble.seed if body.seed is None else body.seed
        fr = forecast_route(ensemble, request, seed=seed_used)
        low, high = fr.range
        return ForecastResponseDto(
            schema_version=SCHEMA_VERSION,
            route=body.route,
            start=str(start),
            months=body.months,
            low=low,
            high=high,
            per_month=[
                MonthSummaryDto(month=str(start.plus(i)), **month_summary(values))
                for i, values in enumerate(fr.per_month)
            ],
            model=_model_info(ensemble),
            seed_used=seed_used,
        )

    return app
