from __future__ import annotations

import logging

from fastapi import FastAPI, HTTPException, Query

from common.errors import CurvatureError, SampleFailure

from .config import knowledge_dir
from .models import (
    MAX_TABLE_M,
    EvalOutput,
    EvalRequest,
    PresetSummary,
    TablesOutput,
    UpdateOutput,
    UpdateRequest,
    VerifyOutput,
    VerifyRequest,
)
from .services.engine import CurvatureEngine, build_tables
from .services.preset_store import PresetStore

logger = logging.getLogger(__name__)

KNOWLEDGE_DIR = knowledge_dir()

app = FastAPI(
    title="CurvJet API",
    version="1.0.0",
    description="SO(3) 프레임 곡선의 곡률 고계 도함수 계산 API",
)


store = PresetStore(presets_dir=KNOWLEDGE_DIR / "presets")
engine = CurvatureEngine(settings_path=KNOWLEDGE_DIR / "settings.yaml", store=store)


def _domain_error(exc: CurvatureError) -> HTTPException:
    cause = exc.cause if isinstance(exc, SampleFailure) else exc
    xi = exc.xi if isinstance(exc, SampleFailure) else None
    return HTTPException(
        status_code=422,
        detail={"error": type(cause).__name__, "message": str(cause), "xi": xi},
    )


def _resolve(spec, preset):
    try:
        return engine.resolve(spec, preset)
    except KeyError as exc:
        raise HTTPException(status_code=404, detail=str(exc)) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.get("/health")
async def health() -> dict[str, str]:
    return {"status": "ok"}


@app.get("/presets", response_model=list[PresetSummary])
async def list_presets() -> list[PresetSummary]:
    return [PresetSummary(**summary) for summary in store.list_presets()]


@app.get("/tables", response_model=TablesOutput)
async def tables(max_m: int = Query(default=6, ge=0, le=MAX_TABLE_M)) -> TablesOutput:
    return build_tables(max_m)


@app.post("/eval", response_model=EvalOutput)
async def evaluate(payload: EvalRequest) -> EvalOutput:
    spec = _resolve(payload.spec, payload.preset)
    try:
        return engine.evaluate(spec, payload.points, payload.order)
    except CurvatureError as exc:
        raise _domain_error(exc) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/update", response_model=UpdateOutput)
async def update(payload: UpdateRequest) -> UpdateOutput:
    spec = _resolve(payload.spec, payload.preset)
    increment = _resolve(payload.increment, payload.increment_preset)
    try:
        return engine.update(spec, increment, payload.points, payload.order, verify=payload.verify)
    except CurvatureError as exc:
        raise _domain_error(exc) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/verify", response_model=VerifyOutput)
async def verify(payload: VerifyRequest) -> VerifyOutput:
    spec = _resolve(payload.spec, payload.preset)
    increment = None
    if payload.increment is not None or payload.increment_preset is not None:
        increment = _resolve(payload.increment, payload.increment_preset)
    try:
        return engine.verify(spec, payload.points, payload.order, increment=increment)
    except CurvatureError as exc:
        raise _domain_error(exc) from exc
    except ValueError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


@app.post("/reload")
async def reload_resources() -> dict[str, str]:
    store.reload()
    engine.reload()
    logger.info("reloaded presets and settings from %s", KNOWLEDGE_DIR)
    return {"status": "reloaded"}
