"""HTTP service over completed scan artifacts.

Serves the persisted report, answers What-If and slice queries against the
loaded session, and hosts the interactive console's static assets at the
root. Module errors surface as HTTP 400 with their machine-readable codes;
data endpoints answer 503 until the artifacts are loaded.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

from fastapi import FastAPI, Request
from fastapi.responses import HTMLResponse, JSONResponse
from fastapi.staticfiles import StaticFiles

from . import __version__ as engine_version
from .errors import ComplaiError, MalformedReport, SchemaViolation
from .tabular import SliceQuery
from .scores import MetricWeights
from .workbench import (
    AuditSession,
    ScanConfig,
    load_cached_train_predictions,
    slice_report,
    whatif,
)

DEFAULT_PORT = 8501

_FALLBACK_PAGE = """<!doctype html>
<html><head><meta charset="utf-8"><title>complai</title></head>
<body><h1>complai service</h1>
<p>No console build found. The JSON API is live; see <a href="/api/meta">/api/meta</a>.</p>
</body></html>
"""

API_META = {
    "version": engine_version,
    "endpoints": [
        {"method": "GET", "path": "/healthz", "description": "liveness and readiness"},
        {"method": "GET", "path": "/api/meta", "description": "this document plus the data schema"},
        {"method": "GET", "path": "/api/report", "description": "full scan report"},
        {"method": "GET", "path": "/api/schema", "description": "data schema the scan used"},
        {"method": "GET", "path": "/api/fairness", "description": "fairness sub-report or null"},
        {"method": "GET", "path": "/api/drift", "description": "drift sub-report or null"},
        {"method": "POST", "path": "/api/whatif",
         "description": "body {\"values\": [...]} or {\"values\": {feature: value}}"},
        {"method": "POST", "path": "/api/slice",
         "description": "body {\"predicates\": [{feature, op, value}...], \"metrics\"?: {...}}"},
    ],
}


@dataclass
class ServiceState:
    session: AuditSession | None = None
    report: dict | None = None

    @property
    def ready(self) -> bool:
        return self.session is not None and self.report is not None


def load_state(config: ScanConfig, report_path: str | None = None) -> ServiceState:
    """Open the session and the persisted report the scan left behind."""
    path = report_path or config.out
    if not os.path.exists(path):
        raise MalformedReport(f"no scan report at {path}; run a scan first")
    with open(path, "r", encoding="utf-8") as fh:
        report = json.load(fh)
    cached = load_cached_train_predictions(path)
    session = AuditSession.open(config, cached_train_predictions=cached)
    return ServiceState(session=session, report=report)


def _instance_from_body(body: dict, session: AuditSession):
    values = body.get("values") if isinstance(body, dict) else None
    if values is None:
        raise SchemaViolation("request body must carry 'values'")
    if isinstance(values, dict):
        ordered = []
        for spec in session.schema.features:
            if spec.name not in values:
                raise SchemaViolation(f"missing value for feature {spec.name!r}")
            ordered.append(values[spec.name])
        return ordered
    return values


def create_app(state: ServiceState, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="complai", version=engine_version)

    @app.exception_handler(ComplaiError)
    async def complai_error(request: Request, exc: ComplaiError):
        return JSONResponse(status_code=400, content=exc.to_dict())

    def _ready_or_503():
        if not state.ready:
            return JSONResponse(status_code=503,
                                content={"error": "not_ready", "detail": "artifacts still loading"})
        return None

    @app.get("/healthz")
    async def healthz():
        return {"status": "ok", "ready": state.ready}

    @app.get("/api/meta")
    async def meta():
        doc = dict(API_META)
        doc["schema"] = state.session.schema.to_json() if state.ready else None
        return doc

    @app.get("/api/report")
    async def report():
        return _ready_or_503() or JSONResponse(content=state.report)

    @app.get("/api/schema")
    async def schema():
        return _ready_or_503() or JSONResponse(content=state.session.schema.to_json())

    @app.get("/api/fairness")
    async def fairness():
        return _ready_or_503() or JSONResponse(content=state.report.get("fairness"))

    @app.get("/api/drift")
    async def drift():
        return _ready_or_503() or JSONResponse(content=state.report.get("drift"))

    @app.post("/api/whatif")
    async def whatif_endpoint(request: Request):
        not_ready = _ready_or_503()
        if not_ready:
            return not_ready
        body = await request.json()
        instance = _instance_from_body(body, state.session)
        response = whatif(instance, state.session)
        return JSONResponse(content=response.to_json())

    @app.post("/api/slice")
    async def slice_endpoint(request: Request):
        not_ready = _ready_or_503()
        if not_ready:
            return not_ready
        body = await request.json()
        query = SliceQuery.from_json(body)
        weights = MetricWeights(dict(body["metrics"])) if body.get("metrics") else None
        return JSONResponse(content=slice_report(query, state.session, weights))

    if static_dir and os.path.isdir(static_dir):
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="console")
    else:
        @app.get("/", response_class=HTMLResponse)
        async def index():
            return _FALLBACK_PAGE

    return app


def serve(config: ScanConfig, report_path: str | None = None, port: int = DEFAULT_PORT,
          host: str = "127.0.0.1", static_dir: str | None = None):
    """Blocking entry point used by the CLI."""
    import uvicorn

    state = load_state(config, report_path)
    app = create_app(state, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port, log_level="warning")
