"""HTTP boundary: session lifecycle, event ingestion, simulation, analytics.

Stateless by construction: every request goes through the service layer to
storage; two instances over the same root behave identically. Error bodies
are {code, detail} with codes from the documented closed set:

    bad_request, not_found, seq_gap, finalized, not_finalized,
    empty_session, session_exists, immutable, integrity, invalid_placement,
    validation, parse_error, internal
"""

from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from starlette.exceptions import HTTPException as StarletteHTTPException

from .config import ServiceConfig
from .errors import ConflictError, OpsaiError, ValidationError
from .service import SessionService, run_result_to_wire, verify_result_to_wire
from .storage.records import QueryFilter

_STATUS_BY_CODE = {
    "bad_request": 400,
    "parse_error": 400,
    "validation": 400,
    "not_found": 404,
    "seq_gap": 409,
    "finalized": 409,
    "not_finalized": 409,
    "session_exists": 409,
    "immutable": 409,
    "conflict": 409,
    "empty_session": 422,
    "integrity": 422,
    "invalid_placement": 422,
}


def _error_response(code: str, detail: str) -> JSONResponse:
    return JSONResponse(
        status_code=_STATUS_BY_CODE.get(code, 500),
        content={"code": code, "detail": detail},
    )


def create_app(service: Optional[SessionService] = None, config: Optional[ServiceConfig] = None) -> FastAPI:
    if service is None:
        service = SessionService.from_config(config or ServiceConfig())
    cfg = service.config

    app = FastAPI(title="opsai", docs_url=None, redoc_url=None)
    app.state.service = service
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cfg.cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(OpsaiError)
    async def _domain_error(_request: Request, exc: OpsaiError):
        return _error_response(exc.code, exc.detail)

    @app.exception_handler(RequestValidationError)
    async def _request_error(_request: Request, exc: RequestValidationError):
        return _error_response("bad_request", str(exc.errors()[:1]))

    @app.exception_handler(StarletteHTTPException)
    async def _http_error(_request: Request, exc: StarletteHTTPException):
        code = "not_found" if exc.status_code == 404 else (
            "bad_request" if exc.status_code < 500 else "internal"
        )
        return JSONResponse(status_code=exc.status_code, content={"code": code, "detail": str(exc.detail)})

    @app.get("/v1/healthz")
    def healthz():
        # Deliberately storage-free: liveness only.
        return {"ok": True}

    @app.post("/v1/sessions", status_code=201)
    def create_session(body: dict):
        player_id = body.get("player_id")
        level_id = body.get("level_id")
        if not isinstance(player_id, str) or not player_id:
            raise ValidationError("player_id is required", field="player_id")
        if not isinstance(level_id, str) or not level_id:
            raise ValidationError("level_id is required", field="level_id")
        meta = service.create_session(
            player_id=player_id,
            level_id=level_id,
            session_id=body.get("session_id"),
            started_at=body.get("started_at"),
        )
        return {"session_id": meta.session_id, "started_at": meta.started_at}

    @app.post("/v1/sessions/{session_id}/events")
    async def append_events(session_id: str, request: Request):
        payload = await request.body()
        accepted = service.append_ndjson(session_id, payload)
        return {"accepted_through_seq": accepted}

    @app.post("/v1/sessions/{session_id}/finalize")
    def finalize(session_id: str):
        entry = service.finalize(session_id)
        return entry.to_wire()

    @app.get("/v1/sessions")
    def query_sessions(
        player: Optional[str] = None,
        level: Optional[str] = None,
        solved: Optional[str] = None,
        limit: int = Query(default=100),
        started_after: Optional[int] = None,
        started_before: Optional[int] = None,
    ):
        solved_flag: Optional[bool] = None
        if solved is not None:
            if solved not in ("true", "false"):
                raise ValidationError("solved must be true or false", field="solved")
            solved_flag = solved == "true"
        qf = QueryFilter(
            player_id=player,
            level_id=level,
            solved=solved_flag,
            started_at_min=started_after,
            started_at_max=started_before,
            limit=limit,
            list_all=all(
                v is None for v in (player, level, solved, started_after, started_before)
            ),
        )
        return [entry.to_wire() for entry in service.query(qf)]

    @app.get("/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return service.get_log_wire(session_id)

    @app.get("/v1/sessions/{session_id}/analytics")
    def get_analytics(session_id: str, k: Optional[int] = None):
        if k is not None and k < 0:
            raise ValidationError("k must be >= 0", field="k")
        return service.analytics_payload(session_id, k)

    @app.post("/v1/simulate")
    def simulate(body: dict):
        level_id = body.get("level_id")
        if not isinstance(level_id, str):
            raise ValidationError("level_id is required", field="level_id")
        seed = body.get("seed")
        if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
            raise ValidationError("seed must be a 64-bit unsigned integer", field="seed")
        try:
            result = service.simulate(level_id, body.get("placements"), seed, body.get("cfg"))
        except ValidationError as exc:
            raise ConflictError(exc.detail, code="invalid_placement")
        return run_result_to_wire(result)

    @app.post("/v1/verify")
    def verify(body: dict):
        level_id = body.get("level_id")
        if not isinstance(level_id, str):
            raise ValidationError("level_id is required", field="level_id")
        try:
            result = service.verify(level_id, body.get("placements"), body.get("cfg"))
        except ValidationError as exc:
            raise ConflictError(exc.detail, code="invalid_placement")
        return verify_result_to_wire(result)

    @app.get("/v1/levels/{level_id}")
    def get_level(level_id: str):
        return service.level_wire(level_id)

    return app
