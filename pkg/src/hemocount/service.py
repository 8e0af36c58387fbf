"""Session-scoped HTTP service hosting the semi-automatic tuning loop.

A session holds one uploaded image plus the artifacts of its latest run;
re-running with a new config replaces them. Sessions live in memory only
(no persistence across restarts). A run request while another run of the
same session is executing is rejected with 409; the client retries.
"""

from __future__ import annotations

import threading
import uuid
from dataclasses import dataclass, field

import anyio.to_thread
import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse

from .netpbm import NetpbmParseError, load_pgm, save_pgm, save_ppm
from .pipeline import ConfigError, PipelineConfig, PipelineStageError, run_pipeline

PGM_MEDIA = "image/x-portable-graymap"
PPM_MEDIA = "image/x-portable-pixmap"


@dataclass
class Session:
    image: np.ndarray
    lock: threading.Lock = field(default_factory=threading.Lock)
    config: PipelineConfig | None = None
    report: object | None = None
    artifacts: dict = field(default_factory=dict)
    status: str = "idle"
    error_stage: str | None = None


def _stage_bytes(arr: np.ndarray) -> tuple[bytes, str]:
    if arr.ndim == 3:
        return save_ppm(arr), PPM_MEDIA
    if arr.dtype == np.bool_:
        return save_pgm(arr.astype(np.float64)), PGM_MEDIA
    return save_pgm(np.clip(arr, 0.0, 1.0)), PGM_MEDIA


def create_app() -> FastAPI:
    app = FastAPI(title="hemocount", version="0.1.0")
    sessions: dict[str, Session] = {}
    registry_lock = threading.Lock()
    app.state.sessions = sessions  # exposed for tests

    def get_session(session_id: str) -> Session | None:
        with registry_lock:
            return sessions.get(session_id)

    @app.post("/sessions", status_code=201)
    async def create_session(request: Request):
        body = await request.body()
        try:
            image = load_pgm(body)
        except NetpbmParseError as exc:
            return JSONResponse({"detail": str(exc)}, status_code=400)
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = Session(image=image)
        return {"session_id": session_id}

    @app.get("/sessions/{session_id}")
    def session_status(session_id: str):
        session = get_session(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        return {
            "session_id": session_id,
            "run_status": session.status,
            "error_stage": session.error_stage,
            "has_report": session.report is not None,
        }

    @app.post("/sessions/{session_id}/run")
    async def run(session_id: str, request: Request):
        session = get_session(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        try:
            cfg = PipelineConfig.from_json((await request.body()).decode("utf-8"))
            cfg.require_templates()
        except (ConfigError, UnicodeDecodeError) as exc:
            return JSONResponse({"detail": str(exc)}, status_code=400)
        if not session.lock.acquire(blocking=False):
            return JSONResponse({"detail": "a run is already executing for this session"}, status_code=409)
        try:
            session.status = "running"
            try:
                result = await anyio.to_thread.run_sync(run_pipeline, session.image, cfg)
            except PipelineStageError as exc:
                session.status = "error"
                session.error_stage = exc.stage
                return JSONResponse(
                    {"detail": {"stage": exc.stage, "reason": str(exc.cause)}}, status_code=422
                )
            except (ConfigError, ValueError) as exc:
                session.status = "error"
                session.error_stage = None
                return JSONResponse({"detail": str(exc)}, status_code=400)
            session.config = cfg
            session.report = result.report
            session.artifacts = result.artifacts
            session.status = "done"
            session.error_stage = None
            return JSONResponse(result.report.to_dict())
        finally:
            session.lock.release()

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        session = get_session(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        if session.report is None:
            return JSONResponse({"detail": "no run yet"}, status_code=404)
        return JSONResponse(session.report.to_dict())

    @app.get("/sessions/{session_id}/stages/{name}")
    def stage_image(session_id: str, name: str):
        session = get_session(session_id)
        if session is None:
            return JSONResponse({"detail": "unknown session"}, status_code=404)
        if name == "original":
            data, media = _stage_bytes(session.image)
            return Response(content=data, media_type=media)
        if name not in session.artifacts:
            return JSONResponse({"detail": f"no stage artifact {name!r} (run first)"}, status_code=404)
        data, media = _stage_bytes(session.artifacts[name])
        return Response(content=data, media_type=media)

    @app.delete("/sessions/{session_id}", status_code=204)
    def delete(session_id: str):
        with registry_lock:
            if session_id not in sessions:
                return JSONResponse({"detail": "unknown session"}, status_code=404)
            del sessions[session_id]
        return Response(status_code=204)

    return app
