"""HTTP face of the backend: role-based REST API plus the internal
callback/clock endpoints the recognition engine and simulator use.

Run standalone with environment configuration:

    SNAPATTEND_DB=attend.db SNAPATTEND_SCENARIO=scenario.json \
    SNAPATTEND_ENGINE_URL=http://127.0.0.1:8100 \
    SNAPATTEND_CLOCK=virtual SNAPATTEND_PORT=8000 \
    python -m snapattend.backend_app
"""

from __future__ import annotations

import logging
import os
import threading
import time
from datetime import timedelta

import httpx
from fastapi import Body, Depends, FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .backend import BackendCore, UserPrincipal
from .clock import VirtualClock, WallClock
from .errors import (
    ConflictError,
    ForbiddenError,
    NotFoundError,
    SnapAttendError,
    UnauthorizedError,
)
from .timeutil import parse_timestamp

log = logging.getLogger("snapattend.backend")

DEFAULT_SECRET = "dev-secret"

ERROR_STATUS = {
    UnauthorizedError: 401,
    ForbiddenError: 403,
    NotFoundError: 404,
    ConflictError: 409,
}


def _status_for(exc: SnapAttendError) -> int:
    for cls, status in ERROR_STATUS.items():
        if isinstance(exc, cls):
            return status
    return 400


class HttpEngineClient:
    """Submits session jobs to a recognition engine over HTTP."""

    def __init__(self, engine_url: str, timeout: float = 10.0):
        self.engine_url = engine_url.rstrip("/")
        self._client = httpx.Client(timeout=timeout)

    def submit_job(self, payload: dict) -> str:
        resp = self._client.post(f"{self.engine_url}/jobs", json=payload)
        if resp.status_code != 202:
            raise ConflictError(f"engine rejected job: {resp.status_code} {resp.text[:200]}")
        return resp.json()["job_id"]


class LoginBody(BaseModel):
    user_id: str
    password: str


class ThresholdBody(BaseModel):
    n: int


class RoomBody(BaseModel):
    room_number: str


class OverrideBody(BaseModel):
    present: bool
    note: str


def create_backend_app(core: BackendCore, secret: str = DEFAULT_SECRET) -> FastAPI:
    app = FastAPI(title="snapattend backend")

    @app.exception_handler(SnapAttendError)
    async def snapattend_error(request: Request, exc: SnapAttendError):
        return JSONResponse(
            status_code=_status_for(exc), content={"code": exc.code, "message": exc.message}
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400, content={"code": "invalid-input", "message": str(exc)}
        )

    def principal(request: Request) -> UserPrincipal:
        header = request.headers.get("authorization", "")
        if not header.lower().startswith("bearer "):
            raise UnauthorizedError("expected 'Authorization: Bearer <token>'")
        return core.authenticate(header.split(" ", 1)[1].strip())

    def internal_only(request: Request):
        if request.headers.get("x-internal-secret") != secret:
            raise UnauthorizedError("bad or missing internal secret")

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/auth/login")
    def login(body: LoginBody):
        return core.login(body.user_id, body.password)

    # ----- queries -----

    @app.get("/students/{student_id}/standing")
    def standing(student_id: str, course: str = "", who: UserPrincipal = Depends(principal)):
        if not course:
            raise NotFoundError("query parameter 'course' is required")
        return core.student_standing(who, student_id, course)

    @app.get("/sessions/{session_id}")
    def session_detail(session_id: str, who: UserPrincipal = Depends(principal)):
        return core.session_detail(who, session_id)

    @app.get("/sessions/{session_id}/attendance/{student_id}")
    def session_attendance(
        session_id: str, student_id: str, who: UserPrincipal = Depends(principal)
    ):
        return core.session_attendance(who, session_id, student_id)

    @app.get("/courses/{course_id}/sessions/{session_id}/total")
    def class_total(
        course_id: str, session_id: str, who: UserPrincipal = Depends(principal)
    ):
        return core.class_total(who, course_id, session_id)

    @app.get("/courses/{course_id}/sessions")
    def course_sessions(course_id: str, who: UserPrincipal = Depends(principal)):
        return core.list_course_sessions(who, course_id)

    # ----- mutations -----

    @app.put("/sessions/{session_id}/threshold")
    def set_session_threshold(
        session_id: str, body: ThresholdBody, who: UserPrincipal = Depends(principal)
    ):
        return core.set_session_threshold(who, session_id, body.n)

    @app.put("/courses/{course_id}/threshold")
    def set_course_threshold(
        course_id: str, body: ThresholdBody, who: UserPrincipal = Depends(principal)
    ):
        return core.set_course_threshold(who, course_id, body.n)

    @app.put("/sessions/{session_id}/room")
    def set_session_room(
        session_id: str, body: RoomBody, who: UserPrincipal = Depends(principal)
    ):
        return core.set_session_room(who, session_id, body.room_number)

    @app.put("/courses/{course_id}/room")
    def set_course_room(
        course_id: str, body: RoomBody, who: UserPrincipal = Depends(principal)
    ):
        return core.set_course_room(who, course_id, body.room_number)

    @app.put("/sessions/{session_id}/attendance/{student_id}/override")
    def override(
        session_id: str, student_id: str, body: OverrideBody,
        who: UserPrincipal = Depends(principal),
    ):
        return core.override_attendance(who, session_id, student_id, body.present, body.note)

    # ----- engine callbacks and simulator controls (shared secret) -----

    @app.post("/internal/sessions/{session_id}/blocks/{block_index}")
    def ingest_block(
        session_id: str, block_index: int, payload: dict = Body(...),
        _=Depends(internal_only),
    ):
        return core.ingest_block_result(
            session_id,
            block_index,
            payload.get("assignments", []),
            bool(payload.get("degraded", False)),
        )

    @app.post("/internal/sessions/{session_id}/complete")
    def ingest_complete(
        session_id: str, payload: dict = Body(...), _=Depends(internal_only)
    ):
        return core.ingest_complete(session_id, payload)

    @app.post("/internal/clock/advance")
    def clock_advance(payload: dict = Body(...), _=Depends(internal_only)):
        return core.advance_clock(parse_timestamp(payload["to"]))

    return app


def build_from_env() -> FastAPI:
    """Assemble a backend app from SNAPATTEND_* environment variables."""
    from .camera import SimulatedCameraBank
    from .scenario import load_scenario
    from .store import Database

    db = Database(os.environ["SNAPATTEND_DB"])
    scenario = load_scenario(os.environ["SNAPATTEND_SCENARIO"])
    engine_client = HttpEngineClient(os.environ["SNAPATTEND_ENGINE_URL"])
    secret = os.environ.get("SNAPATTEND_SECRET", DEFAULT_SECRET)
    mode = os.environ.get("SNAPATTEND_CLOCK", "virtual")

    if mode == "wall":
        clock = WallClock()
    else:
        start_env = os.environ.get("SNAPATTEND_CLOCK_START")
        if start_env:
            start = parse_timestamp(start_env)
        else:
            row = db.query_one("SELECT MIN(start_time) AS t FROM sessions")
            if row and row["t"]:
                start = parse_timestamp(row["t"]) - timedelta(hours=1)
            else:
                start = parse_timestamp("2026-01-01T00:00Z")
        clock = VirtualClock(start)

    core = BackendCore(db, clock, engine_client, SimulatedCameraBank(scenario))
    app = create_backend_app(core, secret)

    if mode == "wall":
        def ticker():
            while True:
                try:
                    core.tick(clock.now())
                except Exception:
                    log.exception("tick failed")
                time.sleep(1.0)

        threading.Thread(target=ticker, daemon=True, name="clock-tick").start()
    return app


def main():
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    app = build_from_env()
    port = int(os.environ.get("SNAPATTEND_PORT", "8000"))
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    main()
