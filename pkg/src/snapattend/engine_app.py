"""HTTP face of the recognition engine.

Receives session jobs from the backend (which owns the database; the
engine never touches it), reads its simulated cameras, and reports every
block plus the final presence matrix to the configured callback URL.

    SNAPATTEND_SCENARIO=scenario.json \
    SNAPATTEND_CALLBACK_URL=http://127.0.0.1:8000/internal \
    SNAPATTEND_PORT=8100 python -m snapattend.engine_app
"""

from __future__ import annotations

import logging
import os
import time

import httpx
from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse

from .camera import SimulatedCameraBank, scripted_source_factory
from .engine import BlockOutcome, PresenceMatrix, RecognitionEngine, job_from_payload
from .errors import NotFoundError, SnapAttendError
from .scenario import load_scenario

log = logging.getLogger("snapattend.engine")

DEFAULT_SECRET = "dev-secret"


class CallbackSink:
    """Delivers block and completion callbacks to the backend, with a
    short retry so one dropped connection does not lose a block."""

    def __init__(self, callback_url: str, secret: str, retries: int = 3):
        self.base = callback_url.rstrip("/")
        self.retries = retries
        self._client = httpx.Client(
            timeout=10.0, headers={"X-Internal-Secret": secret}
        )

    def _post(self, path: str, payload: dict):
        last = None
        for attempt in range(self.retries):
            try:
                resp = self._client.post(f"{self.base}{path}", json=payload)
                if resp.status_code < 500:
                    if resp.status_code >= 400:
                        log.warning("callback %s rejected: %s %s",
                                    path, resp.status_code, resp.text[:200])
                    return
                last = f"{resp.status_code} {resp.text[:200]}"
            except httpx.HTTPError as exc:
                last = repr(exc)
            time.sleep(0.2 * (attempt + 1))
        log.error("callback %s failed after %d tries: %s", path, self.retries, last)

    def on_block(self, outcome: BlockOutcome):
        self._post(
            f"/sessions/{outcome.session_id}/blocks/{outcome.block_index}",
            {
                "assignments": [
                    {"student_id": a.student_id, "distance": a.distance}
                    for a in outcome.assignments
                ],
                "degraded": outcome.degraded,
            },
        )

    def on_complete(self, matrix: PresenceMatrix):
        self._post(
            f"/sessions/{matrix.session_id}/complete",
            {
                "status": "complete",
                "presence": {
                    "session_id": matrix.session_id,
                    "block_count": matrix.block_count,
                    "rows": {sid: list(bits) for sid, bits in sorted(matrix.rows.items())},
                    "degraded_blocks": list(matrix.degraded_blocks),
                },
            },
        )

    def on_failed(self, session_id: str, reason: str):
        self._post(
            f"/sessions/{session_id}/complete", {"status": "failed", "reason": reason}
        )


def create_engine_app(engine: RecognitionEngine) -> FastAPI:
    app = FastAPI(title="snapattend recognition engine")

    @app.exception_handler(SnapAttendError)
    async def snapattend_error(request: Request, exc: SnapAttendError):
        status = 404 if isinstance(exc, NotFoundError) else 400
        return JSONResponse(status_code=status, content={"code": exc.code, "message": exc.message})

    @app.get("/healthz")
    def healthz():
        return {"ok": True}

    @app.post("/jobs", status_code=202)
    def submit(payload: dict = Body(...)):
        job = job_from_payload(payload)
        return {"job_id": engine.submit(job)}

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        return {"job_id": job_id, "status": engine.status(job_id).value}

    return app


def build_from_env() -> FastAPI:
    scenario = load_scenario(os.environ["SNAPATTEND_SCENARIO"])
    bank = SimulatedCameraBank(scenario)
    secret = os.environ.get("SNAPATTEND_SECRET", DEFAULT_SECRET)
    callback_url = os.environ.get("SNAPATTEND_CALLBACK_URL", "")
    max_workers = int(os.environ.get("SNAPATTEND_MAX_WORKERS", "32"))
    delay_ms = float(os.environ.get("SNAPATTEND_MATCH_DELAY_MS", "0"))

    if callback_url:
        sink = CallbackSink(callback_url, secret)
        on_block, on_complete, on_failed = sink.on_block, sink.on_complete, sink.on_failed
    else:  # fire-and-forget mode: jobs still run, results stay queryable
        on_block = on_complete = on_failed = None

    engine = RecognitionEngine(
        scripted_source_factory(bank),
        on_block=on_block,
        on_complete=on_complete,
        on_failed=on_failed,
        max_workers=max_workers,
        match_delay_s=delay_ms / 1000.0,
    )
    return create_engine_app(engine)


def main():
    import uvicorn

    logging.basicConfig(level=logging.INFO)
    app = build_from_env()
    port = int(os.environ.get("SNAPATTEND_PORT", "8100"))
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")


if __name__ == "__main__":
    main()
