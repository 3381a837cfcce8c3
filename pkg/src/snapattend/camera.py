"""Camera gateway: binds cameras to class sessions and serves snapshots.

The shipped camera is scenario-driven and fully deterministic: a snapshot
at time t contains one synthetic embedding per student scripted present in
the block containing t. Synthetic embeddings come from a counter-based
stream keyed by (scenario seed, session, block, student), so identical
scenarios produce byte-identical frames no matter how workers interleave.

The gateway never reads a wall clock; callers pass timestamps in, which is
what lets the simulator compress a 90-minute class into milliseconds.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timedelta
from enum import Enum

import numpy as np

from .embeddings import normalized
from .errors import ConflictError, ConnectionLostError, InvalidInputError, NotFoundError, OutOfWindowError
from .randstream import CounterStream
from .scenario import CONNECT_LEAD_MINUTES, Scenario, ScenarioSession


class CameraStatus(str, Enum):
    IDLE = "idle"
    CONNECTED = "connected"
    FAILED = "failed"


def synth_embedding(canonical: np.ndarray, sigma: float, *key_parts) -> np.ndarray:
    """normalize(canonical + sigma * g) with g drawn from the stream for
    key_parts. sigma == 0 returns the canonical embedding untouched."""
    if sigma == 0:
        return canonical
    g = CounterStream(*key_parts).gaussians(canonical.shape[0])
    return normalized(canonical + sigma * g)


@dataclass(frozen=True)
class SnapshotFrame:
    camera_id: str
    capture_time: datetime
    detections: tuple[np.ndarray, ...]


class CameraConnection:
    """Live handle for one camera over one session window."""

    def __init__(self, bank: "SimulatedCameraBank", camera_id: str,
                 session_start: datetime, session_end: datetime,
                 scripted: ScenarioSession | None):
        self._bank = bank
        self.camera_id = camera_id
        self.session_start = session_start
        self.session_end = session_end
        self._scripted = scripted
        self._closed = False
        self._capture_lock = threading.Lock()  # captures on one handle serialize

    def capture(self, t: datetime) -> SnapshotFrame:
        with self._capture_lock:
            if self._closed:
                raise ConnectionLostError(f"camera {self.camera_id} handle is closed")
            if self._bank.is_down(self.camera_id):
                raise ConnectionLostError(f"camera {self.camera_id} went down")
            if t < self.session_start or t >= self.session_end:
                raise OutOfWindowError(
                    f"capture at {t.isoformat()} outside session window "
                    f"[{self.session_start.isoformat()}, {self.session_end.isoformat()})"
                )
            detections: list[np.ndarray] = []
            if self._scripted is not None:
                scenario = self._bank.scenario
                block = self._scripted.schedule.block_index_at(t)
                for sid in sorted(self._scripted.present):
                    if block in self._scripted.present[sid]:
                        detections.append(
                            synth_embedding(
                                scenario.embeddings[sid],
                                scenario.noise_sigma,
                                scenario.seed, self._scripted.session_id, block, sid,
                            )
                        )
            return SnapshotFrame(
                camera_id=self.camera_id, capture_time=t, detections=tuple(detections)
            )

    def close(self):
        if not self._closed:
            self._closed = True
            self._bank._release(self)


def scripted_source_factory(bank: "SimulatedCameraBank"):
    """Adapter for the recognition engine: opens the job's camera for its
    session window and yields detections per snapshot time."""
    from contextlib import contextmanager

    @contextmanager
    def factory(job):
        conn = bank.connect(
            job.camera_id,
            job.start_time - timedelta(minutes=CONNECT_LEAD_MINUTES),
            job.start_time,
            job.end_time,
        )
        try:
            yield lambda t: conn.capture(t).detections
        finally:
            conn.close()

    return factory


class SimulatedCameraBank:
    """Registry of the scenario's cameras with single-binding discipline:
    at most one active connection per camera at a time."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        self._lock = threading.Lock()
        self._active: dict[str, CameraConnection] = {}
        self._down: set[str] = set()
        self._cameras = {s.camera_id for s in scenario.sessions}

    def camera_ids(self) -> set[str]:
        return set(self._cameras)

    def status(self, camera_id: str) -> CameraStatus:
        with self._lock:
            if camera_id not in self._cameras:
                raise NotFoundError(f"unknown camera {camera_id!r}")
            if camera_id in self._down:
                return CameraStatus.FAILED
            if camera_id in self._active:
                return CameraStatus.CONNECTED
            return CameraStatus.IDLE

    def set_camera_down(self, camera_id: str, down: bool = True):
        """Failure injection for tests and demos."""
        with self._lock:
            if down:
                self._down.add(camera_id)
            else:
                self._down.discard(camera_id)

    def is_down(self, camera_id: str) -> bool:
        with self._lock:
            return camera_id in self._down

    def connect(self, camera_id: str, at_time: datetime,
                session_start: datetime, session_end: datetime) -> CameraConnection:
        """Establish the camera link for one session.

        The orchestrator calls this exactly five minutes before class; the
        handle stays usable for capture until the session ends.
        """
        if at_time != session_start - timedelta(minutes=CONNECT_LEAD_MINUTES):
            raise InvalidInputError(
                f"cameras connect exactly {CONNECT_LEAD_MINUTES} minutes before class "
                f"({at_time.isoformat()} vs start {session_start.isoformat()})"
            )
        with self._lock:
            if camera_id not in self._cameras:
                raise NotFoundError(f"unknown camera {camera_id!r}")
            if camera_id in self._down:
                raise ConnectionLostError(f"camera {camera_id} is unreachable")
            existing = self._active.get(camera_id)
            if existing is not None:
                if existing.session_end > at_time:
                    raise ConflictError(
                        f"camera {camera_id} already serves a session until "
                        f"{existing.session_end.isoformat()}"
                    )
                existing._closed = True  # stale handle past its window
            # students follow their class: prefer the script bound to this
            # camera, but a session redirected to another room's camera
            # still plays out in front of the new camera
            candidates = [
                s for s in self.scenario.sessions
                if s.start == session_start and s.end == session_end
            ]
            same_camera = [s for s in candidates if s.camera_id == camera_id]
            pool = same_camera or candidates
            scripted = min(pool, key=lambda s: s.session_id) if pool else None
            conn = CameraConnection(self, camera_id, session_start, session_end, scripted)
            self._active[camera_id] = conn
            return conn

    def _release(self, conn: CameraConnection):
        with self._lock:
            if self._active.get(conn.camera_id) is conn:
                del self._active[conn.camera_id]
