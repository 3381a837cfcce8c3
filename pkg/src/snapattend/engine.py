"""Recognition engine: one independent worker per class session.

A job arrives with the roster embeddings, the session window, and the
camera to read. The worker walks the snapshot schedule, matches each
snapshot against the roster, reports every block as it lands, and emits
the finished presence matrix exactly once. Workers share no mutable
state, so any number of classes can run at the same time and the output
is identical however they interleave.

A snapshot that cannot be acquired costs only its own block (recorded
all-absent and flagged degraded); a camera that cannot be reached at all
fails the session and the back-end is told.
"""

from __future__ import annotations

import json
import threading
import time
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from typing import Callable, ContextManager, Sequence

import numpy as np

from .core import PresenceVector, compute_block_schedule
from .errors import InvalidInputError, NotFoundError
from .matching import DEFAULT_TAU, Assignment, RosterEntry, match_snapshot

DEFAULT_MAX_WORKERS = 32

SnapshotSource = Callable[[datetime], Sequence[np.ndarray]]
SourceFactory = Callable[["SessionJob"], ContextManager[SnapshotSource]]


class JobStatus(str, Enum):
    PENDING = "pending"
    RUNNING = "running"
    COMPLETE = "complete"
    FAILED = "failed"


@dataclass(frozen=True)
class SessionJob:
    session_id: str
    camera_id: str
    start_time: datetime
    end_time: datetime
    roster: tuple[RosterEntry, ...]
    interval_minutes: int = 10
    tau: float = DEFAULT_TAU
    embedding_dim: int = 128

    def __post_init__(self):
        if not self.roster:
            raise InvalidInputError(f"job {self.session_id}: roster must not be empty")
        if self.end_time <= self.start_time:
            raise InvalidInputError(f"job {self.session_id}: end_time must be after start_time")
        ids = [e.student_id for e in self.roster]
        if len(set(ids)) != len(ids):
            raise InvalidInputError(f"job {self.session_id}: duplicate student in roster")
        for e in self.roster:
            if e.embedding.shape != (self.embedding_dim,):
                raise InvalidInputError(
                    f"job {self.session_id}: embedding for {e.student_id} has shape "
                    f"{e.embedding.shape}, expected ({self.embedding_dim},)"
                )


@dataclass(frozen=True)
class BlockOutcome:
    session_id: str
    block_index: int
    assignments: tuple[Assignment, ...]
    degraded: bool


@dataclass(frozen=True)
class PresenceMatrix:
    """Per-session boolean grid: one row per roster student, one column
    per snapshot block."""

    session_id: str
    block_count: int
    rows: dict[str, tuple[bool, ...]]
    degraded_blocks: tuple[int, ...] = ()

    def presence_vector(self, student_id: str) -> PresenceVector:
        if student_id not in self.rows:
            raise NotFoundError(f"student {student_id!r} not in matrix {self.session_id}")
        return PresenceVector(student_id=student_id, blocks=self.rows[student_id])

    def canonical_json(self) -> str:
        doc = {
            "session_id": self.session_id,
            "block_count": self.block_count,
            "rows": {sid: list(bits) for sid, bits in sorted(self.rows.items())},
            "degraded_blocks": sorted(self.degraded_blocks),
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_payload(cls, doc: dict) -> "PresenceMatrix":
        return cls(
            session_id=doc["session_id"],
            block_count=int(doc["block_count"]),
            rows={sid: tuple(bool(b) for b in bits) for sid, bits in doc["rows"].items()},
            degraded_blocks=tuple(int(b) for b in doc.get("degraded_blocks", [])),
        )


def run_session(
    job: SessionJob,
    snapshot_source: SnapshotSource,
    *,
    on_block: Callable[[BlockOutcome], None] | None = None,
    match_delay_s: float = 0.0,
) -> PresenceMatrix:
    """Walk the snapshot schedule for one class and build its presence
    matrix, reporting each block as it is produced."""
    schedule = compute_block_schedule(job.start_time, job.end_time, job.interval_minutes)
    roster = list(job.roster)
    bits = {e.student_id: [False] * schedule.block_count for e in roster}
    degraded: list[int] = []

    for k, t in enumerate(schedule.snapshot_times):
        try:
            detections = list(snapshot_source(t))
        except Exception:
            # lost snapshot: this block stays all-absent, the session goes on
            detections = None
        if detections is None:
            assignments: tuple[Assignment, ...] = ()
            degraded.append(k)
            is_degraded = True
        else:
            if match_delay_s:
                time.sleep(match_delay_s)
            assignments = tuple(match_snapshot(detections, roster, job.tau))
            is_degraded = False
        for a in assignments:
            bits[a.student_id][k] = True
        if on_block is not None:
            on_block(BlockOutcome(job.session_id, k, assignments, is_degraded))

    return PresenceMatrix(
        session_id=job.session_id,
        block_count=schedule.block_count,
        rows={sid: tuple(row) for sid, row in bits.items()},
        degraded_blocks=tuple(degraded),
    )


def job_to_payload(job: SessionJob) -> dict:
    """Wire form of a session job (the POST /jobs body)."""
    from .timeutil import format_timestamp

    return {
        "session_id": job.session_id,
        "camera_id": job.camera_id,
        "start_time": format_timestamp(job.start_time),
        "end_time": format_timestamp(job.end_time),
        "interval_minutes": job.interval_minutes,
        "tau": job.tau,
        "embedding_dim": job.embedding_dim,
        "roster": [
            {"student_id": e.student_id, "embedding": e.embedding.tolist()}
            for e in job.roster
        ],
    }


def job_from_payload(doc: dict) -> SessionJob:
    """Parse and validate the POST /jobs body."""
    from .embeddings import as_embedding
    from .timeutil import parse_timestamp

    try:
        dim = int(doc.get("embedding_dim", 128))
        roster = tuple(
            RosterEntry(
                student_id=str(entry["student_id"]),
                embedding=as_embedding(entry["embedding"], dim=dim),
            )
            for entry in doc["roster"]
        )
        return SessionJob(
            session_id=str(doc["session_id"]),
            camera_id=str(doc["camera_id"]),
            start_time=parse_timestamp(doc["start_time"]),
            end_time=parse_timestamp(doc["end_time"]),
            interval_minutes=int(doc.get("interval_minutes", 10)),
            tau=float(doc.get("tau", DEFAULT_TAU)),
            embedding_dim=dim,
            roster=roster,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise InvalidInputError(f"bad job payload: {exc!r}") from None


@dataclass
class _JobRecord:
    job: SessionJob
    status: JobStatus = JobStatus.PENDING
    result: PresenceMatrix | None = None
    error: str | None = None
    done: threading.Event = field(default_factory=threading.Event)


class RecognitionEngine:
    """Dispatches one worker per submitted session job.

    The sinks (on_block / on_complete / on_failed) are invoked from worker
    threads, possibly many at once; they must be thread-safe.
    """

    def __init__(
        self,
        source_factory: SourceFactory,
        *,
        on_block: Callable[[BlockOutcome], None] | None = None,
        on_complete: Callable[[PresenceMatrix], None] | None = None,
        on_failed: Callable[[str, str], None] | None = None,
        max_workers: int = DEFAULT_MAX_WORKERS,
        match_delay_s: float = 0.0,
    ):
        self._factory = source_factory
        self._on_block = on_block
        self._on_complete = on_complete
        self._on_failed = on_failed
        self._match_delay_s = match_delay_s
        self._pool = ThreadPoolExecutor(max_workers=max_workers, thread_name_prefix="session")
        self._lock = threading.Lock()
        self._records: dict[str, _JobRecord] = {}

    def submit(self, job: SessionJob) -> str:
        record = _JobRecord(job=job)
        job_id = uuid.uuid4().hex[:12]
        with self._lock:
            self._records[job_id] = record
        self._pool.submit(self._run, record)
        return job_id

    def status(self, job_id: str) -> JobStatus:
        with self._lock:
            if job_id not in self._records:
                raise NotFoundError(f"unknown job {job_id!r}")
            return self._records[job_id].status

    def result(self, job_id: str) -> PresenceMatrix | None:
        with self._lock:
            if job_id not in self._records:
                raise NotFoundError(f"unknown job {job_id!r}")
            return self._records[job_id].result

    def wait_all(self, timeout: float = 60.0) -> bool:
        """Block until every submitted job has finished or failed."""
        deadline = time.monotonic() + timeout
        with self._lock:
            records = list(self._records.values())
        for r in records:
            remaining = deadline - time.monotonic()
            if remaining <= 0 or not r.done.wait(remaining):
                return False
        return True

    def shutdown(self):
        self._pool.shutdown(wait=True)

    def _run(self, record: _JobRecord):
        job = record.job
        record.status = JobStatus.RUNNING
        try:
            with self._factory(job) as source:
                matrix = run_session(
                    job, source, on_block=self._on_block, match_delay_s=self._match_delay_s
                )
        except Exception as exc:
            record.status = JobStatus.FAILED
            record.error = str(exc)
            try:
                if self._on_failed is not None:
                    self._on_failed(job.session_id, str(exc))
            finally:
                record.done.set()  # waiters resume only after the sink ran
            return
        record.result = matrix
        record.status = JobStatus.COMPLETE
        try:
            if self._on_complete is not None:
                self._on_complete(matrix)
        finally:
            record.done.set()
