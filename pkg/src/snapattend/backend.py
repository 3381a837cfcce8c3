"""Backend orchestration and the role-based management operations.

BackendCore is transport-free: the HTTP app (backend_app) and the
in-process simulator both drive this one class. It owns the clock-driven
session lifecycle

    scheduled -> connecting (camera up at T-5) -> running (job dispatched
    at start) -> complete (finalized) | failed

plus callback ingestion, finalization through the pure attendance core,
and every query/mutation behind role checks.
"""

from __future__ import annotations

import threading
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timedelta

from . import core as rules
from .camera import SimulatedCameraBank
from .clock import VirtualClock
from .engine import job_to_payload, SessionJob
from .errors import (
    ConflictError,
    ForbiddenError,
    InvalidInputError,
    NotFoundError,
    SnapAttendError,
    UnauthorizedError,
)
from .matching import DEFAULT_TAU, RosterEntry
from .scenario import CONNECT_LEAD_MINUTES, Scenario
from .store import Database, embedding_from_text, embedding_to_text
from .timeutil import format_timestamp, parse_timestamp


@dataclass(frozen=True)
class UserPrincipal:
    user_id: str
    role: str  # student | professor | admin
    token: str


def seed_from_scenario(
    db: Database,
    scenario: Scenario,
    *,
    course_id: str = "course-1",
    professor_id: str = "prof-1",
    default_threshold_n: int = 3,
    required_percent: int = 75,
) -> None:
    """Populate a fresh database from a scenario: one course taught by one
    professor, every scenario student enrolled, one room per camera, and
    stub login users (password '<user>-pw', token 'tok-<user>')."""
    cameras = sorted({s.camera_id for s in scenario.sessions})
    with db.write() as conn:
        for user_id, role in (
            [("admin", "admin"), (professor_id, "professor")]
            + [(sid, "student") for sid in scenario.student_ids]
        ):
            conn.execute(
                "INSERT OR REPLACE INTO users (user_id, role, password, token) "
                "VALUES (?, ?, ?, ?)",
                (user_id, role, f"{user_id}-pw", f"tok-{user_id}"),
            )
        for sid in scenario.student_ids:
            conn.execute(
                "INSERT OR REPLACE INTO students (student_id, name, embedding) "
                "VALUES (?, ?, ?)",
                (sid, f"Student {sid}", embedding_to_text(scenario.embeddings[sid])),
            )
            conn.execute(
                "INSERT OR REPLACE INTO enrollments (course_id, student_id) VALUES (?, ?)",
                (course_id, sid),
            )
        for cam in cameras:
            conn.execute(
                "INSERT OR REPLACE INTO rooms (room_number, camera_id) VALUES (?, ?)",
                (f"room-{cam}", cam),
            )
        first = scenario.sessions[0] if scenario.sessions else None
        conn.execute(
            "INSERT OR REPLACE INTO courses (course_id, professor_id, room_number, "
            "camera_id, default_threshold_n, required_percent, total_scheduled_sessions) "
            "VALUES (?, ?, ?, ?, ?, ?, ?)",
            (
                course_id,
                professor_id,
                f"room-{first.camera_id}" if first else "room-none",
                first.camera_id if first else "none",
                default_threshold_n,
                required_percent,
                len(scenario.sessions),
            ),
        )
        for s in scenario.sessions:
            conn.execute(
                "INSERT OR REPLACE INTO sessions (session_id, course_id, start_time, "
                "end_time, room_number, camera_id, state) VALUES (?, ?, ?, ?, ?, ?, ?)",
                (
                    s.session_id,
                    course_id,
                    format_timestamp(s.start),
                    format_timestamp(s.end),
                    f"room-{s.camera_id}",
                    s.camera_id,
                    "scheduled",
                ),
            )


class BackendCore:
    """All backend behavior behind a transport-free interface."""

    def __init__(
        self,
        db: Database,
        clock,
        engine_client,
        camera_bank: SimulatedCameraBank,
        *,
        interval_minutes: int = 10,
        tau: float = DEFAULT_TAU,
    ):
        self.db = db
        self.clock = clock
        self.engine_client = engine_client
        self.bank = camera_bank
        self.interval_minutes = interval_minutes
        self.tau = tau
        self._tick_lock = threading.Lock()
        self._session_locks: dict[str, threading.Lock] = {}
        self._session_locks_guard = threading.Lock()
        self._handles: dict[str, object] = {}

    # ----- auth ---------------------------------------------------------

    def login(self, user_id: str, password: str) -> dict:
        row = self.db.query_one("SELECT * FROM users WHERE user_id = ?", (user_id,))
        if row is None or row["password"] != password:
            raise UnauthorizedError("unknown user or wrong password")
        return {"user_id": row["user_id"], "role": row["role"], "token": row["token"]}

    def authenticate(self, token: str) -> UserPrincipal:
        if not token:
            raise UnauthorizedError("missing bearer token")
        row = self.db.query_one("SELECT * FROM users WHERE token = ?", (token,))
        if row is None:
            raise UnauthorizedError("invalid token")
        return UserPrincipal(user_id=row["user_id"], role=row["role"], token=token)

    # ----- internal helpers ---------------------------------------------

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._session_locks_guard:
            return self._session_locks.setdefault(session_id, threading.Lock())

    def _session_row(self, session_id: str):
        row = self.db.query_one("SELECT * FROM sessions WHERE session_id = ?", (session_id,))
        if row is None:
            raise NotFoundError(f"unknown session {session_id!r}")
        return row

    def _course_row(self, course_id: str):
        row = self.db.query_one("SELECT * FROM courses WHERE course_id = ?", (course_id,))
        if row is None:
            raise NotFoundError(f"unknown course {course_id!r}")
        return row

    def _schedule_for(self, session_row) -> rules.BlockSchedule:
        return rules.compute_block_schedule(
            parse_timestamp(session_row["start_time"]),
            parse_timestamp(session_row["end_time"]),
            self.interval_minutes,
        )

    def _enrolled_ids(self, course_id: str) -> list[str]:
        rows = self.db.query(
            "SELECT student_id FROM enrollments WHERE course_id = ? ORDER BY student_id",
            (course_id,),
        )
        return [r["student_id"] for r in rows]

    def _require_professor_of(self, principal: UserPrincipal, course_row):
        if principal.role != "professor":
            raise ForbiddenError(f"role {principal.role!r} may not do this")
        if course_row["professor_id"] != principal.user_id:
            raise ForbiddenError(
                f"{principal.user_id} does not teach {course_row['course_id']}"
            )

    # ----- clock-driven orchestration ------------------------------------

    def advance_clock(self, to: datetime) -> dict:
        if not isinstance(self.clock, VirtualClock):
            raise ConflictError("clock advance only makes sense in virtual clock mode")
        self.clock.advance_to(to)
        self.tick(to)
        return {"now": format_timestamp(to)}

    def tick(self, now: datetime) -> None:
        """Run every due lifecycle transition, in chronological order."""
        with self._tick_lock:
            lead = timedelta(minutes=CONNECT_LEAD_MINUTES)
            events: list[tuple[datetime, int, str]] = []
            for row in self.db.query(
                "SELECT session_id, start_time, state FROM sessions "
                "WHERE state IN ('scheduled', 'connecting')"
            ):
                start = parse_timestamp(row["start_time"])
                if row["state"] == "scheduled" and start - lead <= now:
                    events.append((start - lead, 0, row["session_id"]))
                if start <= now:
                    events.append((start, 1, row["session_id"]))
            for _, kind, session_id in sorted(events):
                if kind == 0:
                    self._connect_camera(session_id)
                else:
                    self._dispatch_job(session_id)

    def _set_state(self, session_id: str, state: str, *, job_id=None, fail_reason=None):
        with self.db.write() as conn:
            conn.execute(
                "UPDATE sessions SET state = ?, "
                "job_id = COALESCE(?, job_id), fail_reason = COALESCE(?, fail_reason) "
                "WHERE session_id = ?",
                (state, job_id, fail_reason, session_id),
            )

    def _close_handle(self, session_id: str):
        handle = self._handles.pop(session_id, None)
        if handle is not None:
            handle.close()

    def _connect_camera(self, session_id: str):
        with self._session_lock(session_id):
            row = self._session_row(session_id)
            if row["state"] != "scheduled":
                return
            start = parse_timestamp(row["start_time"])
            end = parse_timestamp(row["end_time"])
            try:
                handle = self.bank.connect(
                    row["camera_id"],
                    start - timedelta(minutes=CONNECT_LEAD_MINUTES),
                    start,
                    end,
                )
            except SnapAttendError as exc:
                self._set_state(session_id, "failed", fail_reason=f"camera connect: {exc}")
                return
            self._handles[session_id] = handle
            self._set_state(session_id, "connecting")

    def _dispatch_job(self, session_id: str):
        with self._session_lock(session_id):
            row = self._session_row(session_id)
            if row["state"] != "connecting":
                return
            roster = []
            for sid in self._enrolled_ids(row["course_id"]):
                srow = self.db.query_one(
                    "SELECT embedding FROM students WHERE student_id = ?", (sid,)
                )
                roster.append(
                    RosterEntry(student_id=sid, embedding=embedding_from_text(srow["embedding"]))
                )
            job = SessionJob(
                session_id=session_id,
                camera_id=row["camera_id"],
                start_time=parse_timestamp(row["start_time"]),
                end_time=parse_timestamp(row["end_time"]),
                roster=tuple(roster),
                interval_minutes=self.interval_minutes,
                tau=self.tau,
                embedding_dim=roster[0].embedding.shape[0] if roster else 128,
            )
            try:
                job_id = self.engine_client.submit_job(job_to_payload(job))
            except Exception as exc:
                self._close_handle(session_id)
                self._set_state(session_id, "failed", fail_reason=f"engine dispatch: {exc}")
                return
            self._set_state(session_id, "running", job_id=job_id)

    @contextmanager
    def snapshot_source_for(self, job):
        """In-process wiring: the engine captures through the connection
        this backend opened at T-5. The backend keeps ownership; the
        handle closes at finalize/failure."""
        handle = self._handles.get(job.session_id)
        if handle is None:
            raise ConflictError(f"no open camera connection for session {job.session_id}")
        yield lambda t: handle.capture(t).detections

    # ----- engine callbacks ----------------------------------------------

    def ingest_block_result(
        self, session_id: str, block_index: int, assignments: list[dict], degraded: bool
    ) -> dict:
        with self._session_lock(session_id):
            row = self._session_row(session_id)
            if row["state"] not in ("running", "complete"):
                raise ConflictError(
                    f"session {session_id} in state {row['state']} accepts no block results"
                )
            schedule = self._schedule_for(row)
            if not (0 <= block_index < schedule.block_count):
                raise InvalidInputError(
                    f"block {block_index} out of range for {schedule.block_count}-block session"
                )
            enrolled = set(self._enrolled_ids(row["course_id"]))
            students = []
            for a in assignments:
                sid = a.get("student_id")
                if sid not in enrolled:
                    raise InvalidInputError(f"assignment for non-enrolled student {sid!r}")
                students.append(sid)
            with self.db.write() as conn:
                conn.execute(
                    "INSERT OR REPLACE INTO session_blocks (session_id, block_index, degraded) "
                    "VALUES (?, ?, ?)",
                    (session_id, block_index, 1 if degraded else 0),
                )
                for sid in students:
                    conn.execute(
                        "INSERT OR IGNORE INTO presence_blocks "
                        "(session_id, block_index, student_id) VALUES (?, ?, ?)",
                        (session_id, block_index, sid),
                    )
            return {"session_id": session_id, "block_index": block_index, "accepted": True}

    def ingest_complete(self, session_id: str, payload: dict) -> dict:
        status = payload.get("status", "complete")
        with self._session_lock(session_id):
            row = self._session_row(session_id)
            state = row["state"]
            if status == "failed":
                if state == "failed":
                    return {"session_id": session_id, "state": "failed"}
                if state == "complete":
                    raise ConflictError(f"session {session_id} already finalized")
                self._close_handle(session_id)
                self._set_state(
                    session_id, "failed",
                    fail_reason=payload.get("reason", "recognition failed"),
                )
                return {"session_id": session_id, "state": "failed"}

            if state == "complete":  # replayed completion: idempotent no-op
                return {"session_id": session_id, "state": "complete"}
            if state != "running":
                raise ConflictError(
                    f"session {session_id} in state {state} cannot be finalized"
                )

            presence = payload.get("presence")
            if presence is not None:
                self._ingest_matrix(session_id, row, presence)
            self._finalize_locked(session_id, row)
            return {"session_id": session_id, "state": "complete"}

    def _ingest_matrix(self, session_id: str, row, presence: dict):
        schedule = self._schedule_for(row)
        if int(presence.get("block_count", -1)) != schedule.block_count:
            raise InvalidInputError(
                f"presence matrix has {presence.get('block_count')} blocks, "
                f"session has {schedule.block_count}"
            )
        enrolled = set(self._enrolled_ids(row["course_id"]))
        rows = presence.get("rows", {})
        unknown = set(rows) - enrolled
        if unknown:
            raise InvalidInputError(f"presence rows for non-enrolled students {sorted(unknown)}")
        with self.db.write() as conn:
            for k in presence.get("degraded_blocks", []):
                conn.execute(
                    "INSERT OR REPLACE INTO session_blocks (session_id, block_index, degraded) "
                    "VALUES (?, ?, 1)",
                    (session_id, int(k)),
                )
            for sid, bits in rows.items():
                for k, bit in enumerate(bits):
                    if bit:
                        conn.execute(
                            "INSERT OR IGNORE INTO presence_blocks "
                            "(session_id, block_index, student_id) VALUES (?, ?, ?)",
                            (session_id, k, sid),
                        )

    def finalize_session(self, session_id: str) -> list[rules.AttendanceRecord]:
        """Convert accumulated presence into attendance records (idempotent)."""
        with self._session_lock(session_id):
            row = self._session_row(session_id)
            if row["state"] == "complete":
                return self._stored_records(session_id)
            if row["state"] != "running":
                raise ConflictError(
                    f"session {session_id} in state {row['state']} cannot be finalized"
                )
            return self._finalize_locked(session_id, row)

    def _finalize_locked(self, session_id: str, row) -> list[rules.AttendanceRecord]:
        schedule = self._schedule_for(row)
        course = self._course_row(row["course_id"])
        policy = rules.ThresholdPolicy(
            course_default_n=course["default_threshold_n"],
            session_override_n=row["threshold_override"],
        )
        records = []
        with self.db.write() as conn:
            for sid in self._enrolled_ids(row["course_id"]):
                present_blocks = {
                    r["block_index"]
                    for r in self.db.query(
                        "SELECT block_index FROM presence_blocks "
                        "WHERE session_id = ? AND student_id = ?",
                        (session_id, sid),
                    )
                }
                vector = rules.PresenceVector(
                    student_id=sid,
                    blocks=tuple(k in present_blocks for k in range(schedule.block_count)),
                )
                record = rules.decide_class_attendance(
                    vector, policy, session_id=session_id, block_count=schedule.block_count
                )
                records.append(record)
                conn.execute(
                    "INSERT OR REPLACE INTO attendance_records (session_id, student_id, "
                    "blocks_present, threshold_used, present, source, override_note) "
                    "VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (
                        session_id, sid, record.blocks_present, record.threshold_used,
                        1 if record.present else 0, record.source.value, None,
                    ),
                )
            conn.execute(
                "UPDATE sessions SET state = 'complete' WHERE session_id = ?", (session_id,)
            )
        self._close_handle(session_id)
        return records

    def _stored_records(self, session_id: str) -> list[rules.AttendanceRecord]:
        out = []
        for r in self.db.query(
            "SELECT * FROM attendance_records WHERE session_id = ? ORDER BY student_id",
            (session_id,),
        ):
            out.append(
                rules.AttendanceRecord(
                    student_id=r["student_id"],
                    session_id=r["session_id"],
                    blocks_present=r["blocks_present"],
                    threshold_used=r["threshold_used"],
                    present=bool(r["present"]),
                    source=rules.RecordSource(r["source"]),
                    override_note=r["override_note"],
                )
            )
        return out

    # ----- mutations ------------------------------------------------------

    def set_session_threshold(self, principal: UserPrincipal, session_id: str, n: int) -> dict:
        if not isinstance(n, int) or n < 0:
            raise InvalidInputError("threshold must be a non-negative integer")
        with self._session_lock(session_id):
            row = self._session_row(session_id)
            self._require_professor_of(principal, self._course_row(row["course_id"]))
            if row["state"] == "complete":
                raise ConflictError(f"session {session_id} is already finalized")
            with self.db.write() as conn:
                conn.execute(
                    "UPDATE sessions SET threshold_override = ? WHERE session_id = ?",
                    (n, session_id),
                )
        return {"session_id": session_id, "threshold_override": n}

    def set_course_threshold(self, principal: UserPrincipal, course_id: str, n: int) -> dict:
        if not isinstance(n, int) or n < 0:
            raise InvalidInputError("threshold must be a non-negative integer")
        course = self._course_row(course_id)
        self._require_professor_of(principal, course)
        with self.db.write() as conn:
            conn.execute(
                "UPDATE courses SET default_threshold_n = ? WHERE course_id = ?",
                (n, course_id),
            )
        return {"course_id": course_id, "default_threshold_n": n}

    def _room_row(self, room_number: str):
        row = self.db.query_one("SELECT * FROM rooms WHERE room_number = ?", (room_number,))
        if row is None:
            raise NotFoundError(f"unknown room {room_number!r}")
        return row

    def set_session_room(self, principal: UserPrincipal, session_id: str, room_number: str) -> dict:
        room = self._room_row(room_number)
        with self._session_lock(session_id):
            row = self._session_row(session_id)
            self._require_professor_of(principal, self._course_row(row["course_id"]))
            if row["state"] != "scheduled":
                raise ConflictError(
                    f"session {session_id} already {row['state']}; room is frozen"
                )
            with self.db.write() as conn:
                conn.execute(
                    "UPDATE sessions SET room_number = ?, camera_id = ? WHERE session_id = ?",
                    (room_number, room["camera_id"], session_id),
                )
        return {"session_id": session_id, "room_number": room_number,
                "camera_id": room["camera_id"]}

    def set_course_room(self, principal: UserPrincipal, course_id: str, room_number: str) -> dict:
        if principal.role != "admin":
            raise ForbiddenError("only administrators may move a whole course")
        course = self._course_row(course_id)
        room = self._room_row(room_number)
        with self.db.write() as conn:
            conn.execute(
                "UPDATE courses SET room_number = ?, camera_id = ? WHERE course_id = ?",
                (room_number, room["camera_id"], course_id),
            )
            conn.execute(
                "UPDATE sessions SET room_number = ?, camera_id = ? "
                "WHERE course_id = ? AND state = 'scheduled'",
                (room_number, room["camera_id"], course_id),
            )
        return {"course_id": course_id, "room_number": room_number,
                "camera_id": room["camera_id"]}

    def override_attendance(
        self, principal: UserPrincipal, session_id: str, student_id: str,
        present: bool, note: str,
    ) -> dict:
        if principal.role != "admin":
            raise ForbiddenError("only administrators may override attendance")
        with self._session_lock(session_id):
            self._session_row(session_id)
            row = self.db.query_one(
                "SELECT * FROM attendance_records WHERE session_id = ? AND student_id = ?",
                (session_id, student_id),
            )
            if row is None:
                raise NotFoundError(
                    f"no attendance record for {student_id} in {session_id} "
                    "(session not finalized?)"
                )
            record = rules.AttendanceRecord(
                student_id=row["student_id"],
                session_id=row["session_id"],
                blocks_present=row["blocks_present"],
                threshold_used=row["threshold_used"],
                present=bool(row["present"]),
                source=rules.RecordSource(row["source"]),
                override_note=row["override_note"],
            )
            updated = rules.apply_admin_override(record, present, note)
            with self.db.write() as conn:
                conn.execute(
                    "UPDATE attendance_records SET present = ?, source = ?, override_note = ? "
                    "WHERE session_id = ? AND student_id = ?",
                    (
                        1 if updated.present else 0, updated.source.value,
                        updated.override_note, session_id, student_id,
                    ),
                )
                conn.execute(
                    "INSERT INTO overrides (session_id, student_id, admin_id, present, "
                    "note, applied_at) VALUES (?, ?, ?, ?, ?, ?)",
                    (
                        session_id, student_id, principal.user_id,
                        1 if present else 0, note, format_timestamp(self.clock.now()),
                    ),
                )
        return self.session_attendance(principal, session_id, student_id)

    # ----- queries ---------------------------------------------------------

    def student_standing(
        self, principal: UserPrincipal, student_id: str, course_id: str
    ) -> dict:
        course = self._course_row(course_id)
        if principal.role == "student":
            if principal.user_id != student_id:
                raise ForbiddenError("students may only read their own standing")
        elif principal.role == "professor":
            if course["professor_id"] != principal.user_id:
                raise ForbiddenError(f"{principal.user_id} does not teach {course_id}")
        enrolled = self._enrolled_ids(course_id)
        if student_id not in enrolled:
            raise NotFoundError(f"{student_id} is not enrolled in {course_id}")
        rows = self.db.query(
            "SELECT ar.* FROM attendance_records ar JOIN sessions s "
            "ON ar.session_id = s.session_id "
            "WHERE s.course_id = ? AND ar.student_id = ? ORDER BY s.start_time",
            (course_id, student_id),
        )
        records = [
            rules.AttendanceRecord(
                student_id=r["student_id"], session_id=r["session_id"],
                blocks_present=r["blocks_present"], threshold_used=r["threshold_used"],
                present=bool(r["present"]), source=rules.RecordSource(r["source"]),
                override_note=r["override_note"],
            )
            for r in rows
        ]
        standing = rules.course_standing(
            course_id, student_id, records,
            total_scheduled=course["total_scheduled_sessions"],
            required_percent=course["required_percent"],
        )
        return {
            "course_id": course_id,
            "student_id": student_id,
            "sessions_held": standing.sessions_held,
            "sessions_attended": standing.sessions_attended,
            "total_scheduled": standing.total_scheduled,
            "required_percent": standing.required_percent,
            "allowed_misses": standing.allowed_misses,
            "sessions": [
                {
                    "session_id": r.session_id,
                    "present": r.present,
                    "blocks_present": r.blocks_present,
                    "threshold_used": r.threshold_used,
                    "source": r.source.value,
                }
                for r in records
            ],
        }

    def session_attendance(
        self, principal: UserPrincipal, session_id: str, student_id: str
    ) -> dict:
        row = self._session_row(session_id)
        course = self._course_row(row["course_id"])
        if principal.role == "student" and principal.user_id != student_id:
            raise ForbiddenError("students may only read their own attendance")
        if principal.role == "professor" and course["professor_id"] != principal.user_id:
            raise ForbiddenError(f"{principal.user_id} does not teach {row['course_id']}")
        if student_id not in self._enrolled_ids(row["course_id"]):
            raise NotFoundError(f"{student_id} is not enrolled in {row['course_id']}")
        schedule = self._schedule_for(row)
        bits = {
            r["block_index"]
            for r in self.db.query(
                "SELECT block_index FROM presence_blocks "
                "WHERE session_id = ? AND student_id = ?",
                (session_id, student_id),
            )
        }
        blocks = [k in bits for k in range(schedule.block_count)]
        base = {
            "session_id": session_id,
            "student_id": student_id,
            "state": row["state"],
            "block_count": schedule.block_count,
            "blocks": blocks,
        }
        record = self.db.query_one(
            "SELECT * FROM attendance_records WHERE session_id = ? AND student_id = ?",
            (session_id, student_id),
        )
        if record is not None:
            base.update(
                finalized=True,
                blocks_present=record["blocks_present"],
                threshold_used=record["threshold_used"],
                present=bool(record["present"]),
                source=record["source"],
                override_note=record["override_note"],
            )
        else:
            policy = rules.ThresholdPolicy(
                course_default_n=course["default_threshold_n"],
                session_override_n=row["threshold_override"],
            )
            base.update(
                finalized=False,
                blocks_present=len(bits),
                threshold_used=rules.effective_threshold(policy),
                present=None,
                source=None,
                override_note=None,
            )
        return base

    def class_total(self, principal: UserPrincipal, course_id: str, session_id: str) -> dict:
        course = self._course_row(course_id)
        if principal.role == "student":
            raise ForbiddenError("class totals are for professors and administrators")
        if principal.role == "professor":
            self._require_professor_of(principal, course)
        row = self._session_row(session_id)
        if row["course_id"] != course_id:
            raise NotFoundError(f"session {session_id} does not belong to {course_id}")
        total = None
        if row["state"] == "complete":
            total = self.db.query_one(
                "SELECT COUNT(*) AS n FROM attendance_records "
                "WHERE session_id = ? AND present = 1",
                (session_id,),
            )["n"]
        return {
            "course_id": course_id,
            "session_id": session_id,
            "state": row["state"],
            "enrolled": len(self._enrolled_ids(course_id)),
            "present_count": total,
        }

    def session_detail(self, principal: UserPrincipal, session_id: str) -> dict:
        row = self._session_row(session_id)
        course = self._course_row(row["course_id"])
        if principal.role == "student":
            if principal.user_id not in self._enrolled_ids(row["course_id"]):
                raise ForbiddenError("not enrolled in this course")
        elif principal.role == "professor":
            if course["professor_id"] != principal.user_id:
                raise ForbiddenError(f"{principal.user_id} does not teach {row['course_id']}")
        schedule = self._schedule_for(row)
        degraded = [
            r["block_index"]
            for r in self.db.query(
                "SELECT block_index FROM session_blocks "
                "WHERE session_id = ? AND degraded = 1 ORDER BY block_index",
                (session_id,),
            )
        ]
        policy = rules.ThresholdPolicy(
            course_default_n=course["default_threshold_n"],
            session_override_n=row["threshold_override"],
        )
        return {
            "session_id": session_id,
            "course_id": row["course_id"],
            "start": row["start_time"],
            "end": row["end_time"],
            "room_number": row["room_number"],
            "camera_id": row["camera_id"],
            "state": row["state"],
            "block_count": schedule.block_count,
            "threshold_override": row["threshold_override"],
            "effective_threshold": rules.effective_threshold(policy),
            "degraded_blocks": degraded,
            "fail_reason": row["fail_reason"],
        }

    def list_course_sessions(self, principal: UserPrincipal, course_id: str) -> list[dict]:
        course = self._course_row(course_id)
        if principal.role == "student":
            if principal.user_id not in self._enrolled_ids(course_id):
                raise ForbiddenError("not enrolled in this course")
        elif principal.role == "professor":
            if course["professor_id"] != principal.user_id:
                raise ForbiddenError(f"{principal.user_id} does not teach {course_id}")
        rows = self.db.query(
            "SELECT session_id, start_time, end_time, room_number, state FROM sessions "
            "WHERE course_id = ? ORDER BY start_time, session_id",
            (course_id,),
        )
        return [dict(r) for r in rows]
