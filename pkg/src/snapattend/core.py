"""Pure attendance semantics: block schedules, threshold decisions,
course aggregation, allowed-misses arithmetic, override precedence.

Everything here is a pure function on immutable values; no I/O, no clocks.
The backend and the simulator both call into this module so that the
decision logic exists exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timedelta
from enum import Enum

from .errors import (
    InconsistentInputError,
    InconsistentPresenceError,
    InvalidConfigError,
    InvalidInputError,
    InvalidSessionError,
)

DEFAULT_INTERVAL_MINUTES = 10


class RecordSource(str, Enum):
    COMPUTED = "computed"
    ADMIN_OVERRIDE = "admin_override"


@dataclass(frozen=True)
class BlockSchedule:
    """Snapshot timetable of one class session.

    The first snapshot falls on the session start; further snapshots follow
    every ``interval_minutes`` while strictly before the session end, so the
    block count is ceil(duration / interval).
    """

    session_start: datetime
    session_end: datetime
    interval_minutes: int
    snapshot_times: tuple[datetime, ...]

    @property
    def block_count(self) -> int:
        return len(self.snapshot_times)

    def block_index_at(self, t: datetime) -> int:
        """Index of the block containing instant ``t``.

        Raises InvalidInputError when ``t`` lies outside [start, end).
        """
        if t < self.session_start or t >= self.session_end:
            raise InvalidInputError(
                f"{t.isoformat()} outside session window "
                f"[{self.session_start.isoformat()}, {self.session_end.isoformat()})"
            )
        delta = t - self.session_start
        return int(delta.total_seconds() // (self.interval_minutes * 60))


def compute_block_schedule(
    start: datetime, end: datetime, interval_minutes: int = DEFAULT_INTERVAL_MINUTES
) -> BlockSchedule:
    """Lay out snapshot times for a session.

    Snapshots run from ``start`` every ``interval_minutes``, each strictly
    before ``end``.
    """
    if end <= start:
        raise InvalidSessionError(f"session end {end} must be after start {start}")
    if interval_minutes <= 0:
        raise InvalidConfigError(f"snapshot interval must be >= 1 minute, got {interval_minutes}")
    times = []
    t = start
    while t < end:
        times.append(t)
        t = t + timedelta(minutes=interval_minutes)
    return BlockSchedule(
        session_start=start,
        session_end=end,
        interval_minutes=interval_minutes,
        snapshot_times=tuple(times),
    )


@dataclass(frozen=True)
class ThresholdPolicy:
    """Minimum blocks required for attendance; a per-session override
    wins over the course default."""

    course_default_n: int
    session_override_n: int | None = None

    def __post_init__(self):
        if self.course_default_n < 0:
            raise InvalidInputError("course default threshold must be >= 0")
        if self.session_override_n is not None and self.session_override_n < 0:
            raise InvalidInputError("session threshold override must be >= 0")


def effective_threshold(policy: ThresholdPolicy) -> int:
    if policy.session_override_n is not None:
        return policy.session_override_n
    return policy.course_default_n


@dataclass(frozen=True)
class PresenceVector:
    """One student's per-block presence bits for a single session."""

    student_id: str
    blocks: tuple[bool, ...]

    @property
    def blocks_present(self) -> int:
        return sum(1 for b in self.blocks if b)


@dataclass(frozen=True)
class AttendanceRecord:
    """Final per-(student, session) decision plus provenance."""

    student_id: str
    session_id: str
    blocks_present: int
    threshold_used: int
    present: bool
    source: RecordSource = RecordSource.COMPUTED
    override_note: str | None = None


def decide_class_attendance(
    presence: PresenceVector,
    policy: ThresholdPolicy,
    *,
    session_id: str,
    block_count: int,
) -> AttendanceRecord:
    """Decide attendance for one session: present iff the student appears
    in at least the effective threshold of blocks.

    A threshold of 0 grants attendance unconditionally (the "attendance
    optional today" case).
    """
    if len(presence.blocks) != block_count:
        raise InconsistentPresenceError(
            f"presence vector for {presence.student_id} has {len(presence.blocks)} "
            f"blocks, session {session_id} has {block_count}"
        )
    n = effective_threshold(policy)
    attended = presence.blocks_present
    return AttendanceRecord(
        student_id=presence.student_id,
        session_id=session_id,
        blocks_present=attended,
        threshold_used=n,
        present=attended >= n,
        source=RecordSource.COMPUTED,
    )


def course_attendance_summary(records: list[AttendanceRecord]) -> tuple[int, int]:
    """(sessions_held, sessions_attended) over one student's records.

    All records must belong to the same student and to distinct sessions.
    """
    if records:
        students = {r.student_id for r in records}
        if len(students) > 1:
            raise InconsistentInputError(f"records mix students: {sorted(students)}")
        sessions = [r.session_id for r in records]
        if len(set(sessions)) != len(sessions):
            raise InconsistentInputError("records contain duplicate sessions")
    held = len(records)
    attended = sum(1 for r in records if r.present)
    return held, attended


def allowed_misses(attended: int, held: int, total_scheduled: int, required_percent: int) -> int:
    """How many of the remaining sessions the student can skip and still
    finish at or above the course requirement, assuming they attend every
    session they do not skip.

    Exact integer arithmetic: with C = ceil(required_percent * total / 100),
    the answer is attended + (total - held) - C, clamped to
    [0, sessions remaining] (one cannot miss more sessions than remain).
    """
    if not (0 <= attended <= held <= total_scheduled):
        raise InvalidInputError(
            f"need 0 <= attended({attended}) <= held({held}) <= total({total_scheduled})"
        )
    if not (0 <= required_percent <= 100):
        raise InvalidInputError(f"required_percent must be in [0, 100], got {required_percent}")
    remaining = total_scheduled - held
    needed = -(-required_percent * total_scheduled // 100)  # ceil without floats
    return min(remaining, max(0, attended + remaining - needed))


@dataclass(frozen=True)
class CourseStanding:
    """A student's running position in one course."""

    course_id: str
    student_id: str
    sessions_held: int
    sessions_attended: int
    total_scheduled: int
    required_percent: int
    allowed_misses: int


def course_standing(
    course_id: str,
    student_id: str,
    records: list[AttendanceRecord],
    *,
    total_scheduled: int,
    required_percent: int,
) -> CourseStanding:
    """Aggregate finalized records into a CourseStanding."""
    held, attended = course_attendance_summary(records)
    if held > total_scheduled:
        raise InvalidInputError(
            f"{held} sessions held exceeds {total_scheduled} scheduled for {course_id}"
        )
    return CourseStanding(
        course_id=course_id,
        student_id=student_id,
        sessions_held=held,
        sessions_attended=attended,
        total_scheduled=total_scheduled,
        required_percent=required_percent,
        allowed_misses=allowed_misses(attended, held, total_scheduled, required_percent),
    )


def apply_admin_override(record: AttendanceRecord, present: bool, note: str) -> AttendanceRecord:
    """Replace the decision on a record, keeping the computed evidence.

    Last write wins; the note is mandatory so an override is never silent.
    """
    if not note or not note.strip():
        raise InvalidInputError("override note must not be empty")
    return replace(record, present=present, source=RecordSource.ADMIN_OVERRIDE, override_note=note)
