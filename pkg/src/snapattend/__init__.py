"""Snapshot-based class attendance.

Scheduled per-class recognition over simulated camera feeds, block-wise
presence accumulation, threshold attendance decisions, and a role-based
management API, plus a scenario simulator with a brute-force oracle.
"""

from .core import (
    AttendanceRecord,
    BlockSchedule,
    CourseStanding,
    PresenceVector,
    RecordSource,
    ThresholdPolicy,
    allowed_misses,
    apply_admin_override,
    compute_block_schedule,
    course_attendance_summary,
    course_standing,
    decide_class_attendance,
    effective_threshold,
)
from .embeddings import as_embedding, cosine_distance, normalized
from .matching import Assignment, RosterEntry, match_snapshot

__all__ = [
    "AttendanceRecord",
    "Assignment",
    "BlockSchedule",
    "CourseStanding",
    "PresenceVector",
    "RecordSource",
    "RosterEntry",
    "ThresholdPolicy",
    "allowed_misses",
    "apply_admin_override",
    "as_embedding",
    "compute_block_schedule",
    "cosine_distance",
    "course_attendance_summary",
    "course_standing",
    "decide_class_attendance",
    "effective_threshold",
    "match_snapshot",
    "normalized",
]

__version__ = "0.1.0"
