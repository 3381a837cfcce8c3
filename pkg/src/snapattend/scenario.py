"""Scenario files: the ground-truth script of who is physically in which
blocks of which sessions. Scenarios drive the simulated cameras and are
the reference the verification oracle reads directly.

JSON schema (top level):
    seed            int
    noise_sigma     float >= 0              (default 0.0)
    embedding_dim   int                     (default 128)
    students        [{"id": str, "embedding": [floats] | "auto"}]
    sessions        [{"id": str, "camera_id": str,
                      "start": ISO-8601, "end": ISO-8601,
                      "present": {student_id: [block indices]}}]

Snapshots run every 10 minutes from session start, so a session's block
count is ceil(duration / 10). "auto" embeddings are seeded random unit
vectors; explicit embeddings are normalized on load.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .core import DEFAULT_INTERVAL_MINUTES, BlockSchedule, compute_block_schedule
from .embeddings import DEFAULT_DIM, normalized
from .errors import ScenarioParseError, ScenarioValidationError, SnapAttendError
from .randstream import CounterStream, unit_vector
from .timeutil import format_timestamp, parse_timestamp

CONNECT_LEAD_MINUTES = 5  # cameras come up this long before class


@dataclass(frozen=True)
class ScenarioSession:
    session_id: str
    camera_id: str
    start: datetime
    end: datetime
    present: dict[str, frozenset[int]]
    schedule: BlockSchedule

    @property
    def block_count(self) -> int:
        return self.schedule.block_count

    def scripted_blocks(self, student_id: str) -> frozenset[int]:
        return self.present.get(student_id, frozenset())


@dataclass(frozen=True)
class Scenario:
    seed: int
    noise_sigma: float
    embedding_dim: int
    student_ids: tuple[str, ...]
    embeddings: dict[str, np.ndarray]
    sessions: tuple[ScenarioSession, ...]

    def session(self, session_id: str) -> ScenarioSession:
        for s in self.sessions:
            if s.session_id == session_id:
                return s
        raise SnapAttendError(f"no session {session_id!r} in scenario")


def _require(cond: bool, message: str):
    if not cond:
        raise ScenarioValidationError(message)


def parse_scenario(data: dict) -> Scenario:
    """Validate a decoded scenario document."""
    _require(isinstance(data, dict), "scenario root must be a JSON object")
    _require("seed" in data, "missing top-level key 'seed'")
    _require(isinstance(data["seed"], int), "'seed' must be an integer")
    seed = data["seed"]

    sigma = data.get("noise_sigma", 0.0)
    _require(isinstance(sigma, (int, float)) and sigma >= 0, "'noise_sigma' must be >= 0")
    dim = data.get("embedding_dim", DEFAULT_DIM)
    _require(isinstance(dim, int) and dim >= 2, "'embedding_dim' must be an integer >= 2")

    _require(
        isinstance(data.get("students"), list) and data["students"],
        "'students' must be a non-empty list",
    )
    student_ids: list[str] = []
    embeddings: dict[str, np.ndarray] = {}
    for i, entry in enumerate(data["students"]):
        _require(isinstance(entry, dict), f"students[{i}] must be an object")
        sid = entry.get("id")
        _require(isinstance(sid, str) and sid, f"students[{i}] needs a non-empty string 'id'")
        _require(sid not in embeddings, f"duplicate student id {sid!r}")
        emb = entry.get("embedding", "auto")
        if emb == "auto":
            embeddings[sid] = unit_vector(dim, seed, "student", sid)
        else:
            _require(
                isinstance(emb, list) and len(emb) == dim,
                f"student {sid!r}: embedding must be 'auto' or a list of {dim} numbers",
            )
            try:
                embeddings[sid] = normalized(np.array(emb, dtype=np.float64))
            except SnapAttendError as exc:
                raise ScenarioValidationError(f"student {sid!r}: {exc}") from None
        student_ids.append(sid)

    _require(isinstance(data.get("sessions"), list), "'sessions' must be a list")
    sessions: list[ScenarioSession] = []
    seen_ids: set[str] = set()
    for i, entry in enumerate(data["sessions"]):
        _require(isinstance(entry, dict), f"sessions[{i}] must be an object")
        gid = entry.get("id")
        _require(isinstance(gid, str) and gid, f"sessions[{i}] needs a non-empty string 'id'")
        _require(gid not in seen_ids, f"duplicate session id {gid!r}")
        seen_ids.add(gid)
        cam = entry.get("camera_id")
        _require(isinstance(cam, str) and cam, f"session {gid!r}: 'camera_id' required")
        try:
            start = parse_timestamp(entry["start"])
            end = parse_timestamp(entry["end"])
        except KeyError as exc:
            raise ScenarioValidationError(f"session {gid!r}: missing {exc.args[0]!r}") from None
        except SnapAttendError as exc:
            raise ScenarioValidationError(f"session {gid!r}: {exc}") from None
        _require(end > start, f"session {gid!r}: end must be after start")
        schedule = compute_block_schedule(start, end, DEFAULT_INTERVAL_MINUTES)

        raw_present = entry.get("present", {})
        _require(isinstance(raw_present, dict), f"session {gid!r}: 'present' must be an object")
        present: dict[str, frozenset[int]] = {}
        for sid, blocks in raw_present.items():
            _require(
                sid in embeddings,
                f"session {gid!r}: presence references undeclared student {sid!r}",
            )
            _require(
                isinstance(blocks, list) and all(isinstance(b, int) for b in blocks),
                f"session {gid!r}: blocks for {sid!r} must be a list of integers",
            )
            for b in blocks:
                _require(
                    0 <= b < schedule.block_count,
                    f"session {gid!r}: block index {b} for {sid!r} out of range "
                    f"(session has {schedule.block_count} blocks)",
                )
            present[sid] = frozenset(blocks)
        sessions.append(
            ScenarioSession(
                session_id=gid, camera_id=cam, start=start, end=end,
                present=present, schedule=schedule,
            )
        )

    # one camera serves one class at a time, including the connect lead
    lead = timedelta(minutes=CONNECT_LEAD_MINUTES)
    by_camera: dict[str, list[ScenarioSession]] = {}
    for s in sessions:
        by_camera.setdefault(s.camera_id, []).append(s)
    for cam, group in by_camera.items():
        group.sort(key=lambda s: s.start)
        for a, b in zip(group, group[1:]):
            _require(
                a.end <= b.start - lead,
                f"camera {cam!r} double-booked: session {a.session_id!r} overlaps "
                f"{b.session_id!r} (including the {CONNECT_LEAD_MINUTES}-minute connect lead)",
            )

    return Scenario(
        seed=seed,
        noise_sigma=float(sigma),
        embedding_dim=dim,
        student_ids=tuple(student_ids),
        embeddings=embeddings,
        sessions=tuple(sessions),
    )


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    raw = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(
            f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from None
    try:
        return parse_scenario(data)
    except ScenarioValidationError as exc:
        raise ScenarioValidationError(f"{path}: {exc.message}") from None


def generate_random_scenario(
    n_students: int,
    n_sessions: int,
    *,
    seed: int,
    noise_sigma: float = 0.0,
    embedding_dim: int = DEFAULT_DIM,
    blocks_low: int = 5,
    blocks_high: int = 9,
    n_cameras: int = 10,
    first_start: datetime = datetime(2026, 3, 2, 9, 0),
    attend_prob: float = 0.85,
    block_prob: float = 0.75,
) -> dict:
    """Deterministic random scenario document (JSON-ready dict).

    Sessions are laid out in waves: within a wave every session runs on its
    own camera and the time windows overlap, so a full run exercises
    concurrent recognition; consecutive waves on one camera leave room for
    the connect lead.
    """
    rng = CounterStream(seed, "scenario-gen")
    students = [{"id": f"s{i + 1:03d}", "embedding": "auto"} for i in range(n_students)]

    sessions = []
    for j in range(n_sessions):
        wave, slot = divmod(j, n_cameras)
        blocks = blocks_low + int(rng.uniforms(1)[0] * (blocks_high - blocks_low + 1))
        blocks = min(blocks, blocks_high)
        start = first_start + timedelta(hours=2 * wave, minutes=5 * slot)
        end = start + timedelta(minutes=10 * blocks)
        present = {}
        for s in students:
            u = rng.uniforms(1 + blocks)
            if u[0] < attend_prob:
                scripted = [b for b in range(blocks) if u[1 + b] < block_prob]
                if scripted:
                    present[s["id"]] = scripted
        sessions.append(
            {
                "id": f"g{j + 1:03d}",
                "camera_id": f"cam{slot + 1:02d}",
                "start": format_timestamp(start),
                "end": format_timestamp(end),
                "present": present,
            }
        )

    return {
        "seed": seed,
        "noise_sigma": noise_sigma,
        "embedding_dim": embedding_dim,
        "students": students,
        "sessions": sessions,
    }
