"""Embedded relational store for the backend.

sqlite in WAL mode; one connection per thread, writes serialized by a
process-wide lock so callback bursts from many recognition workers stay
safe. Entity set: users, students, rooms, courses, enrollments, sessions,
presence_blocks, session_blocks (delivery metadata), attendance_records,
overrides (audit trail).
"""

from __future__ import annotations

import json
import sqlite3
import threading
from contextlib import contextmanager

import numpy as np

SCHEMA = """
CREATE TABLE IF NOT EXISTS users (
    user_id   TEXT PRIMARY KEY,
    role      TEXT NOT NULL CHECK (role IN ('student', 'professor', 'admin')),
    password  TEXT NOT NULL,
    token     TEXT NOT NULL UNIQUE
);
CREATE TABLE IF NOT EXISTS students (
    student_id TEXT PRIMARY KEY,
    name       TEXT NOT NULL,
    embedding  TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS rooms (
    room_number TEXT PRIMARY KEY,
    camera_id   TEXT NOT NULL UNIQUE
);
CREATE TABLE IF NOT EXISTS courses (
    course_id                TEXT PRIMARY KEY,
    professor_id             TEXT NOT NULL,
    room_number              TEXT NOT NULL,
    camera_id                TEXT NOT NULL,
    default_threshold_n      INTEGER NOT NULL CHECK (default_threshold_n >= 0),
    required_percent         INTEGER NOT NULL CHECK (required_percent BETWEEN 0 AND 100),
    total_scheduled_sessions INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS enrollments (
    course_id  TEXT NOT NULL,
    student_id TEXT NOT NULL,
    PRIMARY KEY (course_id, student_id)
);
CREATE TABLE IF NOT EXISTS sessions (
    session_id         TEXT PRIMARY KEY,
    course_id          TEXT NOT NULL,
    start_time         TEXT NOT NULL,
    end_time           TEXT NOT NULL,
    room_number        TEXT NOT NULL,
    camera_id          TEXT NOT NULL,
    threshold_override INTEGER,
    state              TEXT NOT NULL DEFAULT 'scheduled'
                       CHECK (state IN ('scheduled', 'connecting', 'running',
                                        'complete', 'failed')),
    job_id             TEXT,
    fail_reason        TEXT
);
CREATE TABLE IF NOT EXISTS presence_blocks (
    session_id  TEXT NOT NULL,
    block_index INTEGER NOT NULL,
    student_id  TEXT NOT NULL,
    PRIMARY KEY (session_id, block_index, student_id)
);
CREATE TABLE IF NOT EXISTS session_blocks (
    session_id  TEXT NOT NULL,
    block_index INTEGER NOT NULL,
    degraded    INTEGER NOT NULL DEFAULT 0,
    PRIMARY KEY (session_id, block_index)
);
CREATE TABLE IF NOT EXISTS attendance_records (
    session_id     TEXT NOT NULL,
    student_id     TEXT NOT NULL,
    blocks_present INTEGER NOT NULL,
    threshold_used INTEGER NOT NULL,
    present        INTEGER NOT NULL,
    source         TEXT NOT NULL DEFAULT 'computed'
                   CHECK (source IN ('computed', 'admin_override')),
    override_note  TEXT,
    PRIMARY KEY (session_id, student_id)
);
CREATE TABLE IF NOT EXISTS overrides (
    id         INTEGER PRIMARY KEY AUTOINCREMENT,
    session_id TEXT NOT NULL,
    student_id TEXT NOT NULL,
    admin_id   TEXT NOT NULL,
    present    INTEGER NOT NULL,
    note       TEXT NOT NULL,
    applied_at TEXT NOT NULL
);
"""


class Database:
    """Thread-safe sqlite wrapper: per-thread connections, one writer."""

    def __init__(self, path: str):
        self.path = str(path)
        self._local = threading.local()
        self._write_lock = threading.RLock()
        with self.write() as conn:
            conn.executescript(SCHEMA)

    def conn(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = sqlite3.connect(self.path, timeout=30.0)
            conn.row_factory = sqlite3.Row
            conn.execute("PRAGMA journal_mode=WAL")
            conn.execute("PRAGMA synchronous=NORMAL")
            conn.execute("PRAGMA foreign_keys=ON")
            self._local.conn = conn
        return conn

    @contextmanager
    def write(self):
        with self._write_lock:
            conn = self.conn()
            try:
                yield conn
                conn.commit()
            except Exception:
                conn.rollback()
                raise

    def query(self, sql: str, params=()) -> list[sqlite3.Row]:
        return self.conn().execute(sql, params).fetchall()

    def query_one(self, sql: str, params=()) -> sqlite3.Row | None:
        return self.conn().execute(sql, params).fetchone()


def embedding_to_text(embedding: np.ndarray) -> str:
    # json round-trips doubles exactly (repr-based)
    return json.dumps(embedding.tolist())


def embedding_from_text(text: str) -> np.ndarray:
    return np.array(json.loads(text), dtype=np.float64)
