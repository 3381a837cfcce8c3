"""Scenario runner and verification oracle.

Runs a whole timetable through backend + engine + simulated cameras under
virtual time, either wired in one process or as two spawned HTTP services,
then compares the finalized attendance tables against a direct
re-application of the attendance rules to the scenario's ground truth.

The virtual clock steps straight between event times (camera connect at
T-5, job dispatch at start); nothing sleeps through class. Before moving
past an instant t, the runner waits for sessions that would already be
over by t, mirroring real time where a class always finishes before its
camera is needed again.
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import time
from dataclasses import dataclass, field
from datetime import timedelta

import httpx

from . import core as rules
from .backend import BackendCore, seed_from_scenario
from .camera import SimulatedCameraBank
from .clock import VirtualClock
from .engine import RecognitionEngine, job_from_payload
from .errors import InvalidInputError, SnapAttendError
from .matching import DEFAULT_TAU
from .scenario import CONNECT_LEAD_MINUTES, Scenario, load_scenario
from .store import Database
from .timeutil import format_timestamp, parse_timestamp

COURSE_ID = "course-1"
PROFESSOR_ID = "prof-1"


@dataclass(frozen=True)
class SimPolicies:
    """Deployment knobs a scenario file does not carry."""

    default_threshold_n: int = 3
    required_percent: int = 75
    tau: float = DEFAULT_TAU


@dataclass
class RunReport:
    mode: str
    sessions: dict[str, dict[str, bool]]  # session -> student -> present
    standings: dict[str, dict]            # student -> standing fields
    false_absent: int = 0
    false_present: int = 0
    wall_seconds: float = 0.0
    virtual_minutes: int = 0
    failed_sessions: list[str] = field(default_factory=list)

    @property
    def recognition_errors(self) -> int:
        return self.false_absent + self.false_present

    def to_doc(self) -> dict:
        return {
            "mode": self.mode,
            "sessions": {
                g: dict(sorted(row.items())) for g, row in sorted(self.sessions.items())
            },
            "standings": {s: self.standings[s] for s in sorted(self.standings)},
            "false_absent": self.false_absent,
            "false_present": self.false_present,
            "wall_seconds": round(self.wall_seconds, 3),
            "virtual_minutes": self.virtual_minutes,
            "failed_sessions": sorted(self.failed_sessions),
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "RunReport":
        return cls(
            mode=doc.get("mode", "?"),
            sessions={g: dict(r) for g, r in doc.get("sessions", {}).items()},
            standings=dict(doc.get("standings", {})),
            false_absent=int(doc.get("false_absent", 0)),
            false_present=int(doc.get("false_present", 0)),
            wall_seconds=float(doc.get("wall_seconds", 0.0)),
            virtual_minutes=int(doc.get("virtual_minutes", 0)),
            failed_sessions=list(doc.get("failed_sessions", [])),
        )


def oracle_attendance(scenario: Scenario, policies: SimPolicies) -> RunReport:
    """Reapply the attendance rules directly to scenario ground truth:
    present iff the number of scripted blocks reaches the threshold."""
    n = policies.default_threshold_n
    sessions: dict[str, dict[str, bool]] = {}
    for sess in scenario.sessions:
        sessions[sess.session_id] = {
            sid: len(sess.scripted_blocks(sid)) >= n for sid in scenario.student_ids
        }
    total = len(scenario.sessions)
    standings: dict[str, dict] = {}
    for sid in scenario.student_ids:
        attended = sum(1 for g in sessions.values() if g[sid])
        standings[sid] = {
            "course_id": COURSE_ID,
            "student_id": sid,
            "sessions_held": total,
            "sessions_attended": attended,
            "total_scheduled": total,
            "required_percent": policies.required_percent,
            "allowed_misses": rules.allowed_misses(
                attended, total, total, policies.required_percent
            ),
        }
    return RunReport(mode="oracle", sessions=sessions, standings=standings)


def diff_reports(a: RunReport, b: RunReport) -> list[str]:
    """Human-readable differences in the attendance tables and standings."""
    out: list[str] = []
    for g in sorted(set(a.sessions) | set(b.sessions)):
        if g not in a.sessions or g not in b.sessions:
            out.append(f"session {g}: present in only one report")
            continue
        ra, rb = a.sessions[g], b.sessions[g]
        for sid in sorted(set(ra) | set(rb)):
            va, vb = ra.get(sid), rb.get(sid)
            if va != vb:
                out.append(f"session {g} student {sid}: {va} vs {vb}")
    keys = ("sessions_held", "sessions_attended", "allowed_misses")
    for sid in sorted(set(a.standings) | set(b.standings)):
        sa, sb = a.standings.get(sid), b.standings.get(sid)
        if sa is None or sb is None:
            out.append(f"standing {sid}: present in only one report")
            continue
        for k in keys:
            if sa.get(k) != sb.get(k):
                out.append(f"standing {sid} {k}: {sa.get(k)} vs {sb.get(k)}")
    return out


def count_errors(run: RunReport, truth: RunReport) -> tuple[int, int]:
    """(false_absent, false_present) of a run against the oracle tables."""
    fa = fp = 0
    for g, row in truth.sessions.items():
        got = run.sessions.get(g, {})
        for sid, expected in row.items():
            actual = got.get(sid)
            if expected and actual is False:
                fa += 1
            elif not expected and actual is True:
                fp += 1
    return fa, fp


def _event_times(scenario: Scenario):
    lead = timedelta(minutes=CONNECT_LEAD_MINUTES)
    times = set()
    for s in scenario.sessions:
        times.add(s.start - lead)
        times.add(s.start)
    return sorted(times)


class _InProcessEngineClient:
    def __init__(self, engine: RecognitionEngine):
        self.engine = engine

    def submit_job(self, payload: dict) -> str:
        return self.engine.submit(job_from_payload(payload))


def _collect_report(fetch, scenario: Scenario, mode: str) -> RunReport:
    """Build the run tables through the query surface (`fetch` hides
    whether calls go over HTTP or straight into the core)."""
    sessions: dict[str, dict[str, bool]] = {}
    failed: list[str] = []
    for sess in scenario.sessions:
        detail = fetch("session_detail", sess.session_id)
        if detail["state"] != "complete":
            failed.append(sess.session_id)
            sessions[sess.session_id] = {}
            continue
        row = {}
        for sid in scenario.student_ids:
            att = fetch("attendance", sess.session_id, sid)
            row[sid] = bool(att["present"])
        sessions[sess.session_id] = row
    standings = {}
    for sid in scenario.student_ids:
        doc = fetch("standing", sid)
        standings[sid] = {
            k: doc[k]
            for k in (
                "course_id", "student_id", "sessions_held", "sessions_attended",
                "total_scheduled", "required_percent", "allowed_misses",
            )
        }
    return RunReport(mode=mode, sessions=sessions, standings=standings, failed_sessions=failed)


def run_in_process(
    scenario: Scenario,
    policies: SimPolicies,
    db_path: str,
    *,
    max_workers: int = 32,
    timeout: float = 120.0,
) -> RunReport:
    """Execute every session with backend core, engine, and cameras wired
    directly in this process under a virtual clock."""
    db = Database(db_path)
    seed_from_scenario(
        db, scenario,
        course_id=COURSE_ID, professor_id=PROFESSOR_ID,
        default_threshold_n=policies.default_threshold_n,
        required_percent=policies.required_percent,
    )
    events = _event_times(scenario)
    start_at = (events[0] if events else parse_timestamp("2026-01-01T00:00Z")) - timedelta(minutes=1)
    clock = VirtualClock(start_at)
    bank = SimulatedCameraBank(scenario)
    core = BackendCore(db, clock, None, bank, tau=policies.tau)

    def on_block(outcome):
        core.ingest_block_result(
            outcome.session_id,
            outcome.block_index,
            [
                {"student_id": a.student_id, "distance": a.distance}
                for a in outcome.assignments
            ],
            outcome.degraded,
        )

    def on_complete(matrix):
        core.ingest_complete(
            matrix.session_id,
            {
                "status": "complete",
                "presence": {
                    "session_id": matrix.session_id,
                    "block_count": matrix.block_count,
                    "rows": {sid: list(b) for sid, b in matrix.rows.items()},
                    "degraded_blocks": list(matrix.degraded_blocks),
                },
            },
        )

    def on_failed(session_id, reason):
        core.ingest_complete(session_id, {"status": "failed", "reason": reason})

    engine = RecognitionEngine(
        core.snapshot_source_for,
        on_block=on_block, on_complete=on_complete, on_failed=on_failed,
        max_workers=max_workers,
    )
    core.engine_client = _InProcessEngineClient(engine)

    t0 = time.monotonic()
    deadline = t0 + timeout

    def wait_expired(t):
        while time.monotonic() < deadline:
            open_rows = db.query(
                "SELECT session_id FROM sessions "
                "WHERE state IN ('connecting', 'running') AND end_time <= ?",
                (format_timestamp(t),),
            )
            if not open_rows:
                return
            time.sleep(0.002)
        raise TimeoutError("sessions still open past their end time")

    try:
        for t in events:
            wait_expired(t)
            core.advance_clock(t)
        if not engine.wait_all(max(1.0, deadline - time.monotonic())):
            raise TimeoutError("recognition jobs did not finish")
    finally:
        engine.shutdown()

    admin = core.authenticate("tok-admin")

    def fetch(kind, *args):
        if kind == "session_detail":
            return core.session_detail(admin, args[0])
        if kind == "attendance":
            return core.session_attendance(admin, args[0], args[1])
        if kind == "standing":
            return core.student_standing(admin, args[0], COURSE_ID)
        raise ValueError(kind)

    report = _collect_report(fetch, scenario, "in_process")
    report.wall_seconds = time.monotonic() - t0
    if events:
        span = max(s.end for s in scenario.sessions) - events[0]
        report.virtual_minutes = int(span.total_seconds() // 60)
    return report


def _free_port() -> int:
    import socket

    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_http(client: httpx.Client, url: str, timeout: float = 20.0):
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        try:
            if client.get(url).status_code == 200:
                return
        except httpx.HTTPError:
            pass
        time.sleep(0.05)
    raise TimeoutError(f"service at {url} did not come up")


def run_networked(
    scenario_path: str,
    scenario: Scenario,
    policies: SimPolicies,
    db_path: str,
    *,
    timeout: float = 120.0,
) -> RunReport:
    """Spawn the engine and the backend as separate processes and drive the
    whole scenario over HTTP only."""
    db = Database(db_path)
    seed_from_scenario(
        db, scenario,
        course_id=COURSE_ID, professor_id=PROFESSOR_ID,
        default_threshold_n=policies.default_threshold_n,
        required_percent=policies.required_percent,
    )

    backend_port = _free_port()
    engine_port = _free_port()
    secret = "sim-secret"
    backend_url = f"http://127.0.0.1:{backend_port}"
    engine_env = {
        **os.environ,
        "SNAPATTEND_SCENARIO": str(scenario_path),
        "SNAPATTEND_CALLBACK_URL": f"{backend_url}/internal",
        "SNAPATTEND_SECRET": secret,
        "SNAPATTEND_PORT": str(engine_port),
    }
    backend_env = {
        **os.environ,
        "SNAPATTEND_DB": str(db_path),
        "SNAPATTEND_SCENARIO": str(scenario_path),
        "SNAPATTEND_ENGINE_URL": f"http://127.0.0.1:{engine_port}",
        "SNAPATTEND_SECRET": secret,
        "SNAPATTEND_CLOCK": "virtual",
        "SNAPATTEND_PORT": str(backend_port),
    }

    t0 = time.monotonic()
    deadline = t0 + timeout
    events = _event_times(scenario)
    procs: list[subprocess.Popen] = []
    client = httpx.Client(timeout=10.0)
    try:
        procs.append(
            subprocess.Popen([sys.executable, "-m", "snapattend.engine_app"], env=engine_env)
        )
        procs.append(
            subprocess.Popen([sys.executable, "-m", "snapattend.backend_app"], env=backend_env)
        )
        _wait_http(client, f"http://127.0.0.1:{engine_port}/healthz")
        _wait_http(client, f"{backend_url}/healthz")

        admin_token = client.post(
            f"{backend_url}/auth/login",
            json={"user_id": "admin", "password": "admin-pw"},
        ).json()["token"]
        auth = {"Authorization": f"Bearer {admin_token}"}
        internal = {"X-Internal-Secret": secret}

        def states():
            out = {}
            for s in scenario.sessions:
                doc = client.get(f"{backend_url}/sessions/{s.session_id}", headers=auth).json()
                out[s.session_id] = doc["state"]
            return out

        def wait_expired(t):
            while time.monotonic() < deadline:
                st = states()
                open_ids = [
                    s.session_id
                    for s in scenario.sessions
                    if s.end <= t and st[s.session_id] in ("connecting", "running")
                ]
                if not open_ids:
                    return
                time.sleep(0.02)
            raise TimeoutError("sessions still open past their end time")

        for t in events:
            wait_expired(t)
            resp = client.post(
                f"{backend_url}/internal/clock/advance",
                json={"to": format_timestamp(t)},
                headers=internal,
            )
            if resp.status_code != 200:
                raise SnapAttendError(f"clock advance failed: {resp.text[:200]}")

        while time.monotonic() < deadline:
            if all(v in ("complete", "failed") for v in states().values()):
                break
            time.sleep(0.02)
        else:
            raise TimeoutError("sessions did not reach a terminal state")

        def fetch(kind, *args):
            if kind == "session_detail":
                r = client.get(f"{backend_url}/sessions/{args[0]}", headers=auth)
            elif kind == "attendance":
                r = client.get(
                    f"{backend_url}/sessions/{args[0]}/attendance/{args[1]}", headers=auth
                )
            elif kind == "standing":
                r = client.get(
                    f"{backend_url}/students/{args[0]}/standing",
                    params={"course": COURSE_ID}, headers=auth,
                )
            else:
                raise ValueError(kind)
            r.raise_for_status()
            return r.json()

        report = _collect_report(fetch, scenario, "networked")
    finally:
        client.close()
        for p in procs:
            p.terminate()
        for p in procs:
            try:
                p.wait(timeout=10)
            except subprocess.TimeoutExpired:
                p.kill()

    report.wall_seconds = time.monotonic() - t0
    if events:
        span = max(s.end for s in scenario.sessions) - events[0]
        report.virtual_minutes = int(span.total_seconds() // 60)
    return report


def run_scenario(
    scenario_path: str,
    *,
    mode: str = "in_process",
    policies: SimPolicies = SimPolicies(),
    db_path: str | None = None,
    max_workers: int = 32,
    timeout: float = 120.0,
) -> RunReport:
    """Load, execute, and score a scenario; the report carries recognition
    error counts against the ground-truth oracle."""
    scenario = load_scenario(scenario_path)
    own_tmp = db_path is None
    if own_tmp:
        import tempfile

        tmp = tempfile.mkdtemp(prefix="snapattend-")
        db_path = os.path.join(tmp, "run.db")
    if mode == "in_process":
        report = run_in_process(
            scenario, policies, db_path, max_workers=max_workers, timeout=timeout
        )
    elif mode == "networked":
        report = run_networked(scenario_path, scenario, policies, db_path, timeout=timeout)
    else:
        raise InvalidInputError(f"unknown mode {mode!r} (in_process | networked)")
    truth = oracle_attendance(scenario, policies)
    report.false_absent, report.false_present = count_errors(report, truth)
    return report
