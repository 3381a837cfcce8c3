"""Black-box HTTP tests for the backend: auth, role rules, orchestration
timing, callback idempotence, and override semantics.

The stack is the real app served in-process: FastAPI test client, sqlite
store, virtual clock driven through POST /internal/clock/advance, and a
real recognition engine whose callbacks arrive through the internal HTTP
endpoints exactly as they would over the network.
"""

import json

from fastapi.testclient import TestClient

from snapattend.backend import BackendCore, seed_from_scenario
from snapattend.backend_app import create_backend_app
from snapattend.camera import SimulatedCameraBank
from snapattend.clock import VirtualClock
from snapattend.engine import RecognitionEngine, job_from_payload
from snapattend.scenario import parse_scenario
from snapattend.store import Database
from snapattend.timeutil import parse_timestamp

from oracles import brute_force_allowed_misses

SECRET = "test-secret"

SCENARIO_DOC = {
    "seed": 11,
    "noise_sigma": 0.0,
    "students": [
        {"id": "s001", "embedding": "auto"},
        {"id": "s002", "embedding": "auto"},
        {"id": "s003", "embedding": "auto"},
    ],
    "sessions": [
        {
            "id": "g1",
            "camera_id": "camA",
            "start": "2026-03-02T09:00Z",
            "end": "2026-03-02T09:50Z",
            # 5 blocks: s001 attends 4, s002 attends 1, s003 none
            "present": {"s001": [0, 1, 2, 3], "s002": [2]},
        },
        {
            "id": "g2",
            "camera_id": "camB",
            "start": "2026-03-02T11:00Z",
            "end": "2026-03-02T11:50Z",
            "present": {"s001": [0, 1, 2], "s002": [0, 1, 2, 3, 4]},
        },
    ],
}


def make_stack(tmp_path, scenario_doc=SCENARIO_DOC, default_n=3, required=75):
    scenario = parse_scenario(json.loads(json.dumps(scenario_doc)))
    db = Database(str(tmp_path / "api.db"))
    seed_from_scenario(db, scenario, default_threshold_n=default_n, required_percent=required)
    clock = VirtualClock(parse_timestamp("2026-03-02T00:00Z"))
    bank = SimulatedCameraBank(scenario)
    core = BackendCore(db, clock, None, bank)
    app = create_backend_app(core, SECRET)
    client = TestClient(app, raise_server_exceptions=False)

    # engine callbacks travel through the real internal HTTP endpoints
    def post_internal(path, payload):
        client.post(path, json=payload, headers={"X-Internal-Secret": SECRET})

    def on_block(outcome):
        post_internal(
            f"/internal/sessions/{outcome.session_id}/blocks/{outcome.block_index}",
            {
                "assignments": [
                    {"student_id": a.student_id, "distance": a.distance}
                    for a in outcome.assignments
                ],
                "degraded": outcome.degraded,
            },
        )

    def on_complete(matrix):
        post_internal(
            f"/internal/sessions/{matrix.session_id}/complete",
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
        post_internal(
            f"/internal/sessions/{session_id}/complete",
            {"status": "failed", "reason": reason},
        )

    engine = RecognitionEngine(
        core.snapshot_source_for,
        on_block=on_block, on_complete=on_complete, on_failed=on_failed,
        max_workers=4,
    )

    class Client:
        def submit_job(self, payload):
            return engine.submit(job_from_payload(payload))

    core.engine_client = Client()
    return client, core, engine, bank


def advance(client, to):
    resp = client.post(
        "/internal/clock/advance", json={"to": to}, headers={"X-Internal-Secret": SECRET}
    )
    assert resp.status_code == 200, resp.text
    return resp


def token(client, user):
    resp = client.post("/auth/login", json={"user_id": user, "password": f"{user}-pw"})
    assert resp.status_code == 200, resp.text
    return resp.json()["token"]


def auth(tok):
    return {"Authorization": f"Bearer {tok}"}


def run_g1(client, engine):
    advance(client, "2026-03-02T08:55Z")
    advance(client, "2026-03-02T09:00Z")
    assert engine.wait_all(30)


class TestAuth:
    def test_login_and_roles(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        doc = client.post(
            "/auth/login", json={"user_id": "s001", "password": "s001-pw"}
        ).json()
        assert doc["role"] == "student"
        assert doc["token"] == "tok-s001"

    def test_wrong_password_401(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.post("/auth/login", json={"user_id": "s001", "password": "nope"})
        assert resp.status_code == 401
        assert resp.json()["code"] == "unauthorized"

    def test_missing_token_401(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        assert client.get("/sessions/g1").status_code == 401

    def test_bad_token_401(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        assert client.get("/sessions/g1", headers=auth("garbage")).status_code == 401

    def test_internal_secret_required(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.post(
            "/internal/clock/advance", json={"to": "2026-03-02T08:00Z"},
            headers={"X-Internal-Secret": "wrong"},
        )
        assert resp.status_code == 401


class TestRoleRules:
    def test_student_cannot_edit_threshold(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.put(
            "/sessions/g1/threshold", json={"n": 1}, headers=auth(token(client, "s001"))
        )
        assert resp.status_code == 403
        assert resp.json()["code"] == "forbidden"

    def test_other_professor_cannot_edit_threshold(self, tmp_path):
        client, core, *_ = make_stack(tmp_path)
        with core.db.write() as conn:
            conn.execute(
                "INSERT INTO users (user_id, role, password, token) "
                "VALUES ('prof-2', 'professor', 'prof-2-pw', 'tok-prof-2')"
            )
        resp = client.put(
            "/sessions/g1/threshold", json={"n": 1}, headers=auth("tok-prof-2")
        )
        assert resp.status_code == 403

    def test_student_cannot_edit_course_threshold(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.put(
            "/courses/course-1/threshold", json={"n": 0},
            headers=auth(token(client, "s001")),
        )
        assert resp.status_code == 403

    def test_student_cannot_move_session_room(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.put(
            "/sessions/g1/room", json={"room_number": "room-camB"},
            headers=auth(token(client, "s001")),
        )
        assert resp.status_code == 403

    def test_professor_cannot_move_whole_course(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.put(
            "/courses/course-1/room", json={"room_number": "room-camB"},
            headers=auth(token(client, "prof-1")),
        )
        assert resp.status_code == 403

    def test_admin_moves_whole_course(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.put(
            "/courses/course-1/room", json={"room_number": "room-camB"},
            headers=auth(token(client, "admin")),
        )
        assert resp.status_code == 200
        detail = client.get("/sessions/g1", headers=auth(token(client, "admin"))).json()
        assert detail["camera_id"] == "camB"

    def test_student_cannot_read_others(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        t = token(client, "s002")
        resp = client.get("/students/s001/standing?course=course-1", headers=auth(t))
        assert resp.status_code == 403
        resp = client.get("/sessions/g1/attendance/s001", headers=auth(t))
        assert resp.status_code == 403

    def test_student_cannot_read_class_total(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.get(
            "/courses/course-1/sessions/g1/total", headers=auth(token(client, "s001"))
        )
        assert resp.status_code == 403

    def test_professor_cannot_override(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        resp = client.put(
            "/sessions/g1/attendance/s001/override",
            json={"present": False, "note": "x"},
            headers=auth(token(client, "prof-1")),
        )
        assert resp.status_code == 403


class TestOrchestration:
    def test_lifecycle_and_finalization(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        admin = auth(token(client, "admin"))

        advance(client, "2026-03-02T08:54Z")
        assert client.get("/sessions/g1", headers=admin).json()["state"] == "scheduled"

        advance(client, "2026-03-02T08:55Z")  # T-5: camera up
        assert client.get("/sessions/g1", headers=admin).json()["state"] == "connecting"

        advance(client, "2026-03-02T09:00Z")  # start: job dispatched
        assert engine.wait_all(30)
        detail = client.get("/sessions/g1", headers=admin).json()
        assert detail["state"] == "complete"

        # records exist for every enrolled student, detected or not
        att = client.get("/sessions/g1/attendance/s001", headers=admin).json()
        assert att == {
            "session_id": "g1",
            "student_id": "s001",
            "state": "complete",
            "block_count": 5,
            "blocks": [True, True, True, True, False],
            "finalized": True,
            "blocks_present": 4,
            "threshold_used": 3,
            "present": True,
            "source": "computed",
            "override_note": None,
        }
        att2 = client.get("/sessions/g1/attendance/s002", headers=admin).json()
        assert att2["present"] is False and att2["blocks_present"] == 1
        att3 = client.get("/sessions/g1/attendance/s003", headers=admin).json()
        assert att3["present"] is False and att3["blocks_present"] == 0

        total = client.get("/courses/course-1/sessions/g1/total", headers=admin).json()
        assert total["present_count"] == 1
        assert total["enrolled"] == 3

    def test_threshold_edit_at_t_minus_2_applies(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        advance(client, "2026-03-02T08:55Z")
        advance(client, "2026-03-02T08:58Z")  # T-2: professor relaxes the bar
        resp = client.put(
            "/sessions/g1/threshold", json={"n": 1}, headers=auth(token(client, "prof-1"))
        )
        assert resp.status_code == 200
        advance(client, "2026-03-02T09:00Z")
        assert engine.wait_all(30)
        admin = auth(token(client, "admin"))
        att = client.get("/sessions/g1/attendance/s002", headers=admin).json()
        assert att["threshold_used"] == 1
        assert att["present"] is True  # one block now suffices

    def test_threshold_edit_after_finalize_conflicts(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        resp = client.put(
            "/sessions/g1/threshold", json={"n": 1}, headers=auth(token(client, "prof-1"))
        )
        assert resp.status_code == 409

    def test_course_threshold_applies_to_later_sessions(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        resp = client.put(
            "/courses/course-1/threshold", json={"n": 5},
            headers=auth(token(client, "prof-1")),
        )
        assert resp.status_code == 200
        advance(client, "2026-03-02T10:55Z")
        advance(client, "2026-03-02T11:00Z")
        assert engine.wait_all(30)
        admin = auth(token(client, "admin"))
        # g1 keeps its old decision, g2 uses the new default
        assert client.get("/sessions/g1/attendance/s001", headers=admin).json()[
            "threshold_used"] == 3
        att = client.get("/sessions/g2/attendance/s002", headers=admin).json()
        assert att["threshold_used"] == 5 and att["present"] is True

    def test_room_change_before_start_redirects_camera(self, tmp_path):
        client, core, engine, bank = make_stack(tmp_path)
        prof = auth(token(client, "prof-1"))
        resp = client.put(
            "/sessions/g1/room", json={"room_number": "room-camB"}, headers=prof
        )
        assert resp.status_code == 200
        run_g1(client, engine)
        admin = auth(token(client, "admin"))
        detail = client.get("/sessions/g1", headers=admin).json()
        assert detail["camera_id"] == "camB"
        assert detail["state"] == "complete"
        # the class still played out in front of the new camera
        att = client.get("/sessions/g1/attendance/s001", headers=admin).json()
        assert att["present"] is True and att["blocks_present"] == 4

    def test_room_change_after_connect_conflicts(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        advance(client, "2026-03-02T08:55Z")
        resp = client.put(
            "/sessions/g1/room", json={"room_number": "room-camB"},
            headers=auth(token(client, "prof-1")),
        )
        assert resp.status_code == 409

    def test_unknown_room_404(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.put(
            "/sessions/g1/room", json={"room_number": "room-zzz"},
            headers=auth(token(client, "prof-1")),
        )
        assert resp.status_code == 404

    def test_camera_down_fails_session_without_dispatch(self, tmp_path):
        client, core, engine, bank = make_stack(tmp_path)
        bank.set_camera_down("camA")
        advance(client, "2026-03-02T08:55Z")
        admin = auth(token(client, "admin"))
        detail = client.get("/sessions/g1", headers=admin).json()
        assert detail["state"] == "failed"
        assert "camera" in detail["fail_reason"]
        # start passes; no job may run for a failed session
        advance(client, "2026-03-02T09:00Z")
        assert engine.wait_all(5)
        assert client.get("/sessions/g1", headers=admin).json()["state"] == "failed"
        resp = client.post(
            "/internal/sessions/g1/blocks/0",
            json={"assignments": [], "degraded": False},
            headers={"X-Internal-Secret": SECRET},
        )
        assert resp.status_code == 409


class TestCallbacks:
    def test_block_replay_is_idempotent(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        admin = auth(token(client, "admin"))
        before = client.get("/sessions/g1/attendance/s001", headers=admin).json()
        for _ in range(3):
            resp = client.post(
                "/internal/sessions/g1/blocks/2",
                json={
                    "assignments": [{"student_id": "s001", "distance": 0.0}],
                    "degraded": False,
                },
                headers={"X-Internal-Secret": SECRET},
            )
            assert resp.status_code == 200
        after = client.get("/sessions/g1/attendance/s001", headers=admin).json()
        assert before == after

    def test_complete_replay_is_idempotent(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        admin = auth(token(client, "admin"))
        before = [
            client.get(f"/sessions/g1/attendance/{sid}", headers=admin).json()
            for sid in ("s001", "s002", "s003")
        ]
        resp = client.post(
            "/internal/sessions/g1/complete",
            json={"status": "complete"},
            headers={"X-Internal-Secret": SECRET},
        )
        assert resp.status_code == 200
        after = [
            client.get(f"/sessions/g1/attendance/{sid}", headers=admin).json()
            for sid in ("s001", "s002", "s003")
        ]
        assert before == after

    def test_out_of_range_block_400(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        resp = client.post(
            "/internal/sessions/g1/blocks/99",
            json={"assignments": [], "degraded": False},
            headers={"X-Internal-Secret": SECRET},
        )
        assert resp.status_code == 400

    def test_unknown_session_404(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.post(
            "/internal/sessions/ghost/blocks/0",
            json={"assignments": [], "degraded": False},
            headers={"X-Internal-Secret": SECRET},
        )
        assert resp.status_code == 404

    def test_partial_presence_visible_while_running(self, tmp_path):
        # feed callbacks by hand: no engine, session driven to 'running'
        client, core, engine, _ = make_stack(tmp_path)

        class NoopClient:
            def submit_job(self, payload):
                return "manual"

        core.engine_client = NoopClient()
        advance(client, "2026-03-02T08:55Z")
        advance(client, "2026-03-02T09:00Z")
        admin = auth(token(client, "admin"))
        assert client.get("/sessions/g1", headers=admin).json()["state"] == "running"
        client.post(
            "/internal/sessions/g1/blocks/0",
            json={"assignments": [{"student_id": "s001", "distance": 0.01}],
                  "degraded": False},
            headers={"X-Internal-Secret": SECRET},
        )
        att = client.get("/sessions/g1/attendance/s001", headers=admin).json()
        assert att["finalized"] is False
        assert att["blocks"][0] is True
        assert att["blocks_present"] == 1
        assert att["present"] is None


class TestOverride:
    def test_override_flow(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        admin = auth(token(client, "admin"))
        resp = client.put(
            "/sessions/g1/attendance/s002/override",
            json={"present": True, "note": "was ill, certificate shown"},
            headers=admin,
        )
        assert resp.status_code == 200
        att = client.get("/sessions/g1/attendance/s002", headers=admin).json()
        assert att["present"] is True
        assert att["source"] == "admin_override"
        assert att["override_note"] == "was ill, certificate shown"
        assert att["blocks_present"] == 1  # computed evidence preserved

        # replaying the completion callback must not clobber the override
        client.post(
            "/internal/sessions/g1/complete",
            json={"status": "complete"},
            headers={"X-Internal-Secret": SECRET},
        )
        att = client.get("/sessions/g1/attendance/s002", headers=admin).json()
        assert att["present"] is True and att["source"] == "admin_override"

    def test_override_before_finalize_404(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.put(
            "/sessions/g1/attendance/s001/override",
            json={"present": True, "note": "x"},
            headers=auth(token(client, "admin")),
        )
        assert resp.status_code == 404

    def test_empty_note_400(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        resp = client.put(
            "/sessions/g1/attendance/s001/override",
            json={"present": False, "note": "   "},
            headers=auth(token(client, "admin")),
        )
        assert resp.status_code == 400


class TestStanding:
    def test_standing_after_two_sessions(self, tmp_path):
        client, core, engine, _ = make_stack(tmp_path)
        run_g1(client, engine)
        advance(client, "2026-03-02T10:55Z")
        advance(client, "2026-03-02T11:00Z")
        assert engine.wait_all(30)
        doc = client.get(
            "/students/s001/standing?course=course-1", headers=auth(token(client, "s001"))
        ).json()
        assert doc["sessions_held"] == 2
        assert doc["sessions_attended"] == 2  # 4/5 and 3/5 blocks, n=3
        assert doc["total_scheduled"] == 2
        assert doc["allowed_misses"] == brute_force_allowed_misses(2, 2, 2, 75)
        assert len(doc["sessions"]) == 2

        doc2 = client.get(
            "/students/s002/standing?course=course-1", headers=auth(token(client, "s002"))
        ).json()
        assert doc2["sessions_attended"] == 1
        assert doc2["allowed_misses"] == brute_force_allowed_misses(1, 2, 2, 75)

    def test_standing_requires_course_param(self, tmp_path):
        client, *_ = make_stack(tmp_path)
        resp = client.get(
            "/students/s001/standing", headers=auth(token(client, "s001"))
        )
        assert resp.status_code == 404
