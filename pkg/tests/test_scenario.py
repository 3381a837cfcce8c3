"""Scenario file loading, validation diagnostics, and the generator."""

import json

import numpy as np
import pytest

from snapattend.errors import ScenarioParseError, ScenarioValidationError
from snapattend.scenario import generate_random_scenario, load_scenario, parse_scenario

MINIMAL = {
    "seed": 1,
    "noise_sigma": 0.0,
    "students": [{"id": "s1", "embedding": "auto"}],
    "sessions": [
        {
            "id": "g1",
            "camera_id": "cam1",
            "start": "2026-03-02T09:00Z",
            "end": "2026-03-02T09:05Z",
            "present": {"s1": [0]},
        }
    ],
}


def write(tmp_path, doc):
    p = tmp_path / "scenario.json"
    p.write_text(json.dumps(doc))
    return p


def test_minimal_file_loads(tmp_path):
    sc = load_scenario(write(tmp_path, MINIMAL))
    assert sc.student_ids == ("s1",)
    assert len(sc.sessions) == 1
    assert sc.sessions[0].block_count == 1
    assert sc.sessions[0].scripted_blocks("s1") == frozenset({0})
    emb = sc.embeddings["s1"]
    assert emb.shape == (128,)
    assert abs(np.linalg.norm(emb) - 1.0) < 1e-9


def test_auto_embeddings_depend_on_seed(tmp_path):
    a = load_scenario(write(tmp_path, MINIMAL))
    doc = dict(MINIMAL, seed=2)
    b = load_scenario(write(tmp_path, doc))
    assert not np.array_equal(a.embeddings["s1"], b.embeddings["s1"])


def test_explicit_embedding_normalized(tmp_path):
    doc = json.loads(json.dumps(MINIMAL))
    doc["embedding_dim"] = 4
    doc["students"][0]["embedding"] = [2.0, 0.0, 0.0, 0.0]
    sc = load_scenario(write(tmp_path, doc))
    assert np.allclose(sc.embeddings["s1"], [1, 0, 0, 0])


def test_malformed_json_names_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"seed": 1,\n  "students": [}')
    with pytest.raises(ScenarioParseError, match="line 2"):
        load_scenario(p)


def test_undeclared_student_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["sessions"][0]["present"]["ghost"] = [0]
    with pytest.raises(ScenarioValidationError, match="undeclared student 'ghost'"):
        parse_scenario(doc)


def test_block_index_out_of_range_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["sessions"][0]["present"]["s1"] = [1]
    with pytest.raises(ScenarioValidationError, match="block index 1"):
        parse_scenario(doc)


def test_end_before_start_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["sessions"][0]["end"] = "2026-03-02T08:00Z"
    with pytest.raises(ScenarioValidationError, match="end must be after start"):
        parse_scenario(doc)


def test_duplicate_student_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["students"].append({"id": "s1", "embedding": "auto"})
    with pytest.raises(ScenarioValidationError, match="duplicate student"):
        parse_scenario(doc)


def test_camera_double_booking_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["sessions"].append(
        {
            "id": "g2",
            "camera_id": "cam1",
            "start": "2026-03-02T09:04Z",
            "end": "2026-03-02T09:30Z",
            "present": {},
        }
    )
    with pytest.raises(ScenarioValidationError, match="double-booked"):
        parse_scenario(doc)


def test_seconds_precision_rejected():
    doc = json.loads(json.dumps(MINIMAL))
    doc["sessions"][0]["start"] = "2026-03-02T09:00:30Z"
    with pytest.raises(ScenarioValidationError, match="minute resolution"):
        parse_scenario(doc)


def test_generator_output_is_valid_and_deterministic():
    doc1 = generate_random_scenario(12, 6, seed=99)
    doc2 = generate_random_scenario(12, 6, seed=99)
    assert doc1 == doc2
    sc = parse_scenario(doc1)
    assert len(sc.student_ids) == 12
    assert len(sc.sessions) == 6
    for sess in sc.sessions:
        assert 5 <= sess.block_count <= 9


def test_generator_respects_blocks_range():
    doc = generate_random_scenario(5, 20, seed=7, blocks_low=3, blocks_high=4)
    sc = parse_scenario(doc)
    assert {s.block_count for s in sc.sessions} <= {3, 4}
