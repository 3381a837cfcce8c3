"""Snapshot-to-roster matching.

Each snapshot yields a list of detected face embeddings; the roster holds
one enrolled embedding per student. Matching is greedy over all
(detection, student) pairs in ascending cosine distance, skipping pairs
beyond the acceptance threshold tau and pairs whose detection or student
is already taken. The result is injective both ways and deterministic:
ties break by (distance, student_id, detection_index).

Greedy is O(R*F*log(R*F)) and is not claimed optimal; with well-separated
embeddings (cross distances near 1, true matches well under tau) it agrees
with the exhaustive minimum-cost matching essentially always, which the
test suite checks against a brute-force oracle.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError

DEFAULT_TAU = 0.4


@dataclass(frozen=True)
class RosterEntry:
    student_id: str
    embedding: np.ndarray


@dataclass(frozen=True)
class Assignment:
    student_id: str
    detection_index: int
    distance: float


def match_snapshot(
    detections: list[np.ndarray],
    roster: list[RosterEntry],
    tau: float = DEFAULT_TAU,
) -> list[Assignment]:
    """Assign detections to roster students.

    Returns assignments in ascending-distance order; every distance is
    <= tau, and no student or detection appears twice. Empty detections
    give an empty result.
    """
    if not roster:
        raise InvalidInputError("roster must not be empty")
    if not (0.0 < tau < 2.0):
        raise InvalidInputError(f"tau must lie in (0, 2), got {tau}")
    ids = [e.student_id for e in roster]
    if len(set(ids)) != len(ids):
        raise InvalidInputError("duplicate student_id in roster")
    if not detections:
        return []

    dim = roster[0].embedding.shape[0]
    for det in detections:
        if det.shape[0] != dim:
            raise InvalidInputError(f"detection dimension {det.shape[0]} != roster dimension {dim}")

    det_matrix = np.stack(detections)  # F x D
    roster_matrix = np.stack([e.embedding for e in roster])  # R x D
    dist = 1.0 - roster_matrix @ det_matrix.T  # R x F

    r_idx, f_idx = np.nonzero(dist <= tau)
    candidates = sorted(
        zip(dist[r_idx, f_idx].tolist(), (ids[r] for r in r_idx), f_idx.tolist())
    )

    taken_students: set[str] = set()
    taken_detections: set[int] = set()
    out: list[Assignment] = []
    for d, student_id, det_index in candidates:
        if student_id in taken_students or det_index in taken_detections:
            continue
        taken_students.add(student_id)
        taken_detections.add(det_index)
        out.append(Assignment(student_id=student_id, detection_index=det_index, distance=d))
    return out
