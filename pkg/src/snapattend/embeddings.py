"""Face embedding helpers.

An embedding is a plain float64 numpy array of fixed dimension (128 by
default), L2-normalized. Two captures of the same person are close in
cosine distance; different people land near orthogonal for random
enrollments.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError

DEFAULT_DIM = 128
NORM_TOLERANCE = 1e-6


def as_embedding(values, dim: int | None = None) -> np.ndarray:
    """Validate a value list as a unit-norm embedding and return it as
    a float64 array."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1:
        raise InvalidInputError(f"embedding must be one-dimensional, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise InvalidInputError(f"embedding has dimension {arr.shape[0]}, expected {dim}")
    norm = float(np.linalg.norm(arr))
    if not np.isfinite(norm) or abs(norm - 1.0) > NORM_TOLERANCE:
        raise InvalidInputError(f"embedding is not unit-norm (|v| = {norm!r})")
    return arr


def normalized(values) -> np.ndarray:
    """Scale an arbitrary nonzero vector onto the unit sphere."""
    arr = np.asarray(values, dtype=np.float64)
    norm = float(np.linalg.norm(arr))
    if not np.isfinite(norm) or norm == 0.0:
        raise InvalidInputError("cannot normalize a zero or non-finite vector")
    return arr / norm


def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - dot(a, b); in [0, 2] for unit vectors (0 identical, 2 antipodal)."""
    if a.shape != b.shape:
        raise InvalidInputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return float(1.0 - np.dot(a, b))
