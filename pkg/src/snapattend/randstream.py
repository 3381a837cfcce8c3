"""Counter-based deterministic randomness.

Every draw is a pure function of a key tuple, so two workers (or two
processes, or two platforms) asking for the same key get identical bytes
regardless of scheduling. That property is what keeps simulated camera
output reproducible under any interleaving: streams are keyed by
(seed, session, block, student) rather than consumed from a shared
sequential generator.

Expansion is blake2b in counter mode -> uint64 words -> uniforms in [0, 1),
with Box-Muller for Gaussians.
"""

from __future__ import annotations

import hashlib

import numpy as np

_WORDS_PER_BLOCK = 8  # 64-byte blake2b digest = 8 uint64 words


def _key_bytes(parts: tuple) -> bytes:
    # '\x1f' never appears in our identifiers; keeps ("a","bc") != ("ab","c")
    return "\x1f".join(str(p) for p in parts).encode("utf-8")


class CounterStream:
    """Deterministic stream of uniforms/Gaussians for one key tuple.

    Consecutive calls continue the stream; a fresh CounterStream with the
    same key replays it from the start.
    """

    def __init__(self, *key_parts):
        self._key = _key_bytes(key_parts)
        self._counter = 0

    def _raw_words(self, n_words: int) -> np.ndarray:
        blocks = -(-n_words // _WORDS_PER_BLOCK)
        out = np.empty(blocks * _WORDS_PER_BLOCK, dtype=np.uint64)
        for i in range(blocks):
            digest = hashlib.blake2b(
                self._key + self._counter.to_bytes(8, "little"), digest_size=64
            ).digest()
            out[i * _WORDS_PER_BLOCK : (i + 1) * _WORDS_PER_BLOCK] = np.frombuffer(
                digest, dtype="<u8"
            )
            self._counter += 1
        return out[:n_words]

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1)."""
        words = self._raw_words(n)
        # top 53 bits -> exactly representable double in [0, 1)
        return (words >> np.uint64(11)).astype(np.float64) * (2.0**-53)

    def gaussians(self, n: int) -> np.ndarray:
        """n standard normal doubles via Box-Muller."""
        pairs = -(-n // 2)
        u = self.uniforms(2 * pairs)
        u1 = 1.0 - u[:pairs]  # (0, 1]: keeps log() finite
        u2 = u[pairs:]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return z[:n]


def unit_vector(dim: int, *key_parts) -> np.ndarray:
    """Deterministic random point on the unit sphere in R^dim."""
    g = CounterStream(*key_parts).gaussians(dim)
    norm = float(np.linalg.norm(g))
    if norm == 0.0:  # probability ~0, but stay total
        g[0] = 1.0
        norm = 1.0
    return g / norm
