"""Independent brute-force oracles used across the test suite.

These deliberately share no code with the implementation paths they check:
allowed-misses is re-derived by scanning every possible number of future
misses, and matching is re-derived by enumerating every injective matching.
"""

from __future__ import annotations

import numpy as np


def brute_force_allowed_misses(
    attended: int, held: int, total_scheduled: int, required_percent: int
) -> int:
    """Largest k such that missing k of the remaining sessions (attending
    the rest) keeps final attended/total >= required/100. Integer math."""
    remaining = total_scheduled - held
    for k in range(remaining, -1, -1):
        final_attended = attended + (remaining - k)
        if final_attended * 100 >= required_percent * total_scheduled:
            return k
    return 0


def enumerate_injective_matchings(dist: np.ndarray, tau: float):
    """Yield every injective matching over pairs with dist <= tau.

    A matching is a frozenset of (row, col) pairs with distinct rows and
    distinct columns. Rows are roster entries, columns detections.
    """
    n_rows, n_cols = dist.shape
    allowed_by_col = [
        [r for r in range(n_rows) if dist[r, c] <= tau] for c in range(n_cols)
    ]

    def recurse(col: int, used_rows: frozenset, chosen: tuple):
        if col == n_cols:
            yield frozenset(chosen)
            return
        # leave this detection unmatched
        yield from recurse(col + 1, used_rows, chosen)
        for r in allowed_by_col[col]:
            if r not in used_rows:
                yield from recurse(col + 1, used_rows | {r}, chosen + ((r, col),))

    yield from recurse(0, frozenset(), ())


def brute_force_best_matching(dist: np.ndarray, tau: float, atol: float = 1e-9):
    """Exhaustive best injective matching under threshold tau.

    Best = maximum cardinality, then minimum total distance. Returns
    (best_matching, unique) where unique is True when exactly one matching
    attains the optimum (totals compared within atol).
    """
    best = None
    best_card = -1
    best_total = None
    ties = 0
    for m in enumerate_injective_matchings(dist, tau):
        card = len(m)
        total = float(sum(dist[r, c] for r, c in m))
        if card > best_card or (card == best_card and total < best_total - atol):
            best, best_card, best_total, ties = m, card, total, 1
        elif card == best_card and abs(total - best_total) <= atol and m != best:
            ties += 1
    return best, ties == 1
