"""Injected time sources.

The backend never reads the system clock directly: it asks its Clock.
The simulator drives a VirtualClock straight between event times, so a
whole timetable runs in milliseconds; production deployments use the
WallClock and a periodic tick.
"""

from __future__ import annotations

import threading
from datetime import datetime, timezone

from .errors import InvalidInputError


class WallClock:
    def now(self) -> datetime:
        # naive UTC, minute semantics handled by callers
        return datetime.now(timezone.utc).replace(tzinfo=None)


class VirtualClock:
    """Settable, monotonically advancing time."""

    def __init__(self, start: datetime):
        self._now = start
        self._lock = threading.Lock()

    def now(self) -> datetime:
        with self._lock:
            return self._now

    def advance_to(self, t: datetime) -> datetime:
        with self._lock:
            if t < self._now:
                raise InvalidInputError(
                    f"virtual clock cannot move backwards ({t.isoformat()} < "
                    f"{self._now.isoformat()})"
                )
            self._now = t
            return self._now
