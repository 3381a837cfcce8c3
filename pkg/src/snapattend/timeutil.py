"""Timestamp parsing/formatting: ISO-8601 UTC, minute resolution.

Internally every datetime is naive UTC; aware inputs are converted and
stripped so comparisons never mix aware and naive values.
"""

from __future__ import annotations

from datetime import datetime, timezone

from .errors import InvalidInputError


def parse_timestamp(value: str) -> datetime:
    """Accepts '2026-03-02T09:00', with ':00' seconds, 'Z', or an offset."""
    if not isinstance(value, str):
        raise InvalidInputError(f"timestamp must be a string, got {type(value).__name__}")
    text = value.strip()
    if text.endswith(("Z", "z")):
        text = text[:-1] + "+00:00"
    try:
        dt = datetime.fromisoformat(text)
    except ValueError as exc:
        raise InvalidInputError(f"bad timestamp {value!r}: {exc}") from None
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    if dt.second or dt.microsecond:
        raise InvalidInputError(f"timestamp {value!r} is finer than minute resolution")
    return dt


def format_timestamp(dt: datetime) -> str:
    if dt.tzinfo is not None:
        dt = dt.astimezone(timezone.utc).replace(tzinfo=None)
    return dt.strftime("%Y-%m-%dT%H:%MZ")
