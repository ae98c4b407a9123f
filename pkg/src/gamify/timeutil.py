"""UTC timestamp and date parsing shared across the engine.

All timestamps are timezone-aware UTC; the wire format is ISO-8601 with a
``Z`` suffix.  Naive inputs are rejected so no event silently drifts.
"""

from __future__ import annotations

import datetime as dt

from .errors import EventValidationError


def parse_utc(text: str) -> dt.datetime:
    """Parse an ISO-8601 timestamp into an aware UTC datetime."""
    if not isinstance(text, str):
        raise EventValidationError(f"timestamp must be a string, got {text!r}")
    raw = text[:-1] + "+00:00" if text.endswith("Z") else text
    try:
        value = dt.datetime.fromisoformat(raw)
    except ValueError:
        raise EventValidationError(f"invalid timestamp {text!r}") from None
    if value.tzinfo is None:
        raise EventValidationError(f"timestamp {text!r} is missing a UTC offset")
    return value.astimezone(dt.timezone.utc)


def format_utc(value: dt.datetime) -> str:
    if value.tzinfo is None:
        raise ValueError("naive datetime")
    value = value.astimezone(dt.timezone.utc)
    return value.isoformat().replace("+00:00", "Z")


def parse_date(text: str) -> dt.date:
    if not isinstance(text, str):
        raise EventValidationError(f"date must be a string, got {text!r}")
    try:
        return dt.date.fromisoformat(text)
    except ValueError:
        raise EventValidationError(f"invalid date {text!r}") from None


def utc_now() -> dt.datetime:
    return dt.datetime.now(dt.timezone.utc)
