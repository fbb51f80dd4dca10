"""Injectable time sources and RFC-3339 helpers.

All runtime components take a ``Clock`` so tests and the simulation harness
can drive time manually. Wire timestamps are RFC-3339 UTC strings.
"""

from __future__ import annotations

import time
from datetime import datetime, timezone
from typing import Protocol


class Clock(Protocol):
    def now(self) -> float:
        """Seconds since the Unix epoch."""
        ...


class SystemClock:
    def now(self) -> float:
        return time.time()


class ManualClock:
    """Deterministic clock for simulations; starts at `start` and only moves
    when told to."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)

    def now(self) -> float:
        return self._now

    def advance(self, seconds: float) -> float:
        if seconds < 0:
            raise ValueError("clock cannot move backwards")
        self._now += seconds
        return self._now

    def set(self, at: float) -> None:
        if at < self._now:
            raise ValueError("clock cannot move backwards")
        self._now = float(at)


def format_rfc3339(epoch: float) -> str:
    """Render an epoch as an RFC-3339 UTC string, microsecond precision."""
    dt = datetime.fromtimestamp(epoch, tz=timezone.utc)
    return dt.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"


def parse_rfc3339(text: str) -> float:
    """Parse an RFC-3339 timestamp ("Z" or numeric offset) to epoch seconds."""
    value = text.strip()
    if value.endswith(("Z", "z")):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.timestamp()
