"""Time sources.

Everything in the platform that needs "now" asks a Clock instead of calling
time.time() directly, so scheduler and calibration behavior can be driven by
a manual clock in tests. Timestamps are UTC unix seconds (float).
"""

from __future__ import annotations

import threading
import time


class Clock:
    """Abstract time source."""

    def now(self) -> float:
        raise NotImplementedError


class SystemClock(Clock):
    def now(self) -> float:
        return time.time()


class ManualClock(Clock):
    """Deterministic clock advanced explicitly by tests."""

    def __init__(self, start: float = 0.0):
        self._now = float(start)
        self._lock = threading.Lock()

    def now(self) -> float:
        with self._lock:
            return self._now

    def advance(self, seconds: float) -> float:
        with self._lock:
            self._now += float(seconds)
            return self._now

    def set(self, at: float) -> None:
        with self._lock:
            self._now = float(at)
