"""Sliding-window rate limiter with an injectable clock."""

from __future__ import annotations

import threading
import time
from collections import deque
from typing import Protocol


class Clock(Protocol):
    def now(self) -> float: ...

    def sleep(self, seconds: float) -> None: ...


class SystemClock:
    def now(self) -> float:
        return time.monotonic()

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


class SlidingWindowLimiter:
    """Admits at most ``limit`` events per trailing 60-second window.

    Windows are half-open [t, t + 60): an event admitted exactly 60 s after
    another does not share a window with it. Thread-safe; waiting happens
    outside the lock so peers can drain while one caller sleeps.
    """

    WINDOW_SECONDS = 60.0

    def __init__(self, limit: int, clock: Clock | None = None):
        if limit < 1:
            raise ValueError("limit must be positive")
        self._limit = limit
        self._clock = clock if clock is not None else SystemClock()
        self._events: deque[float] = deque()
        self._lock = threading.Lock()

    def acquire(self) -> float:
        """Block until a slot opens; returns the admission timestamp."""
        while True:
            with self._lock:
                now = self._clock.now()
                horizon = now - self.WINDOW_SECONDS
                while self._events and self._events[0] <= horizon:
                    self._events.popleft()
                if len(self._events) < self._limit:
                    self._events.append(now)
                    return now
                wait = self._events[0] + self.WINDOW_SECONDS - now
            self._clock.sleep(max(wait, 0.0))
