"""Session clocks.

Interactive sessions run on the wall clock; recipe/batch execution runs on
a virtual clock that the engine advances explicitly, which makes generation
faster than real time and byte-deterministic.  Both express session time as
monotonic milliseconds since session start.
"""

from __future__ import annotations

import time


class VirtualClock:
    """Deterministic session clock advanced by the caller."""

    def __init__(self):
        self._now_ms = 0

    def now_ms(self) -> int:
        return self._now_ms

    def advance_to(self, t_ms: int) -> None:
        if t_ms < self._now_ms:
            raise ValueError(f"virtual clock cannot move backwards ({t_ms} < {self._now_ms})")
        self._now_ms = t_ms


class WallClock:
    """Monotonic wall clock, zeroed at construction."""

    def __init__(self):
        self._t0 = time.monotonic()

    def now_ms(self) -> int:
        return int((time.monotonic() - self._t0) * 1000.0)
