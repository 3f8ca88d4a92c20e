"""Virtual time source shared by the bus, the world and replay."""

from __future__ import annotations

import time


class VirtualClock:
    """Monotonic nanosecond clock decoupled from wall time.

    In stepped mode (the default) time advances only through explicit
    `tick`/`advance_to` calls, which is what makes replay and recorded
    runs bit-reproducible.  In realtime-scaled mode `now` tracks the wall
    clock multiplied by a speed factor.
    """

    def __init__(self, realtime_factor: float | None = None):
        if realtime_factor is not None and realtime_factor <= 0:
            raise ValueError("realtime factor must be > 0")
        self._factor = realtime_factor
        self._now_ns = 0
        self._wall_start = time.monotonic_ns() if realtime_factor else 0

    @classmethod
    def stepped(cls) -> "VirtualClock":
        return cls()

    @classmethod
    def realtime(cls, factor: float = 1.0) -> "VirtualClock":
        return cls(realtime_factor=factor)

    @property
    def stepped_mode(self) -> bool:
        return self._factor is None

    @property
    def now(self) -> int:
        """Current virtual time in nanoseconds."""
        if self._factor is not None:
            scaled = int((time.monotonic_ns() - self._wall_start) * self._factor)
            if scaled > self._now_ns:
                self._now_ns = scaled
        return self._now_ns

    def tick(self, dt_ns: int) -> int:
        """Advance a stepped clock by `dt_ns`; returns the new time."""
        if self._factor is not None:
            raise RuntimeError("tick() is only valid in stepped mode")
        if dt_ns < 0:
            raise ValueError("dt_ns must be >= 0")
        self._now_ns += dt_ns
        return self._now_ns

    def advance_to(self, t_ns: int) -> int:
        """Advance a stepped clock to absolute time `t_ns` (no-op if in the past)."""
        if self._factor is not None:
            raise RuntimeError("advance_to() is only valid in stepped mode")
        if t_ns > self._now_ns:
            self._now_ns = t_ns
        return self._now_ns
