"""Marble-answering-machine ball: growth law and squeeze detection."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

from vtui.devices.messages import ContactEvents


@dataclass(frozen=True)
class BallModelParams:
    r0: float = 0.05  # m
    growth: float = 0.1  # per log2 message count
    tau_s: float = 30.0  # decay time constant
    r_min: float = 0.03
    r_max: float = 0.10
    squeeze_threshold_n: float = 5.0

    def __post_init__(self):
        if not self.r_min <= self.r0 <= self.r_max:
            raise ValueError("require r_min <= r0 <= r_max")
        if self.tau_s <= 0.0:
            raise ValueError("tau must be > 0")


def ball_radius(n_messages: int, t_since_last_s: float, p: BallModelParams) -> float:
    """Radius grows with message count and decays toward r_min with idle time."""
    if n_messages < 0 or t_since_last_s < 0.0:
        raise ValueError("counts and times must be non-negative")
    r = p.r0 * (1.0 + p.growth * math.log2(1.0 + n_messages)) * math.exp(-t_since_last_s / p.tau_s)
    return max(p.r_min, min(p.r_max, r))


class SqueezeDetector:
    """One event per squeeze episode: force above threshold for >= 3 samples."""

    def __init__(self, threshold_n: float, consecutive: int = 3):
        self.threshold_n = threshold_n
        self.consecutive = consecutive
        self._streak = 0
        self._in_episode = False

    def update(self, force_n: float) -> bool:
        """Feed one contact-force sample; True exactly when an event fires."""
        if force_n > self.threshold_n:
            self._streak += 1
            if self._streak >= self.consecutive and not self._in_episode:
                self._in_episode = True
                return True
        else:
            self._streak = 0
            self._in_episode = False
        return False


SQUEEZE_TOPIC = "/app/marble/squeeze"


class MarbleNode:
    """Ball app: tracks messages, resizes the ball, emits squeeze events.

    Subscribes to the ball's contact samples and its /app message topic;
    publishes squeeze events on /app/marble/squeeze.  The radius update is
    enqueued as a session command and lands at a step boundary.
    """

    def __init__(self, bus, instance: str, params: BallModelParams, contact_device: str = "contact"):
        self.node_id = f"marble:{instance}"
        self.instance = instance
        self.params = params
        self.detector = SqueezeDetector(params.squeeze_threshold_n)
        self._contact_sub = bus.subscribe(
            self.node_id, f"/tui/{instance}/{contact_device}/sample", "ContactEvents", 64
        )
        self._message_sub = bus.subscribe(
            self.node_id, f"/app/marble/{instance}/message", "MarbleMessage", 64
        )
        self._pub = bus.advertise(self.node_id, SQUEEZE_TOPIC, "SqueezeEvent")
        self.n_messages = 0
        self.last_message_ns: int | None = None
        self.squeezes = 0
        self._current_radius = params.r0

    def radius_at(self, now_ns: int) -> float:
        if self.last_message_ns is None:  # fresh ball: default size
            return ball_radius(0, 0.0, self.params)
        t = max(0.0, (now_ns - self.last_message_ns) / 1e9)
        return ball_radius(self.n_messages, t, self.params)

    def pump(self, session) -> None:
        for env in self._message_sub.drain():
            self.n_messages += 1
            self.last_message_ns = env.stamp
        for env in self._contact_sub.drain():
            events = ContactEvents.from_bytes(env.payload)
            if self.detector.update(events.total_force):
                self.squeezes += 1
                self._pub.publish(
                    struct.pack("<q", events.stamp_ns) + self.instance.encode()
                )
        radius = self.radius_at(session.time_ns)
        if abs(radius - self._current_radius) > 1e-6:
            self._current_radius = radius
            body_id = session.world.instances[self.instance]["body"]
            from vtui.runtime.session import QueuedCommand

            session.enqueue(
                QueuedCommand(lambda s, r=radius, b=body_id: s.world.set_sphere_radius(b, r))
            )
