"""In-process publish/subscribe bus with services and recorder taps.

One `Bus` is the single communication fabric of a toolkit session:
simulated devices, application nodes, the gateway and replayed recordings
all talk through it.  Delivery is synchronous fan-out into per-subscriber
bounded queues (drop-oldest on overflow), so a publish is fully visible to
every subscriber queue before it returns.
"""

from __future__ import annotations

import re
import threading
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

from .clock import VirtualClock
from .errors import (
    BadTopicName,
    BusError,
    DuplicateService,
    HandleRevoked,
    NoSuchService,
    ServiceTimeout,
    TypeTagConflict,
)

TOPIC_RE = re.compile(r"^/[a-z0-9_]+(/[a-z0-9_]+)*$")

DEFAULT_QUEUE_DEPTH = 64


@dataclass(frozen=True)
class MessageEnvelope:
    """One typed, timestamped message traveling on a named topic.

    `seq` counts per (publisher, topic) starting at 0; `stamp` is virtual
    time in nanoseconds; the payload is opaque bytes whose schema is named
    by `type_tag`.
    """

    topic: str
    type_tag: str
    publisher: str
    seq: int
    stamp: int
    payload: bytes


def validate_topic_name(topic: str) -> None:
    if not TOPIC_RE.match(topic):
        raise BadTopicName(f"invalid topic name: {topic!r}")


def pattern_to_regex(pattern: str) -> re.Pattern[str]:
    """Compile a topic pattern: `*` matches one segment, `**` any suffix."""
    if not pattern.startswith("/"):
        raise BadTopicName(f"pattern must start with '/': {pattern!r}")
    parts = pattern[1:].split("/")
    out: list[str] = []
    for i, part in enumerate(parts):
        if part == "**":
            if i != len(parts) - 1:
                raise BadTopicName(f"'**' only allowed as final segment: {pattern!r}")
            # matches zero or more further segments
            out.append(r"(/[a-z0-9_]+)*")
            return re.compile("^" + "".join(out) + "$")
        if part == "*":
            out.append(r"/[a-z0-9_]+")
        elif re.fullmatch(r"[a-z0-9_]+", part):
            out.append("/" + re.escape(part))
        else:
            raise BadTopicName(f"invalid pattern segment {part!r} in {pattern!r}")
    return re.compile("^" + "".join(out) + "$")


def topic_matches(topic: str, patterns: list[re.Pattern[str]]) -> bool:
    return any(p.match(topic) for p in patterns)


class Subscription:
    """Drainable bounded message queue attached to one topic."""

    def __init__(self, bus: "Bus", node: str, topic: str, type_tag: str, queue_depth: int):
        self.bus = bus
        self.node = node
        self.topic = topic
        self.type_tag = type_tag
        self.queue_depth = queue_depth
        self.drops = 0
        self._queue: deque[MessageEnvelope] = deque()
        self._active = True

    def _deliver(self, env: MessageEnvelope) -> None:
        # caller holds the bus lock
        if len(self._queue) >= self.queue_depth:
            self._queue.popleft()
            self.drops += 1
        self._queue.append(env)

    def drain(self) -> list[MessageEnvelope]:
        """Remove and return all queued envelopes, oldest first."""
        with self.bus._lock:
            out = list(self._queue)
            self._queue.clear()
        return out

    def __len__(self) -> int:
        return len(self._queue)

    def close(self) -> None:
        with self.bus._lock:
            self._active = False
            self._queue.clear()


class Publisher:
    """Handle returned by advertise(); owns the per-(node, topic) seq counter."""

    def __init__(self, bus: "Bus", node: str, topic: str, type_tag: str):
        self.bus = bus
        self.node = node
        self.topic = topic
        self.type_tag = type_tag

    def publish(self, payload: bytes, clock: VirtualClock | None = None) -> int:
        """Publish `payload`, stamped with the clock; returns the assigned seq."""
        return self.bus._publish(self, payload, clock)


class _Topic:
    __slots__ = ("name", "type_tag", "publishers", "subscriptions", "seq")

    def __init__(self, name: str, type_tag: str):
        self.name = name
        self.type_tag = type_tag
        self.publishers: set[str] = set()
        self.subscriptions: list[Subscription] = []
        self.seq: dict[str, int] = {}  # publisher node -> next seq


class Bus:
    """Thread-safe in-process topic bus with request/reply services."""

    def __init__(self, clock: VirtualClock | None = None):
        self.clock = clock if clock is not None else VirtualClock.stepped()
        self._lock = threading.RLock()
        self._topics: dict[str, _Topic] = {}
        self._services: dict[str, Callable[[bytes], bytes]] = {}
        self._dead_nodes: set[str] = set()
        self._taps: list[tuple[list[re.Pattern[str]], Callable[[MessageEnvelope], None]]] = []
        self._last_stamp: dict[str, int] = {}  # publisher node -> last stamp
        self.published_total = 0

    # -- topics ---------------------------------------------------------

    def _topic_entry(self, topic: str, type_tag: str) -> _Topic:
        validate_topic_name(topic)
        entry = self._topics.get(topic)
        if entry is None:
            entry = _Topic(topic, type_tag)
            self._topics[topic] = entry
        elif entry.type_tag != type_tag:
            raise TypeTagConflict(
                f"topic {topic!r} is {entry.type_tag!r}, not {type_tag!r}"
            )
        return entry

    def advertise(self, node: str, topic: str, type_tag: str) -> Publisher:
        """Register `node` as a publisher; fixes the topic's type tag on first use."""
        with self._lock:
            entry = self._topic_entry(topic, type_tag)
            entry.publishers.add(node)
            entry.seq.setdefault(node, 0)
            return Publisher(self, node, topic, type_tag)

    def subscribe(
        self,
        node: str,
        topic: str,
        type_tag: str,
        queue_depth: int = DEFAULT_QUEUE_DEPTH,
    ) -> Subscription:
        """Attach a bounded queue to `topic`; later publishes land in it."""
        if queue_depth < 1:
            raise ValueError("queue_depth must be >= 1")
        with self._lock:
            entry = self._topic_entry(topic, type_tag)
            sub = Subscription(self, node, topic, type_tag, queue_depth)
            entry.subscriptions.append(sub)
            return sub

    def _publish(self, handle: Publisher, payload: bytes, clock: VirtualClock | None) -> int:
        if not isinstance(payload, (bytes, bytearray)):
            raise TypeError("payload must be bytes")
        clk = clock if clock is not None else self.clock
        with self._lock:
            if handle.node in self._dead_nodes:
                raise HandleRevoked(f"node {handle.node!r} was shut down")
            entry = self._topics.get(handle.topic)
            if entry is None or handle.node not in entry.publishers:
                raise HandleRevoked(f"stale publisher handle for {handle.topic!r}")
            seq = entry.seq[handle.node]
            entry.seq[handle.node] = seq + 1
            stamp = clk.now
            last = self._last_stamp.get(handle.node)
            if last is not None and stamp < last:
                stamp = last  # stamps are non-decreasing per publisher
            self._last_stamp[handle.node] = stamp
            env = MessageEnvelope(
                topic=handle.topic,
                type_tag=handle.type_tag,
                publisher=handle.node,
                seq=seq,
                stamp=stamp,
                payload=bytes(payload),
            )
            for sub in entry.subscriptions:
                if sub._active:
                    sub._deliver(env)
            for patterns, fn in self._taps:
                if topic_matches(env.topic, patterns):
                    fn(env)
            self.published_total += 1
            return seq

    def shutdown_node(self, node: str) -> None:
        """Revoke all publisher handles held by `node`."""
        with self._lock:
            self._dead_nodes.add(node)

    def topic_type(self, topic: str) -> str | None:
        with self._lock:
            entry = self._topics.get(topic)
            return entry.type_tag if entry else None

    def topics(self) -> dict[str, str]:
        """Snapshot of topic -> type tag."""
        with self._lock:
            return {name: t.type_tag for name, t in self._topics.items()}

    def subscriptions_of(self, node: str) -> list[str]:
        """Topics `node` currently subscribes to (used by the bus-audit test)."""
        with self._lock:
            out = []
            for entry in self._topics.values():
                for sub in entry.subscriptions:
                    if sub._active and sub.node == node:
                        out.append(entry.name)
            return sorted(set(out))

    # -- taps (recorder hooks) ------------------------------------------

    def add_tap(
        self, patterns: list[str], fn: Callable[[MessageEnvelope], None]
    ) -> Callable[[], None]:
        """Invoke `fn` synchronously for every envelope matching `patterns`.

        Returns a removal callback.  Taps run under the bus lock and must
        be fast and non-reentrant.
        """
        compiled = [pattern_to_regex(p) for p in patterns]
        item = (compiled, fn)
        with self._lock:
            self._taps.append(item)

        def remove() -> None:
            with self._lock:
                if item in self._taps:
                    self._taps.remove(item)

        return remove

    # -- services --------------------------------------------------------

    def register_service(
        self, node: str, name: str, handler: Callable[[bytes], bytes]
    ) -> str:
        validate_topic_name(name)
        with self._lock:
            if name in self._services:
                raise DuplicateService(f"service {name!r} already registered")
            self._services[name] = handler
        return name

    def unregister_service(self, name: str) -> None:
        with self._lock:
            self._services.pop(name, None)

    def call_service(self, name: str, request: bytes, timeout: float = 1.0) -> bytes:
        """Run the handler exactly once and return its response.

        The handler executes on a worker owned by this call; if it does not
        finish within `timeout` seconds a ServiceTimeout is raised and the
        handler's eventual result is discarded.
        """
        with self._lock:
            handler = self._services.get(name)
        if handler is None:
            raise NoSuchService(f"no service {name!r}")

        result: list[bytes] = []
        error: list[BaseException] = []

        def runner() -> None:
            try:
                result.append(handler(request))
            except BaseException as exc:  # surfaced to the caller below
                error.append(exc)

        worker = threading.Thread(target=runner, daemon=True)
        worker.start()
        worker.join(timeout)
        if worker.is_alive():
            raise ServiceTimeout(f"service {name!r} exceeded {timeout} s")
        if error:
            raise BusError(f"service {name!r} handler failed") from error[0]
        return result[0]

    # -- iteration helper --------------------------------------------------

    def __iter__(self) -> Iterator[str]:
        return iter(self.topics())
