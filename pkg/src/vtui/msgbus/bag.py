"""Bag files: ordered envelope logs with a bit-exact wire format.

Layout (all integers little-endian):

    header   : 8 bytes magic ``\\x89VTUIBAG`` + u32 version + u32 topic count
    then     : one length-prefixed frame per topic-table entry
    then     : one length-prefixed frame per record, until end of input

Every frame is ``u32 length`` followed by that many body bytes.  Strings
are u16-length-prefixed UTF-8.  A topic-table entry body is
``topic, type_tag``; a record body is ``topic, type_tag, publisher,
u64 seq, u64 stamp, u32-length-prefixed payload``.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, Callable

from .bus import Bus, MessageEnvelope, Publisher, pattern_to_regex, topic_matches
from .clock import VirtualClock
from .errors import BagCorrupt, SinkWriteError

BAG_MAGIC = b"\x89VTUIBAG"
BAG_VERSION = 1

_U16 = struct.Struct("<H")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


def _pack_str(out: bytearray, s: str) -> None:
    data = s.encode("utf-8")
    if len(data) > 0xFFFF:
        raise ValueError("string too long for u16 prefix")
    out += _U16.pack(len(data))
    out += data


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise BagCorrupt("truncated bag")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u16(self) -> int:
        return _U16.unpack(self.take(2))[0]

    def u32(self) -> int:
        return _U32.unpack(self.take(4))[0]

    def u64(self) -> int:
        return _U64.unpack(self.take(8))[0]

    def string(self) -> str:
        n = self.u16()
        try:
            return self.take(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise BagCorrupt("invalid UTF-8 in bag string") from exc

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.data)


@dataclass
class BagFile:
    """Parsed bag: topic table plus records ordered by (stamp, publisher, seq)."""

    topic_table: dict[str, str] = field(default_factory=dict)
    records: list[MessageEnvelope] = field(default_factory=list)
    version: int = BAG_VERSION

    @property
    def duration_ns(self) -> int:
        if not self.records:
            return 0
        return self.records[-1].stamp - self.records[0].stamp

    def validate(self) -> None:
        prev_key = None
        for rec in self.records:
            if rec.topic not in self.topic_table:
                raise BagCorrupt(f"record topic {rec.topic!r} missing from topic table")
            if self.topic_table[rec.topic] != rec.type_tag:
                raise BagCorrupt(f"record type tag mismatch on {rec.topic!r}")
            key = (rec.stamp, rec.publisher, rec.seq)
            if prev_key is not None and key < prev_key:
                raise BagCorrupt("records out of order")
            prev_key = key


def _encode_record(rec: MessageEnvelope) -> bytes:
    body = bytearray()
    _pack_str(body, rec.topic)
    _pack_str(body, rec.type_tag)
    _pack_str(body, rec.publisher)
    body += _U64.pack(rec.seq)
    body += _U64.pack(rec.stamp)
    body += _U32.pack(len(rec.payload))
    body += rec.payload
    return _U32.pack(len(body)) + bytes(body)


def serialize_bag(bag: BagFile) -> bytes:
    topics = sorted(bag.topic_table.items())
    out = bytearray()
    out += BAG_MAGIC
    out += _U32.pack(bag.version)
    out += _U32.pack(len(topics))
    for topic, tag in topics:
        body = bytearray()
        _pack_str(body, topic)
        _pack_str(body, tag)
        out += _U32.pack(len(body))
        out += body
    for rec in bag.records:
        out += _encode_record(rec)
    return bytes(out)


def parse_bag(data: bytes) -> BagFile:
    rd = _Reader(data)
    if rd.take(8) != BAG_MAGIC:
        raise BagCorrupt("bad magic")
    version = rd.u32()
    if version != BAG_VERSION:
        raise BagCorrupt(f"unsupported bag version {version}")
    topic_count = rd.u32()
    table: dict[str, str] = {}
    for _ in range(topic_count):
        length = rd.u32()
        body = _Reader(rd.take(length))
        topic = body.string()
        tag = body.string()
        if not body.exhausted:
            raise BagCorrupt("trailing bytes in topic-table entry")
        table[topic] = tag
    records: list[MessageEnvelope] = []
    while not rd.exhausted:
        length = rd.u32()
        body = _Reader(rd.take(length))
        topic = body.string()
        tag = body.string()
        publisher = body.string()
        seq = body.u64()
        stamp = body.u64()
        payload = body.take(body.u32())
        if not body.exhausted:
            raise BagCorrupt("trailing bytes in record")
        records.append(
            MessageEnvelope(
                topic=topic,
                type_tag=tag,
                publisher=publisher,
                seq=seq,
                stamp=stamp,
                payload=bytes(payload),
            )
        )
    bag = BagFile(topic_table=table, records=records, version=version)
    bag.validate()
    return bag


def load_bag(path: str) -> BagFile:
    with open(path, "rb") as fh:
        return parse_bag(fh.read())


def save_bag(bag: BagFile, path: str) -> None:
    with open(path, "wb") as fh:
        fh.write(serialize_bag(bag))


def normalize_bag(bag: BagFile) -> bytes:
    """Canonical bytes for comparing runs: replay publisher prefixes
    stripped, stamps rebased so the first record is at 0."""
    if not bag.records:
        return serialize_bag(bag)
    base = bag.records[0].stamp
    records = []
    for rec in bag.records:
        publisher = rec.publisher
        while publisher.startswith("replay:"):
            publisher = publisher[len("replay:") :]
        records.append(
            MessageEnvelope(
                topic=rec.topic,
                type_tag=rec.type_tag,
                publisher=publisher,
                seq=rec.seq,
                stamp=rec.stamp - base,
                payload=rec.payload,
            )
        )
    return serialize_bag(BagFile(topic_table=dict(bag.topic_table), records=records))


class Recorder:
    """Captures every envelope matching the topic patterns until stopped."""

    def __init__(self, bus: Bus, patterns: list[str], sink: BinaryIO | None = None):
        self.bus = bus
        self.patterns = list(patterns)
        self.sink = sink
        self._records: list[MessageEnvelope] = []
        self._table: dict[str, str] = {}
        self._remove = bus.add_tap(self.patterns, self._on_envelope)
        self._stopped = False

    def _on_envelope(self, env: MessageEnvelope) -> None:
        self._table.setdefault(env.topic, env.type_tag)
        self._records.append(env)

    def stop(self) -> BagFile:
        """Detach from the bus, write the bag to the sink and return it."""
        if self._stopped:
            raise RuntimeError("recorder already stopped")
        self._remove()
        self._stopped = True
        # capture order is causal order; the sort is stable, so it only
        # arranges same-stamp records into the header's (publisher, seq) order
        self._records.sort(key=lambda r: (r.stamp, r.publisher, r.seq))
        bag = BagFile(topic_table=self._table, records=self._records)
        if self.sink is not None:
            try:
                self.sink.write(serialize_bag(bag))
                self.sink.flush()
            except OSError as exc:
                raise SinkWriteError(str(exc)) from exc
        return bag


def record(bus: Bus, patterns: list[str], sink: BinaryIO | None = None) -> Recorder:
    for p in patterns:
        pattern_to_regex(p)  # validate early
    return Recorder(bus, patterns, sink)


@dataclass
class ReplayStats:
    messages_sent: int
    virtual_duration_ns: int


class Replayer:
    """Re-publishes bag records onto a bus as virtual time passes.

    A record becomes due once ``clock.now >= record.stamp / speed``; each
    `pump()` publishes everything due, preserving bag order.  Publisher
    identity becomes ``replay:<original-node>``.
    """

    def __init__(
        self,
        bus: Bus,
        bag: BagFile,
        speed: float = 1.0,
        remap: dict[str, str] | None = None,
        topic_filter: Callable[[str], bool] | None = None,
    ):
        if speed <= 0:
            raise ValueError("speed must be > 0")
        bag.validate()
        self.bus = bus
        self.speed = speed
        remap = remap or {}
        self._pubs: dict[tuple[str, str], Publisher] = {}
        self._queue: list[tuple[int, MessageEnvelope, str]] = []
        for rec in bag.records:
            topic = remap.get(rec.topic, rec.topic)
            if topic_filter is not None and not topic_filter(topic):
                continue
            due = int(rec.stamp / speed)
            self._queue.append((due, rec, topic))
        self._next = 0
        self.messages_sent = 0

    @property
    def exhausted(self) -> bool:
        return self._next >= len(self._queue)

    @property
    def next_due_ns(self) -> int | None:
        if self.exhausted:
            return None
        return self._queue[self._next][0]

    def _publisher(self, node: str, topic: str, type_tag: str) -> Publisher:
        key = (node, topic)
        pub = self._pubs.get(key)
        if pub is None:
            pub = self.bus.advertise(node, topic, type_tag)
            self._pubs[key] = pub
        return pub

    def pump(self) -> int:
        """Publish all records due at the bus clock's current time."""
        now = self.bus.clock.now
        sent = 0
        while not self.exhausted and self._queue[self._next][0] <= now:
            due, rec, topic = self._queue[self._next]
            node = f"replay:{rec.publisher}"
            self._publisher(node, topic, rec.type_tag).publish(rec.payload)
            self._next += 1
            sent += 1
        self.messages_sent += sent
        return sent


def replay(
    bus: Bus,
    bag: BagFile,
    speed: float = 1.0,
    remap: dict[str, str] | None = None,
) -> ReplayStats:
    """Drive a stepped clock through an entire bag and return stats."""
    clock = bus.clock
    if not clock.stepped_mode:
        raise RuntimeError("replay() requires a stepped clock")
    rp = Replayer(bus, bag, speed=speed, remap=remap)
    rp.pump()  # anything due at the current time
    while not rp.exhausted:
        clock.advance_to(rp.next_due_ns)
        rp.pump()
    duration = int(bag.duration_ns / speed)
    return ReplayStats(messages_sent=rp.messages_sent, virtual_duration_ns=duration)
