"""Bit-exact payload codecs for device and world topics.

Payloads on the bus are opaque bytes; these dataclasses define the byte
layouts (little-endian, strings u16-length-prefixed UTF-8).  DisplayFrame
pixels are RGB8 row-major, exactly width*height*3 bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

from vtui.mathutil import Quat, Vec3

_U16 = struct.Struct("<H")
_ACCEL = struct.Struct("<q3d")
_PROX = struct.Struct("<qBd")
_CONTACT_HEAD = struct.Struct("<qH")
_CONTACT_EVENT = struct.Struct("<Iddddddd")
_TOUCH = struct.Struct("<qHHBB")
_BATTERY = struct.Struct("<qdB")
_BODY_STATE = struct.Struct("<I13d")
_WORLD_HEAD = struct.Struct("<QqI")
_WRENCH = struct.Struct("<I10dB")
_CHARGE = struct.Struct("<d")

PHASES = ("down", "move", "up")
SOURCES = ("contact", "ui")


def _pack_str(s: str) -> bytes:
    data = s.encode("utf-8")
    return _U16.pack(len(data)) + data


def _unpack_str(data: bytes, pos: int) -> tuple[str, int]:
    (n,) = _U16.unpack_from(data, pos)
    pos += 2
    return data[pos : pos + n].decode("utf-8"), pos + n


@dataclass(frozen=True)
class AccelSample:
    stamp_ns: int
    acceleration: Vec3  # proper acceleration in the device frame, m/s^2

    TYPE_TAG = "AccelSample"

    def to_bytes(self) -> bytes:
        return _ACCEL.pack(self.stamp_ns, *self.acceleration)

    @classmethod
    def from_bytes(cls, data: bytes) -> "AccelSample":
        stamp, ax, ay, az = _ACCEL.unpack(data)
        return cls(stamp, (ax, ay, az))


@dataclass(frozen=True)
class ProximitySample:
    stamp_ns: int
    distance: float | None  # None marks out-of-range

    TYPE_TAG = "ProximitySample"

    def to_bytes(self) -> bytes:
        in_range = self.distance is not None
        return _PROX.pack(self.stamp_ns, 1 if in_range else 0, self.distance or 0.0)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ProximitySample":
        stamp, flag, dist = _PROX.unpack(data)
        return cls(stamp, dist if flag else None)


@dataclass(frozen=True)
class ContactEvent:
    other_body: int
    point: Vec3
    normal: Vec3
    force: float  # average normal force over the step, N


@dataclass(frozen=True)
class ContactEvents:
    stamp_ns: int
    events: tuple[ContactEvent, ...]

    TYPE_TAG = "ContactEvents"

    def to_bytes(self) -> bytes:
        out = bytearray(_CONTACT_HEAD.pack(self.stamp_ns, len(self.events)))
        for e in self.events:
            out += _CONTACT_EVENT.pack(e.other_body, *e.point, *e.normal, e.force)
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ContactEvents":
        stamp, count = _CONTACT_HEAD.unpack_from(data, 0)
        pos = _CONTACT_HEAD.size
        events = []
        for _ in range(count):
            vals = _CONTACT_EVENT.unpack_from(data, pos)
            pos += _CONTACT_EVENT.size
            events.append(ContactEvent(vals[0], vals[1:4], vals[4:7], vals[7]))
        return cls(stamp, tuple(events))

    @property
    def total_force(self) -> float:
        return sum(e.force for e in self.events)


@dataclass(frozen=True)
class DisplayFrame:
    display_id: str
    width: int
    height: int
    pixels: bytes  # RGB8 row-major, len == width*height*3

    TYPE_TAG = "DisplayFrame"

    def __post_init__(self):
        if len(self.pixels) != self.width * self.height * 3:
            raise ValueError(
                f"pixel buffer is {len(self.pixels)} bytes, expected {self.width * self.height * 3}"
            )

    def to_bytes(self) -> bytes:
        return (
            _pack_str(self.display_id)
            + _U16.pack(self.width)
            + _U16.pack(self.height)
            + self.pixels
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "DisplayFrame":
        display_id, pos = _unpack_str(data, 0)
        (width,) = _U16.unpack_from(data, pos)
        (height,) = _U16.unpack_from(data, pos + 2)
        pixels = data[pos + 4 :]
        return cls(display_id, width, height, bytes(pixels))

    @classmethod
    def solid(cls, display_id: str, width: int, height: int, rgb: tuple[int, int, int]):
        return cls(display_id, width, height, bytes(rgb) * (width * height))


@dataclass(frozen=True)
class TouchEvent:
    display_id: str
    u: int
    v: int
    phase: str  # down | move | up
    source: str  # contact | ui
    stamp_ns: int

    TYPE_TAG = "TouchEvent"

    def to_bytes(self) -> bytes:
        return _TOUCH.pack(
            self.stamp_ns, self.u, self.v, PHASES.index(self.phase), SOURCES.index(self.source)
        ) + _pack_str(self.display_id)

    @classmethod
    def from_bytes(cls, data: bytes) -> "TouchEvent":
        stamp, u, v, phase, source = _TOUCH.unpack_from(data, 0)
        display_id, _ = _unpack_str(data, _TOUCH.size)
        return cls(display_id, u, v, PHASES[phase], SOURCES[source], stamp)


@dataclass(frozen=True)
class BatteryState:
    stamp_ns: int
    charge_fraction: float
    depleted: bool

    TYPE_TAG = "BatteryState"

    def to_bytes(self) -> bytes:
        return _BATTERY.pack(self.stamp_ns, self.charge_fraction, 1 if self.depleted else 0)

    @classmethod
    def from_bytes(cls, data: bytes) -> "BatteryState":
        stamp, frac, depleted = _BATTERY.unpack(data)
        return cls(stamp, frac, bool(depleted))


@dataclass(frozen=True)
class BodyState:
    body_id: int
    position: Vec3
    orientation: Quat
    linear_velocity: Vec3
    angular_velocity: Vec3


@dataclass(frozen=True)
class WorldState:
    step: int
    time_ns: int
    bodies: tuple[BodyState, ...]

    TYPE_TAG = "WorldState"

    def to_bytes(self) -> bytes:
        out = bytearray(_WORLD_HEAD.pack(self.step, self.time_ns, len(self.bodies)))
        for b in self.bodies:
            out += _BODY_STATE.pack(
                b.body_id,
                *b.position,
                *b.orientation,
                *b.linear_velocity,
                *b.angular_velocity,
            )
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes) -> "WorldState":
        step, time_ns, count = _WORLD_HEAD.unpack_from(data, 0)
        pos = _WORLD_HEAD.size
        bodies = []
        for _ in range(count):
            vals = _BODY_STATE.unpack_from(data, pos)
            pos += _BODY_STATE.size
            bodies.append(
                BodyState(vals[0], vals[1:4], vals[4:8], vals[8:11], vals[11:14])
            )
        return cls(step, time_ns, tuple(bodies))


@dataclass(frozen=True)
class WrenchWire:
    """Bus encoding of a world wrench command (topic /world/cmd/wrench)."""

    body_id: int
    force: Vec3
    torque: Vec3
    application_point: Vec3 | None
    duration: float

    TYPE_TAG = "WrenchCommand"

    def to_bytes(self) -> bytes:
        point = self.application_point or (0.0, 0.0, 0.0)
        return _WRENCH.pack(
            self.body_id,
            *self.force,
            *self.torque,
            *point,
            self.duration,
            1 if self.application_point is not None else 0,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "WrenchWire":
        vals = _WRENCH.unpack(data)
        point = vals[7:10] if vals[11] else None
        return cls(vals[0], vals[1:4], vals[4:7], point, vals[10])


@dataclass(frozen=True)
class ChargeCommand:
    amount_j: float

    TYPE_TAG = "ChargeCommand"

    def to_bytes(self) -> bytes:
        return _CHARGE.pack(self.amount_j)

    @classmethod
    def from_bytes(cls, data: bytes) -> "ChargeCommand":
        return cls(*_CHARGE.unpack(data))
