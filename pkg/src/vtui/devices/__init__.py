"""Virtual sensors/actuators and the hardware abstraction layer."""

from .descriptors import DEVICE_KINDS, FACES, DeviceDescriptor, DisplaySpec
from .errors import (
    AlreadyBound,
    BatteryDepleted,
    DeviceError,
    DimensionMismatch,
    NoSuchDevice,
    OffSurface,
    RateMismatch,
)
from .manager import (
    AccelerometerDevice,
    BatteryDevice,
    ContactSensorDevice,
    Device,
    DeviceManager,
    DisplayDevice,
    ProximityDevice,
    ReplayBackend,
    ScriptedBackend,
    VirtualBackend,
    device_topic,
)
from .messages import (
    AccelSample,
    BatteryState,
    BodyState,
    ChargeCommand,
    ContactEvent,
    ContactEvents,
    DisplayFrame,
    ProximitySample,
    TouchEvent,
    WorldState,
    WrenchWire,
)
from .sampling import map_touch_point, pixel_center_world, proper_acceleration

__all__ = [
    "DEVICE_KINDS",
    "FACES",
    "DeviceDescriptor",
    "DisplaySpec",
    "AlreadyBound",
    "BatteryDepleted",
    "DeviceError",
    "DimensionMismatch",
    "NoSuchDevice",
    "OffSurface",
    "RateMismatch",
    "AccelerometerDevice",
    "BatteryDevice",
    "ContactSensorDevice",
    "Device",
    "DeviceManager",
    "DisplayDevice",
    "ProximityDevice",
    "ReplayBackend",
    "ScriptedBackend",
    "VirtualBackend",
    "device_topic",
    "AccelSample",
    "BatteryState",
    "BodyState",
    "ChargeCommand",
    "ContactEvent",
    "ContactEvents",
    "DisplayFrame",
    "ProximitySample",
    "TouchEvent",
    "WorldState",
    "WrenchWire",
    "map_touch_point",
    "pixel_center_world",
    "proper_acceleration",
]
