"""Device and display descriptors: declarative, attached to model links."""

from __future__ import annotations

import math
from dataclasses import dataclass

from vtui.mathutil import Quat, Vec3
from vtui.mathutil import Pose

DEVICE_KINDS = ("accelerometer", "contact", "proximity", "display", "touchscreen", "battery")

FACES = ("+x", "-x", "+y", "-y", "+z", "-z")

_H = math.sqrt(0.5)

# rotation taking local +x to the face's outward normal (sensor ray frames)
FACE_FRAME_X: dict[str, Quat] = {
    "+x": (1.0, 0.0, 0.0, 0.0),
    "-x": (0.0, 0.0, 0.0, 1.0),
    "+y": (_H, 0.0, 0.0, _H),
    "-y": (_H, 0.0, 0.0, -_H),
    "+z": (_H, 0.0, -_H, 0.0),
    "-z": (_H, 0.0, _H, 0.0),
}

# rotation taking local +z to the face's outward normal (display frames)
FACE_FRAME_Z: dict[str, Quat] = {
    "+z": (1.0, 0.0, 0.0, 0.0),
    "-z": (0.0, 1.0, 0.0, 0.0),
    "+x": (_H, 0.0, _H, 0.0),
    "-x": (_H, 0.0, -_H, 0.0),
    "+y": (_H, -_H, 0.0, 0.0),
    "-y": (_H, _H, 0.0, 0.0),
}

FACE_NORMALS: dict[str, Vec3] = {
    "+x": (1.0, 0.0, 0.0),
    "-x": (-1.0, 0.0, 0.0),
    "+y": (0.0, 1.0, 0.0),
    "-y": (0.0, -1.0, 0.0),
    "+z": (0.0, 0.0, 1.0),
    "-z": (0.0, 0.0, -1.0),
}


@dataclass(frozen=True)
class DeviceDescriptor:
    """One virtual sensor/actuator mounted on a link.

    `rate` must divide the simulation rate evenly so sampling lands on step
    boundaries.  Kind-specific parameters are plain fields; irrelevant ones
    keep their defaults.
    """

    device_id: str
    kind: str
    mount_link: str
    mount_pose: Pose = Pose()
    rate: float = 100.0
    noise_sigma: float = 0.0  # accelerometer, m/s^2 per axis
    max_range: float = 1.0  # proximity, m
    capacity_j: float = 100.0  # battery
    idle_w: float = 0.0
    message_cost_j: float = 0.0
    battery: str | None = None  # id of the battery device powering this one


@dataclass(frozen=True)
class DisplaySpec:
    """Touch-sensitive display rectangle mounted on a link.

    The rectangle lies in the mount pose's local x-y plane with +z as the
    outward normal; pixel (0,0) is the top-left corner, u along local +x,
    v along local -y.
    """

    display_id: str
    width: int
    height: int
    mount_link: str
    mount_pose: Pose = Pose()
    rect_w: float = 0.05  # meters
    rect_h: float = 0.05
    rate: float = 100.0  # contact-derived touch scan rate
    battery: str | None = None
