"""Dice-style face-up detection from accelerometer samples."""

from __future__ import annotations

from enum import Enum

from vtui.devices.messages import AccelSample
from vtui.mathutil import Vec3, vdot, vnorm

QUASI_STATIC_MIN = 8.3  # m/s^2
QUASI_STATIC_MAX = 11.3
EDGE_BALANCE_RATIO = 0.15


class Face(Enum):
    PX = "+x"
    NX = "-x"
    PY = "+y"
    NY = "-y"
    PZ = "+z"
    NZ = "-z"

    @property
    def normal(self) -> Vec3:
        return _NORMALS[self]

    @property
    def dice_value(self) -> int:
        """Die numbering with opposite faces summing to 7 (+z up is 1)."""
        return _DICE[self]


_NORMALS = {
    Face.PX: (1.0, 0.0, 0.0),
    Face.NX: (-1.0, 0.0, 0.0),
    Face.PY: (0.0, 1.0, 0.0),
    Face.NY: (0.0, -1.0, 0.0),
    Face.PZ: (0.0, 0.0, 1.0),
    Face.NZ: (0.0, 0.0, -1.0),
}

_DICE = {Face.PZ: 1, Face.NZ: 6, Face.PX: 2, Face.NX: 5, Face.PY: 3, Face.NY: 4}

_ORDER = (Face.PX, Face.NX, Face.PY, Face.NY, Face.PZ, Face.NZ)


def face_up_direction(accel: Vec3) -> Face | None:
    """Face whose outward normal best matches the gravity-reaction vector;
    None when the top two candidates are within 15% (edge-balanced)."""
    dots = sorted(
        ((vdot(accel, f.normal), i, f) for i, f in enumerate(_ORDER)),
        key=lambda d: (-d[0], d[1]),
    )
    best, second = dots[0], dots[1]
    if best[0] <= 0.0:
        return None
    if (best[0] - second[0]) < EDGE_BALANCE_RATIO * best[0]:
        return None
    return best[2]


def face_up(sample: AccelSample | Vec3) -> Face | None:
    """face_up with the quasi-static gate: |a| must look like rest gravity."""
    accel = sample.acceleration if isinstance(sample, AccelSample) else sample
    magnitude = vnorm(accel)
    if not QUASI_STATIC_MIN <= magnitude <= QUASI_STATIC_MAX:
        return None
    return face_up_direction(accel)
