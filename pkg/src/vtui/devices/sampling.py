"""Pure sampling math shared by the live devices and their tests."""

from __future__ import annotations

import math

from vtui.devices.errors import OffSurface
from vtui.mathutil import Quat, Vec3, qconj, qmul, qrotate, vscale, vsub
from vtui.mathutil import Pose

GRAVITY_DEFAULT: Vec3 = (0.0, 0.0, -9.81)


def proper_acceleration(
    v_now: Vec3,
    v_prev: Vec3,
    interval_s: float,
    device_orientation_world: Quat,
    gravity: Vec3,
) -> Vec3:
    """Accelerometer model: world acceleration of the mount point (finite
    difference over the sample interval) minus gravity, rotated into the
    device frame."""
    a_world = vscale(vsub(v_now, v_prev), 1.0 / interval_s)
    return qrotate(qconj(device_orientation_world), vsub(a_world, gravity))


def device_world_pose(body_position: Vec3, body_orientation: Quat, mount: Pose) -> Pose:
    return Pose(body_position, body_orientation).compose(mount)


def map_touch_point(
    mount_world: Pose,
    rect_w: float,
    rect_h: float,
    width_px: int,
    height_px: int,
    world_point: Vec3,
    plane_tol: float = 0.005,
) -> tuple[int, int]:
    """Project a world point into display pixels, top-left origin.

    The rectangle lies in the mount's local x-y plane: u runs along +x,
    v along -y.  Points further than `plane_tol` off the plane or outside
    the rectangle raise OffSurface.
    """
    local = mount_world.inverse().transform_point(world_point)
    if abs(local[2]) > plane_tol:
        raise OffSurface(f"point is {local[2]:.4f} m off the display plane")
    half_w, half_h = 0.5 * rect_w, 0.5 * rect_h
    x, y = local[0], local[1]
    edge_tol = 1e-9
    if not (-half_w - edge_tol <= x <= half_w + edge_tol):
        raise OffSurface("point is outside the display rectangle")
    if not (-half_h - edge_tol <= y <= half_h + edge_tol):
        raise OffSurface("point is outside the display rectangle")
    u = int(math.floor((x + half_w) / rect_w * width_px))
    v = int(math.floor((half_h - y) / rect_h * height_px))
    return (min(max(u, 0), width_px - 1), min(max(v, 0), height_px - 1))


def pixel_center_world(
    mount_world: Pose, rect_w: float, rect_h: float, width_px: int, height_px: int, u: int, v: int
) -> Vec3:
    """Inverse of map_touch_point on the pixel-center grid."""
    x = (u + 0.5) / width_px * rect_w - 0.5 * rect_w
    y = 0.5 * rect_h - (v + 0.5) / height_px * rect_h
    return mount_world.transform_point((x, y, 0.0))


def mount_ray(body_position: Vec3, body_orientation: Quat, mount: Pose) -> tuple[Vec3, Vec3]:
    """Proximity sensors cast along their mount frame's +x axis."""
    pose = device_world_pose(body_position, body_orientation, mount)
    direction = qrotate(qmul(body_orientation, mount.orientation), (1.0, 0.0, 0.0))
    return pose.position, direction
