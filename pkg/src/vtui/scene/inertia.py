"""Closed-form solid-body inertia tensors about the center of mass."""

from __future__ import annotations

from vtui.mathutil import Mat3
from vtui.scene.types import Box, Cylinder, Geometry, Sphere, StaticPlane


class ZeroMass(ValueError):
    """auto inertia requested for a non-positive mass."""


def auto_inertia(geometry: Geometry, mass: float) -> Mat3:
    """Inertia of a uniform solid of the given shape, diagonal in its own frame."""
    if mass <= 0.0:
        raise ZeroMass(f"mass must be > 0, got {mass}")
    if isinstance(geometry, Box):
        hx, hy, hz = geometry.half_extents
        # solid box: m (b^2 + c^2) / 12 with full side lengths
        ixx = mass * ((2.0 * hy) ** 2 + (2.0 * hz) ** 2) / 12.0
        iyy = mass * ((2.0 * hx) ** 2 + (2.0 * hz) ** 2) / 12.0
        izz = mass * ((2.0 * hx) ** 2 + (2.0 * hy) ** 2) / 12.0
    elif isinstance(geometry, Sphere):
        ixx = iyy = izz = 0.4 * mass * geometry.radius**2
    elif isinstance(geometry, Cylinder):
        r = geometry.radius
        full = 2.0 * geometry.half_length
        ixx = iyy = mass * (3.0 * r * r + full * full) / 12.0
        izz = 0.5 * mass * r * r
    elif isinstance(geometry, StaticPlane):
        raise ZeroMass("static planes carry no mass")
    else:
        raise TypeError(f"unsupported geometry {geometry!r}")
    return ((ixx, 0.0, 0.0), (0.0, iyy, 0.0), (0.0, 0.0, izz))
