"""Declarative scene data: geometry, links, joints, models, spawns."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from vtui.mathutil import Mat3, Vec3
from vtui.scene.pose import Pose

if TYPE_CHECKING:  # authored in vtui.devices; type-only here to avoid a cycle
    from vtui.devices.descriptors import DeviceDescriptor, DisplaySpec


@dataclass(frozen=True)
class Box:
    half_extents: Vec3

    kind = "box"


@dataclass(frozen=True)
class Sphere:
    radius: float

    kind = "sphere"


@dataclass(frozen=True)
class Cylinder:
    radius: float
    half_length: float

    kind = "cylinder"


@dataclass(frozen=True)
class StaticPlane:
    normal: Vec3
    offset: float

    kind = "static_plane"


Geometry = Box | Sphere | Cylinder | StaticPlane


@dataclass(frozen=True)
class LinkSpec:
    """One rigid body of a model; mass 0 marks a static link."""

    name: str
    geometry: Geometry
    mass: float = 0.0
    inertia: Mat3 | None = None  # None means auto (from geometry)
    friction_mu: float = 0.5
    restitution: float = 0.0
    initial_pose: Pose = Pose()
    color: tuple[int, int, int] = (180, 180, 180)

    @property
    def is_static(self) -> bool:
        return self.mass == 0.0


JOINT_TYPES = ("fixed", "revolute", "prismatic")


@dataclass(frozen=True)
class JointSpec:
    """Constraint between a parent and a child link.

    Axis and anchor are expressed in the parent link's frame.  Limits are
    radians for revolute and meters for prismatic; None means unlimited.
    """

    name: str
    joint_type: str
    parent: str
    child: str
    axis: Vec3 = (0.0, 0.0, 1.0)
    anchor: Vec3 = (0.0, 0.0, 0.0)
    limits: tuple[float, float] | None = None
    max_effort: float = float("inf")
    damping: float = 0.0


@dataclass(frozen=True)
class ModelSpec:
    name: str
    links: tuple[LinkSpec, ...] = ()
    joints: tuple[JointSpec, ...] = ()
    devices: tuple[DeviceDescriptor, ...] = ()
    displays: tuple[DisplaySpec, ...] = ()

    def link(self, name: str) -> LinkSpec | None:
        for l in self.links:
            if l.name == name:
                return l
        return None


@dataclass(frozen=True)
class SpawnSpec:
    model: str
    instance: str
    pose: Pose = Pose()


@dataclass(frozen=True)
class SceneSpec:
    format_version: int = 1
    gravity: Vec3 = (0.0, 0.0, -9.81)
    models: tuple[ModelSpec, ...] = ()
    spawns: tuple[SpawnSpec, ...] = ()
    params: tuple[tuple[str, float], ...] = ()  # free-form app parameters

    def model(self, name: str) -> ModelSpec | None:
        for m in self.models:
            if m.name == name:
                return m
        return None

    @property
    def links(self) -> list[LinkSpec]:
        return [l for m in self.models for l in m.links]

    def param(self, key: str, default: float | None = None) -> float | None:
        d = dict(self.params)
        return d.get(key, default)
