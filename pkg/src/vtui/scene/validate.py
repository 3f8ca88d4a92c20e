"""Scene validation: every diagnostic carries a machine-readable code."""

from __future__ import annotations

from dataclasses import dataclass

from vtui.mathutil import is_symmetric_positive_definite, vnorm
from vtui.scene.types import (
    JOINT_TYPES,
    Box,
    Cylinder,
    JointSpec,
    ModelSpec,
    SceneSpec,
    Sphere,
    StaticPlane,
)

UNIT_TOL = 1e-6


@dataclass(frozen=True)
class Diagnostic:
    code: str
    message: str
    where: str  # "model.link"-style path

    def __str__(self) -> str:
        return f"{self.code} at {self.where}: {self.message}"


def _check_geometry(geom, where: str, out: list[Diagnostic]) -> None:
    if isinstance(geom, Box):
        if min(geom.half_extents) <= 0.0:
            out.append(Diagnostic("RANGE", "box half extents must be > 0", where))
    elif isinstance(geom, Sphere):
        if geom.radius <= 0.0:
            out.append(Diagnostic("RANGE", "sphere radius must be > 0", where))
    elif isinstance(geom, Cylinder):
        if geom.radius <= 0.0 or geom.half_length <= 0.0:
            out.append(Diagnostic("RANGE", "cylinder dimensions must be > 0", where))
    elif isinstance(geom, StaticPlane):
        if abs(vnorm(geom.normal) - 1.0) > UNIT_TOL:
            out.append(Diagnostic("UNIT", "plane normal must be unit length", where))


def _check_joints(model: ModelSpec, out: list[Diagnostic]) -> None:
    links = {l.name: l for l in model.links}
    parent_of: dict[str, str] = {}
    for j in model.joints:
        where = f"{model.name}.{j.name}"
        if j.joint_type not in JOINT_TYPES:
            out.append(Diagnostic("JOINT_TYPE", f"unknown joint type {j.joint_type!r}", where))
        for end, link_name in (("parent", j.parent), ("child", j.child)):
            if link_name not in links:
                out.append(Diagnostic("UNKNOWN_LINK", f"unknown link {link_name!r} as {end}", where))
        if j.parent == j.child:
            out.append(Diagnostic("JOINT_LOOP", "joint connects a link to itself", where))
            continue
        child = links.get(j.child)
        if child is not None and child.is_static:
            out.append(Diagnostic("STATIC_CHILD", "static links cannot be joint children", where))
        if abs(vnorm(j.axis) - 1.0) > UNIT_TOL:
            out.append(Diagnostic("UNIT", "joint axis must be unit length", where))
        if j.limits is not None and j.limits[0] > j.limits[1]:
            out.append(Diagnostic("RANGE", "joint lower limit exceeds upper", where))
        if j.max_effort < 0.0 or j.damping < 0.0:
            out.append(Diagnostic("RANGE", "max_effort and damping must be >= 0", where))
        if j.child in parent_of:
            out.append(Diagnostic("JOINT_TREE", f"link {j.child!r} has two parents", where))
        parent_of[j.child] = j.parent
    # cycle detection over the child->parent map
    for start in parent_of:
        seen = {start}
        node = parent_of[start]
        while node in parent_of:
            if node in seen:
                out.append(
                    Diagnostic("JOINT_LOOP", f"joint graph cycle through {node!r}", model.name)
                )
                break
            seen.add(node)
            node = parent_of[node]


def _check_model(model: ModelSpec, out: list[Diagnostic]) -> None:
    names = [l.name for l in model.links]
    for name in sorted({n for n in names if names.count(n) > 1}):
        out.append(Diagnostic("DUPLICATE_LINK", f"link name {name!r} repeated", model.name))
    link_names = set(names)

    for link in model.links:
        where = f"{model.name}.{link.name}"
        _check_geometry(link.geometry, where, out)
        if link.mass < 0.0:
            out.append(Diagnostic("RANGE", "mass must be >= 0", where))
        if isinstance(link.geometry, StaticPlane) and link.mass != 0.0:
            out.append(Diagnostic("RANGE", "plane links must be static (mass 0)", where))
        if link.friction_mu < 0.0:
            out.append(Diagnostic("RANGE", "friction must be >= 0", where))
        if not 0.0 <= link.restitution <= 1.0:
            out.append(Diagnostic("RANGE", "restitution must be in [0, 1]", where))
        if not link.initial_pose.is_normalized():
            out.append(Diagnostic("QUAT", "pose quaternion not unit length", where))
        if link.mass > 0.0 and link.inertia is not None:
            if not is_symmetric_positive_definite(link.inertia):
                out.append(
                    Diagnostic("INERTIA", "inertia tensor must be symmetric positive-definite", where)
                )
        if not all(0 <= c <= 255 for c in link.color):
            out.append(Diagnostic("RANGE", "color channels must be 0..255", where))

    _check_joints(model, out)

    dev_ids = [d.device_id for d in model.devices] + [d.display_id for d in model.displays]
    for name in sorted({n for n in dev_ids if dev_ids.count(n) > 1}):
        out.append(Diagnostic("DUPLICATE_DEVICE", f"device id {name!r} repeated", model.name))
    batteries = {d.device_id for d in model.devices if d.kind == "battery"}

    for dev in model.devices:
        where = f"{model.name}.{dev.device_id}"
        if dev.mount_link not in link_names:
            out.append(Diagnostic("UNKNOWN_LINK", f"mount link {dev.mount_link!r} unknown", where))
        if not 0.0 < dev.rate <= 1000.0:
            out.append(Diagnostic("RANGE", "device rate must be in (0, 1000] Hz", where))
        if dev.kind == "proximity" and dev.max_range <= 0.0:
            out.append(Diagnostic("RANGE", "proximity max_range must be > 0", where))
        if dev.kind == "accelerometer" and dev.noise_sigma < 0.0:
            out.append(Diagnostic("RANGE", "noise_sigma must be >= 0", where))
        if dev.kind == "battery" and (dev.capacity_j <= 0.0 or dev.idle_w < 0.0 or dev.message_cost_j < 0.0):
            out.append(Diagnostic("RANGE", "battery parameters out of range", where))
        if dev.battery is not None and dev.battery not in batteries:
            out.append(Diagnostic("UNKNOWN_DEVICE", f"battery {dev.battery!r} unknown", where))

    for disp in model.displays:
        where = f"{model.name}.{disp.display_id}"
        if disp.mount_link not in link_names:
            out.append(Diagnostic("UNKNOWN_LINK", f"mount link {disp.mount_link!r} unknown", where))
        if disp.width <= 0 or disp.height <= 0:
            out.append(Diagnostic("RANGE", "display pixel dimensions must be > 0", where))
        if disp.rect_w <= 0.0 or disp.rect_h <= 0.0:
            out.append(Diagnostic("RANGE", "display rectangle size must be > 0", where))
        if not 0.0 < disp.rate <= 1000.0:
            out.append(Diagnostic("RANGE", "display rate must be in (0, 1000] Hz", where))
        if disp.battery is not None and disp.battery not in batteries:
            out.append(Diagnostic("UNKNOWN_DEVICE", f"battery {disp.battery!r} unknown", where))


def validate(spec: SceneSpec) -> list[Diagnostic]:
    """Empty list iff every declarative invariant holds."""
    out: list[Diagnostic] = []
    model_names = [m.name for m in spec.models]
    for name in sorted({n for n in model_names if model_names.count(n) > 1}):
        out.append(Diagnostic("DUPLICATE_MODEL", f"model name {name!r} repeated", name))
    for model in spec.models:
        _check_model(model, out)
    instance_names = [s.instance for s in spec.spawns]
    for name in sorted({n for n in instance_names if instance_names.count(n) > 1}):
        out.append(Diagnostic("DUPLICATE_INSTANCE", f"instance {name!r} spawned twice", name))
    for s in spec.spawns:
        if spec.model(s.model) is None:
            out.append(Diagnostic("UNKNOWN_MODEL", f"spawn references model {s.model!r}", s.instance))
        if not s.pose.is_normalized():
            out.append(Diagnostic("QUAT", "spawn pose quaternion not unit length", s.instance))
    return out
