"""Parser and serializer for the `.scene` structured-text format.

The grammar is line oriented: the first token of a line is a directive,
the rest are its arguments, and deeper-indented lines underneath it are
its children.  `docs/scene-format.md` documents every directive; the
format is versioned via the mandatory `scene_format` header line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from vtui.devices.descriptors import (
    DEVICE_KINDS,
    FACE_FRAME_X,
    FACE_FRAME_Z,
    FACE_NORMALS,
    DeviceDescriptor,
    DisplaySpec,
)
from vtui.mathutil import qnorm, qnormalize
from vtui.scene.pose import Pose
from vtui.scene.types import (
    Box,
    Cylinder,
    Geometry,
    JointSpec,
    LinkSpec,
    ModelSpec,
    SceneSpec,
    SpawnSpec,
    Sphere,
    StaticPlane,
)
from vtui.scene.validate import Diagnostic, validate

SCENE_FORMAT = 1


class SceneError(Exception):
    """Base class for scene loading failures."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"line {line}, col {col}: {message}" if line else message)
        self.line = line
        self.col = col


class SceneSyntaxError(SceneError):
    pass


class UnknownFieldError(SceneError):
    pass


class BadValueError(SceneError):
    pass


class SceneValidationError(SceneError):
    def __init__(self, diagnostics: list[Diagnostic]):
        summary = "; ".join(str(d) for d in diagnostics[:5])
        if len(diagnostics) > 5:
            summary += f" (+{len(diagnostics) - 5} more)"
        super().__init__(f"scene validation failed: {summary}")
        self.diagnostics = diagnostics


@dataclass
class _Node:
    key: str
    args: list[str]
    line: int
    cols: list[int]  # column of each arg token
    indent: int
    children: list["_Node"]

    def arg_col(self, i: int) -> int:
        if i < len(self.cols):
            return self.cols[i]
        return self.cols[-1] if self.cols else 1


def _tokenize(text: str) -> list[_Node]:
    roots: list[_Node] = []
    stack: list[_Node] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if "\t" in raw:
            raise SceneSyntaxError("tab characters are not allowed", lineno, raw.index("\t") + 1)
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip(" "))
        tokens: list[str] = []
        cols: list[int] = []
        i = indent
        while i < len(line):
            if line[i] == " ":
                i += 1
                continue
            j = i
            while j < len(line) and line[j] != " ":
                j += 1
            tokens.append(line[i:j])
            cols.append(i + 1)
            i = j
        node = _Node(tokens[0], tokens[1:], lineno, cols, indent, [])
        while stack and stack[-1].indent >= indent:
            stack.pop()
        if stack:
            if indent <= stack[-1].indent:
                raise SceneSyntaxError("bad indentation", lineno, indent + 1)
            stack[-1].children.append(node)
        else:
            if indent != 0:
                raise SceneSyntaxError("unexpected indentation at top level", lineno, indent + 1)
            roots.append(node)
        stack.append(node)
    return roots


def _float(node: _Node, i: int) -> float:
    try:
        value = float(node.args[i])
    except (ValueError, IndexError):
        raise BadValueError(
            f"expected a number for {node.key!r}", node.line, node.arg_col(i)
        ) from None
    if not math.isfinite(value):
        raise BadValueError(f"non-finite number for {node.key!r}", node.line, node.arg_col(i))
    return value


def _int(node: _Node, i: int) -> int:
    try:
        return int(node.args[i], 10)
    except (ValueError, IndexError):
        raise BadValueError(
            f"expected an integer for {node.key!r}", node.line, node.arg_col(i)
        ) from None


def _nargs(node: _Node, n: int) -> None:
    if len(node.args) != n:
        raise SceneSyntaxError(
            f"{node.key!r} takes {n} argument(s), got {len(node.args)}", node.line, node.cols[0]
        )


def _vec3(node: _Node, i: int) -> tuple[float, float, float]:
    return (_float(node, i), _float(node, i + 1), _float(node, i + 2))


def _quat(node: _Node, i: int) -> tuple[float, float, float, float]:
    q = (_float(node, i), _float(node, i + 1), _float(node, i + 2), _float(node, i + 3))
    n = qnorm(q)
    if abs(n - 1.0) > 1e-6:
        raise BadValueError(f"quaternion norm {n:.6g} is not 1", node.line, node.arg_col(i))
    if abs(n - 1.0) > 1e-9:  # renormalize sloppy hand-written values only
        return qnormalize(q)
    return q


def _no_children(node: _Node) -> None:
    if node.children:
        raise SceneSyntaxError(f"{node.key!r} takes no children", node.children[0].line, 1)


def _parse_geometry(node: _Node) -> Geometry:
    if not node.args:
        raise SceneSyntaxError("geometry needs a shape", node.line, node.cols[0])
    shape = node.args[0]
    if shape == "box":
        _nargs(node, 4)
        return Box(half_extents=_vec3(node, 1))
    if shape == "sphere":
        _nargs(node, 2)
        return Sphere(radius=_float(node, 1))
    if shape == "cylinder":
        _nargs(node, 3)
        return Cylinder(radius=_float(node, 1), half_length=_float(node, 2))
    if shape == "plane":
        _nargs(node, 5)
        return StaticPlane(normal=_vec3(node, 1), offset=_float(node, 4))
    raise BadValueError(f"unknown geometry {shape!r}", node.line, node.arg_col(0))


def _parse_link(node: _Node) -> LinkSpec:
    _nargs(node, 1)
    name = node.args[0]
    geometry: Geometry | None = None
    fields: dict = {}
    for child in node.children:
        _no_children(child)
        key = child.key
        if key == "geometry":
            geometry = _parse_geometry(child)
        elif key == "mass":
            _nargs(child, 1)
            fields["mass"] = _float(child, 0)
        elif key == "inertia":
            if child.args == ["auto"]:
                fields["inertia"] = None
            else:
                _nargs(child, 9)
                v = [_float(child, i) for i in range(9)]
                fields["inertia"] = (tuple(v[0:3]), tuple(v[3:6]), tuple(v[6:9]))
        elif key == "friction":
            _nargs(child, 1)
            fields["friction_mu"] = _float(child, 0)
        elif key == "restitution":
            _nargs(child, 1)
            fields["restitution"] = _float(child, 0)
        elif key == "pose":
            _nargs(child, 7)
            fields["initial_pose"] = Pose(_vec3(child, 0), _quat(child, 3))
        elif key == "color":
            _nargs(child, 3)
            fields["color"] = (_int(child, 0), _int(child, 1), _int(child, 2))
        else:
            raise UnknownFieldError(f"unknown link field {key!r}", child.line, child.cols[0])
    if geometry is None:
        raise SceneSyntaxError(f"link {name!r} has no geometry", node.line, node.cols[0])
    return LinkSpec(name=name, geometry=geometry, **fields)


def _parse_joint(node: _Node) -> JointSpec:
    _nargs(node, 2)
    name, joint_type = node.args
    if joint_type == "sliding":  # alias
        joint_type = "prismatic"
    fields: dict = {}
    for child in node.children:
        _no_children(child)
        key = child.key
        if key in ("parent", "child"):
            _nargs(child, 1)
            fields[key] = child.args[0]
        elif key == "axis":
            _nargs(child, 3)
            fields["axis"] = _vec3(child, 0)
        elif key == "anchor":
            _nargs(child, 3)
            fields["anchor"] = _vec3(child, 0)
        elif key == "limits":
            _nargs(child, 2)
            fields["limits"] = (_float(child, 0), _float(child, 1))
        elif key == "max_effort":
            _nargs(child, 1)
            fields["max_effort"] = _float(child, 0)
        elif key == "damping":
            _nargs(child, 1)
            fields["damping"] = _float(child, 0)
        else:
            raise UnknownFieldError(f"unknown joint field {key!r}", child.line, child.cols[0])
    if "parent" not in fields or "child" not in fields:
        raise SceneSyntaxError(f"joint {name!r} needs parent and child", node.line, node.cols[0])
    return JointSpec(name=name, joint_type=joint_type, **fields)


def _face_size(geom: Geometry, face: str, node: _Node) -> tuple[float, float]:
    if not isinstance(geom, Box):
        raise BadValueError("face mounts require a box link", node.line, node.cols[0])
    hx, hy, hz = geom.half_extents
    axis = face[1]
    if axis == "x":
        return (2.0 * hy, 2.0 * hz)
    if axis == "y":
        return (2.0 * hx, 2.0 * hz)
    return (2.0 * hx, 2.0 * hy)


def _face_center(geom: Geometry, face: str, node: _Node) -> tuple[float, float, float]:
    if not isinstance(geom, Box):
        raise BadValueError("face mounts require a box link", node.line, node.cols[0])
    hx, hy, hz = geom.half_extents
    n = FACE_NORMALS[face]
    return (n[0] * hx, n[1] * hy, n[2] * hz)


def _parse_mount(
    node: _Node, links: dict[str, LinkSpec], frames: dict[str, tuple[float, float, float, float]]
) -> tuple[str, Pose, tuple[float, float] | None]:
    """Returns (link, pose, optional rect size). `frames` picks the face convention."""
    if not node.args:
        raise SceneSyntaxError("mount needs a link name", node.line, node.cols[0])
    link_name = node.args[0]
    link = links.get(link_name)
    if link is None:
        raise BadValueError(f"mount references unknown link {link_name!r}", node.line, node.arg_col(0))
    rest = node.args[1:]
    size: tuple[float, float] | None = None
    size_at = None
    if "size" in rest:
        size_at = rest.index("size")
        base = len(node.args) - len(rest)
        if size_at != len(rest) - 3:
            raise SceneSyntaxError("size takes two values", node.line, node.arg_col(base + size_at))
        size = (_float(node, base + size_at + 1), _float(node, base + size_at + 2))
        rest = rest[:size_at]
    if not rest:
        return link_name, Pose(), size
    if rest[0] == "face":
        if len(rest) != 2 or rest[1] not in frames:
            raise BadValueError("face mount needs one of +x -x +y -y +z -z", node.line, node.arg_col(1))
        face = rest[1]
        pose = Pose(_face_center(link.geometry, face, node), frames[face])
        if size is None:
            size = _face_size(link.geometry, face, node)
        return link_name, pose, size
    if rest[0] == "at":
        if len(rest) != 8:
            raise SceneSyntaxError("at mount takes x y z qw qx qy qz", node.line, node.arg_col(1))
        return link_name, Pose(_vec3(node, 2), _quat(node, 5)), size
    raise UnknownFieldError(f"unknown mount form {rest[0]!r}", node.line, node.arg_col(1))


def _parse_device(node: _Node, links: dict[str, LinkSpec]) -> DeviceDescriptor:
    _nargs(node, 2)
    device_id, kind = node.args
    if kind not in DEVICE_KINDS:
        raise BadValueError(f"unknown device kind {kind!r}", node.line, node.arg_col(1))
    fields: dict = {}
    for child in node.children:
        _no_children(child)
        key = child.key
        if key == "mount":
            link, pose, _ = _parse_mount(child, links, FACE_FRAME_X)
            fields["mount_link"] = link
            fields["mount_pose"] = pose
        elif key == "rate":
            _nargs(child, 1)
            fields["rate"] = _float(child, 0)
        elif key == "noise_sigma":
            _nargs(child, 1)
            fields["noise_sigma"] = _float(child, 0)
        elif key == "max_range":
            _nargs(child, 1)
            fields["max_range"] = _float(child, 0)
        elif key == "capacity":
            _nargs(child, 1)
            fields["capacity_j"] = _float(child, 0)
        elif key == "idle":
            _nargs(child, 1)
            fields["idle_w"] = _float(child, 0)
        elif key == "message_cost":
            _nargs(child, 1)
            fields["message_cost_j"] = _float(child, 0)
        elif key == "battery":
            _nargs(child, 1)
            fields["battery"] = child.args[0]
        else:
            raise UnknownFieldError(f"unknown device field {key!r}", child.line, child.cols[0])
    if "mount_link" not in fields:
        raise SceneSyntaxError(f"device {device_id!r} has no mount", node.line, node.cols[0])
    return DeviceDescriptor(device_id=device_id, kind=kind, **fields)


def _parse_display(node: _Node, links: dict[str, LinkSpec]) -> DisplaySpec:
    _nargs(node, 3)
    display_id = node.args[0]
    width, height = _int(node, 1), _int(node, 2)
    fields: dict = {}
    for child in node.children:
        _no_children(child)
        key = child.key
        if key == "mount":
            link, pose, size = _parse_mount(child, links, FACE_FRAME_Z)
            fields["mount_link"] = link
            fields["mount_pose"] = pose
            if size is not None:
                fields["rect_w"], fields["rect_h"] = size
        elif key == "rate":
            _nargs(child, 1)
            fields["rate"] = _float(child, 0)
        elif key == "battery":
            _nargs(child, 1)
            fields["battery"] = child.args[0]
        else:
            raise UnknownFieldError(f"unknown display field {key!r}", child.line, child.cols[0])
    if "mount_link" not in fields:
        raise SceneSyntaxError(f"display {display_id!r} has no mount", node.line, node.cols[0])
    return DisplaySpec(display_id=display_id, width=width, height=height, **fields)


def _parse_model(node: _Node) -> ModelSpec:
    _nargs(node, 1)
    name = node.args[0]
    links: list[LinkSpec] = []
    link_map: dict[str, LinkSpec] = {}
    for child in node.children:
        if child.key == "link":
            link = _parse_link(child)
            links.append(link)
            link_map[link.name] = link
    joints: list[JointSpec] = []
    devices: list[DeviceDescriptor] = []
    displays: list[DisplaySpec] = []
    for child in node.children:
        if child.key == "link":
            continue
        if child.key == "joint":
            joints.append(_parse_joint(child))
        elif child.key == "device":
            devices.append(_parse_device(child, link_map))
        elif child.key == "display":
            displays.append(_parse_display(child, link_map))
        else:
            raise UnknownFieldError(f"unknown model field {child.key!r}", child.line, child.cols[0])
    return ModelSpec(
        name=name,
        links=tuple(links),
        joints=tuple(joints),
        devices=tuple(devices),
        displays=tuple(displays),
    )


def _parse_spawn(node: _Node) -> SpawnSpec:
    _nargs(node, 2)
    pose = Pose()
    for child in node.children:
        _no_children(child)
        if child.key == "pose":
            _nargs(child, 7)
            pose = Pose(_vec3(child, 0), _quat(child, 3))
        else:
            raise UnknownFieldError(f"unknown spawn field {child.key!r}", child.line, child.cols[0])
    return SpawnSpec(model=node.args[0], instance=node.args[1], pose=pose)


def parse_scene(text: str, check: bool = True) -> SceneSpec:
    """Parse (and by default validate) scene text into a SceneSpec.

    Raises SceneSyntaxError / UnknownFieldError / BadValueError with line
    and column on malformed input, and SceneValidationError when the parsed
    spec violates a declarative invariant.
    """
    roots = _tokenize(text)
    if not roots or roots[0].key != "scene_format":
        raise SceneSyntaxError("first directive must be 'scene_format'", 1, 1)
    header = roots[0]
    _nargs(header, 1)
    version = _int(header, 0)
    if version != SCENE_FORMAT:
        raise BadValueError(f"unsupported scene_format {version}", header.line, header.arg_col(0))

    gravity = (0.0, 0.0, -9.81)
    models: list[ModelSpec] = []
    spawns: list[SpawnSpec] = []
    params: list[tuple[str, float]] = []
    for node in roots[1:]:
        if node.key == "gravity":
            _nargs(node, 3)
            _no_children(node)
            gravity = _vec3(node, 0)
        elif node.key == "param":
            _nargs(node, 2)
            _no_children(node)
            params.append((node.args[0], _float(node, 1)))
        elif node.key == "model":
            models.append(_parse_model(node))
        elif node.key == "spawn":
            spawns.append(_parse_spawn(node))
        elif node.key == "scene_format":
            raise SceneSyntaxError("duplicate scene_format directive", node.line, node.cols[0])
        else:
            raise UnknownFieldError(f"unknown directive {node.key!r}", node.line, node.cols[0])

    spec = SceneSpec(
        format_version=version,
        gravity=gravity,
        models=tuple(models),
        spawns=tuple(spawns),
        params=tuple(params),
    )
    if check:
        diagnostics = validate(spec)
        if diagnostics:
            raise SceneValidationError(diagnostics)
    return spec


def load_scene(path: str, check: bool = True) -> SceneSpec:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scene(fh.read(), check=check)


# -- serializer ------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_vec(v) -> str:
    return " ".join(_fmt(c) for c in v)


def _emit_pose(out: list[str], indent: str, key: str, pose: Pose) -> None:
    out.append(f"{indent}{key} {_fmt_vec(pose.position)} {_fmt_vec(pose.orientation)}")


def _emit_mount(out: list[str], indent: str, link: str, pose: Pose, size=None) -> None:
    line = f"{indent}mount {link} at {_fmt_vec(pose.position)} {_fmt_vec(pose.orientation)}"
    if size is not None:
        line += f" size {_fmt(size[0])} {_fmt(size[1])}"
    out.append(line)


def serialize_scene(spec: SceneSpec) -> str:
    """Canonical text for a SceneSpec; parse(serialize(s)) == s."""
    out: list[str] = [f"scene_format {spec.format_version}"]
    out.append(f"gravity {_fmt_vec(spec.gravity)}")
    for key, value in spec.params:
        out.append(f"param {key} {_fmt(value)}")
    for model in spec.models:
        out.append(f"model {model.name}")
        for link in model.links:
            out.append(f"  link {link.name}")
            g = link.geometry
            if isinstance(g, Box):
                out.append(f"    geometry box {_fmt_vec(g.half_extents)}")
            elif isinstance(g, Sphere):
                out.append(f"    geometry sphere {_fmt(g.radius)}")
            elif isinstance(g, Cylinder):
                out.append(f"    geometry cylinder {_fmt(g.radius)} {_fmt(g.half_length)}")
            else:
                out.append(f"    geometry plane {_fmt_vec(g.normal)} {_fmt(g.offset)}")
            out.append(f"    mass {_fmt(link.mass)}")
            if link.inertia is not None:
                rows = " ".join(_fmt_vec(row) for row in link.inertia)
                out.append(f"    inertia {rows}")
            out.append(f"    friction {_fmt(link.friction_mu)}")
            out.append(f"    restitution {_fmt(link.restitution)}")
            _emit_pose(out, "    ", "pose", link.initial_pose)
            out.append(f"    color {link.color[0]} {link.color[1]} {link.color[2]}")
        for j in model.joints:
            out.append(f"  joint {j.name} {j.joint_type}")
            out.append(f"    parent {j.parent}")
            out.append(f"    child {j.child}")
            out.append(f"    axis {_fmt_vec(j.axis)}")
            out.append(f"    anchor {_fmt_vec(j.anchor)}")
            if j.limits is not None:
                out.append(f"    limits {_fmt(j.limits[0])} {_fmt(j.limits[1])}")
            if j.max_effort != float("inf"):
                out.append(f"    max_effort {_fmt(j.max_effort)}")
            out.append(f"    damping {_fmt(j.damping)}")
        for d in model.devices:
            out.append(f"  device {d.device_id} {d.kind}")
            _emit_mount(out, "    ", d.mount_link, d.mount_pose)
            out.append(f"    rate {_fmt(d.rate)}")
            if d.kind == "accelerometer":
                out.append(f"    noise_sigma {_fmt(d.noise_sigma)}")
            if d.kind == "proximity":
                out.append(f"    max_range {_fmt(d.max_range)}")
            if d.kind == "battery":
                out.append(f"    capacity {_fmt(d.capacity_j)}")
                out.append(f"    idle {_fmt(d.idle_w)}")
                out.append(f"    message_cost {_fmt(d.message_cost_j)}")
            if d.battery is not None:
                out.append(f"    battery {d.battery}")
        for disp in model.displays:
            out.append(f"  display {disp.display_id} {disp.width} {disp.height}")
            _emit_mount(out, "    ", disp.mount_link, disp.mount_pose, (disp.rect_w, disp.rect_h))
            out.append(f"    rate {_fmt(disp.rate)}")
            if disp.battery is not None:
                out.append(f"    battery {disp.battery}")
    for s in spec.spawns:
        out.append(f"spawn {s.model} {s.instance}")
        _emit_pose(out, "  ", "pose", s.pose)
    return "\n".join(out) + "\n"
