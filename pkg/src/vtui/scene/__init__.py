"""Scene description: geometry, links, joints, devices, parse and validate."""

from .inertia import ZeroMass, auto_inertia
from .parser import (
    BadValueError,
    SceneError,
    SceneSyntaxError,
    SceneValidationError,
    UnknownFieldError,
    load_scene,
    parse_scene,
    serialize_scene,
)
from .pose import IDENTITY_POSE, Pose
from .types import (
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
from .validate import Diagnostic, validate

__all__ = [
    "ZeroMass",
    "auto_inertia",
    "BadValueError",
    "SceneError",
    "SceneSyntaxError",
    "SceneValidationError",
    "UnknownFieldError",
    "load_scene",
    "parse_scene",
    "serialize_scene",
    "IDENTITY_POSE",
    "Pose",
    "Box",
    "Cylinder",
    "Geometry",
    "JointSpec",
    "LinkSpec",
    "ModelSpec",
    "SceneSpec",
    "SpawnSpec",
    "Sphere",
    "StaticPlane",
    "Diagnostic",
    "validate",
]
