"""Deterministic fixed-step rigid-body dynamics."""

from .collision import Contact, RayHit, collide, collision_shape, raycast_bodies
from .solver import ContactParams
from .world import (
    IMPULSE,
    Body,
    NoSuchBody,
    NumericalDivergence,
    PhysicsError,
    SleepConfig,
    StaticBody,
    World,
    WrenchCommand,
    make_ground_link,
    spawn,
)

__all__ = [
    "Contact",
    "RayHit",
    "collide",
    "collision_shape",
    "raycast_bodies",
    "ContactParams",
    "IMPULSE",
    "Body",
    "NoSuchBody",
    "NumericalDivergence",
    "PhysicsError",
    "SleepConfig",
    "StaticBody",
    "World",
    "WrenchCommand",
    "make_ground_link",
    "spawn",
]
