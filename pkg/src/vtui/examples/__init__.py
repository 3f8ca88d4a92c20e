"""Executable TUI re-creations: dice cube, sifteo neighbors, marble, top."""

from .dice import DiceAppNode, render_digit
from .face import Face, face_up, face_up_direction
from .marble import (
    SQUEEZE_TOPIC,
    BallModelParams,
    MarbleNode,
    SqueezeDetector,
    ball_radius,
)
from .neighbors import NeighborDetector, SifteoNode, pair_adjacency
from .top import TOP_SCENE, TopRunReport, body_tilt, spinning_top_scenario

__all__ = [
    "DiceAppNode",
    "render_digit",
    "Face",
    "face_up",
    "face_up_direction",
    "SQUEEZE_TOPIC",
    "BallModelParams",
    "MarbleNode",
    "SqueezeDetector",
    "ball_radius",
    "NeighborDetector",
    "SifteoNode",
    "pair_adjacency",
    "TOP_SCENE",
    "TopRunReport",
    "body_tilt",
    "spinning_top_scenario",
]
