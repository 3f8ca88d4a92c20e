"""Rigid poses (re-exported from the math utilities)."""

from vtui.mathutil import IDENTITY_POSE, QUAT_NORM_TOL, Pose

__all__ = ["IDENTITY_POSE", "QUAT_NORM_TOL", "Pose"]
