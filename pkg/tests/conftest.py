"""Shared builders for engine tests."""

from __future__ import annotations

import math

from cloneworks.geometry import Pose, Quat, RigidTransform, Vec3
from cloneworks.world import BodyFrame


def vec(x=0.0, y=0.0, z=0.0) -> Vec3:
    return Vec3(x, y, z)


def pose(x=0.0, y=0.0, z=0.0, yaw_deg=0.0) -> Pose:
    return Pose(Vec3(x, y, z), Quat.from_yaw(math.radians(yaw_deg)))


def xf(x=0.0, y=0.0, z=0.0, yaw_deg=0.0) -> RigidTransform:
    return RigidTransform(Vec3(x, y, z), Quat.from_yaw(math.radians(yaw_deg)))


def body(
    head=(0.0, 1.6, 0.0),
    left=(-0.3, 1.0, 0.2),
    right=(0.3, 1.0, 0.2),
    lg=False,
    rg=False,
    yaw_deg=0.0,
) -> BodyFrame:
    q = Quat.from_yaw(math.radians(yaw_deg))
    return BodyFrame(
        head=Pose(Vec3(*head), q),
        left_hand=Pose(Vec3(*left), q),
        right_hand=Pose(Vec3(*right), q),
        left_grab=lg,
        right_grab=rg,
    )
