"""Rigid-body transform algebra used by every other module.

Conventions (fixed for the whole engine, all hashes depend on them):

* right-handed coordinates, +y is up, the ground plane is y = 0
* yaw is a rotation about +y; a body's forward axis is local +z
* quaternions are (w, x, y, z) scalar-first and kept unit-norm
* a :class:`RigidTransform` maps points as ``p' = R * p + t``
* composition ``compose(a, b)`` applies ``b`` first, then ``a``

All types are immutable values; every function is pure and thread-safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

QUAT_EPS = 1e-12


@dataclass(frozen=True, slots=True)
class Vec3:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def __add__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "Vec3") -> "Vec3":
        return Vec3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> "Vec3":
        return Vec3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec3") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def distance_to(self, other: "Vec3") -> float:
        return (self - other).norm()

    def horizontal_distance_to(self, other: "Vec3") -> float:
        """Distance in the ground plane (x, z only)."""
        dx = self.x - other.x
        dz = self.z - other.z
        return math.sqrt(dx * dx + dz * dz)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class Quat:
    w: float = 1.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    def multiply(self, other: "Quat") -> "Quat":
        """Hamilton product, renormalized to suppress drift."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Quat(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        ).normalized()

    def conjugate(self) -> "Quat":
        return Quat(self.w, -self.x, -self.y, -self.z)

    def normalized(self) -> "Quat":
        n = math.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2)
        if n < QUAT_EPS:
            return Quat()
        return Quat(self.w / n, self.x / n, self.y / n, self.z / n)

    def rotate(self, v: Vec3) -> Vec3:
        """Rotate a vector: q * v * q^-1 for a unit quaternion."""
        w, x, y, z = self.w, self.x, self.y, self.z
        # t = 2 * (q_vec x v)
        tx = 2.0 * (y * v.z - z * v.y)
        ty = 2.0 * (z * v.x - x * v.z)
        tz = 2.0 * (x * v.y - y * v.x)
        return Vec3(
            v.x + w * tx + (y * tz - z * ty),
            v.y + w * ty + (z * tx - x * tz),
            v.z + w * tz + (x * ty - y * tx),
        )

    @staticmethod
    def from_yaw(radians: float) -> "Quat":
        half = 0.5 * radians
        return Quat(math.cos(half), 0.0, math.sin(half), 0.0)

    def yaw(self) -> float:
        """Twist angle about +y (the yaw component of this rotation)."""
        fwd = self.rotate(Vec3(0.0, 0.0, 1.0))
        if abs(fwd.x) < 1e-12 and abs(fwd.z) < 1e-12:
            # forward points straight up or down; fall back to the right axis
            right = self.rotate(Vec3(1.0, 0.0, 0.0))
            return math.atan2(-right.z, right.x)
        return math.atan2(fwd.x, fwd.z)

    def yaw_component(self) -> "Quat":
        """Swing-twist decomposition: the pure-yaw part of this rotation."""
        q = Quat(self.w, 0.0, self.y, 0.0)
        if abs(q.w) < QUAT_EPS and abs(q.y) < QUAT_EPS:
            return Quat()
        return q.normalized()

    def canonical(self) -> "Quat":
        """Flip sign so the first nonzero component is positive (q and -q
        encode the same rotation; hashing needs one representative)."""
        for c in (self.w, self.x, self.y, self.z):
            if c > 0.0:
                return self
            if c < 0.0:
                return Quat(-self.w, -self.x, -self.y, -self.z)
        return self

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w, self.x, self.y, self.z)


@dataclass(frozen=True, slots=True)
class Pose:
    position: Vec3 = Vec3()
    orientation: Quat = Quat()


@dataclass(frozen=True, slots=True)
class RigidTransform:
    translation: Vec3 = Vec3()
    rotation: Quat = Quat()

    @staticmethod
    def identity() -> "RigidTransform":
        return RigidTransform()

    @staticmethod
    def from_translation(x: float, y: float, z: float) -> "RigidTransform":
        return RigidTransform(Vec3(x, y, z), Quat())

    @staticmethod
    def from_yaw(radians: float, translation: Vec3 = Vec3()) -> "RigidTransform":
        return RigidTransform(translation, Quat.from_yaw(radians))

    @staticmethod
    def from_pose(pose: Pose) -> "RigidTransform":
        return RigidTransform(pose.position, pose.orientation)

    def as_pose(self) -> Pose:
        return Pose(self.translation, self.rotation)


@dataclass(frozen=True, slots=True)
class MirrorPlane:
    """The anchor-local x = 0 plane (vertical when the anchor is yaw-only)."""

    anchor: RigidTransform = RigidTransform()


def compose(a: RigidTransform, b: RigidTransform) -> RigidTransform:
    """Apply b first, then a: (a o b)(p) = a(b(p))."""
    return RigidTransform(
        a.rotation.rotate(b.translation) + a.translation,
        a.rotation.multiply(b.rotation),
    )


def inverse(a: RigidTransform) -> RigidTransform:
    inv_rot = a.rotation.conjugate()
    return RigidTransform(inv_rot.rotate(a.translation) * -1.0, inv_rot)


def apply(a: RigidTransform, p: Pose) -> Pose:
    return Pose(
        a.rotation.rotate(p.position) + a.translation,
        a.rotation.multiply(p.orientation),
    )


def apply_point(a: RigidTransform, p: Vec3) -> Vec3:
    return a.rotation.rotate(p) + a.translation


def mirror_pose(p: Pose, plane: MirrorPlane) -> Pose:
    """Reflect a pose across the plane's anchor-local x = 0 plane.

    In anchor coordinates the position maps (x, y, z) -> (-x, y, z) and the
    orientation (w, x, y, z) -> (w, x, -y, -z), which is the quaternion form
    of conjugating the rotation matrix by diag(-1, 1, 1). An involution.
    """
    local = apply(inverse(plane.anchor), p)
    lp = local.position
    lq = local.orientation
    reflected = Pose(Vec3(-lp.x, lp.y, lp.z), Quat(lq.w, lq.x, -lq.y, -lq.z))
    return apply(plane.anchor, reflected)


def mirror_quat_local(q: Quat) -> Quat:
    """Reflection of an orientation across the local x = 0 plane."""
    return Quat(q.w, q.x, -q.y, -q.z)


SCALE_MIN = 0.1
SCALE_MAX = 10.0


def check_scale(s: float) -> None:
    from .errors import ScaleOutOfRange

    if not (SCALE_MIN <= s <= SCALE_MAX):
        raise ScaleOutOfRange(f"scale {s} outside [{SCALE_MIN}, {SCALE_MAX}]")


def scale_position_about(p: Pose, anchor: RigidTransform, s: float) -> Pose:
    """Scale the anchor-local position by s; orientation is untouched
    (reach scales, joint rotations do not)."""
    check_scale(s)
    local = apply(inverse(anchor), p)
    return apply(anchor, Pose(local.position * s, local.orientation))


def slerp(a: Quat, b: Quat, u: float) -> Quat:
    """Shortest-arc spherical interpolation."""
    dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z
    if dot < 0.0:
        b = Quat(-b.w, -b.x, -b.y, -b.z)
        dot = -dot
    if dot > 1.0 - 1e-10:
        # nearly parallel: lerp and renormalize
        return Quat(
            a.w + (b.w - a.w) * u,
            a.x + (b.x - a.x) * u,
            a.y + (b.y - a.y) * u,
            a.z + (b.z - a.z) * u,
        ).normalized()
    theta = math.acos(max(-1.0, min(1.0, dot)))
    sin_theta = math.sin(theta)
    ka = math.sin((1.0 - u) * theta) / sin_theta
    kb = math.sin(u * theta) / sin_theta
    return Quat(
        ka * a.w + kb * b.w,
        ka * a.x + kb * b.x,
        ka * a.y + kb * b.y,
        ka * a.z + kb * b.z,
    ).normalized()


def interp_pose(a: Pose, b: Pose, u: float) -> Pose:
    """Linear position, shortest-arc orientation; u in [0, 1]."""
    return Pose(
        Vec3(
            a.position.x + (b.position.x - a.position.x) * u,
            a.position.y + (b.position.y - a.position.y) * u,
            a.position.z + (b.position.z - a.position.z) * u,
        ),
        slerp(a.orientation, b.orientation, u),
    )


def snap_to_grid(p: Vec3, cell: float) -> Vec3:
    """Snap x and z to the nearest multiple of cell (ties round toward +inf);
    y is untouched."""
    if cell <= 0.0:
        raise ValueError("cell must be positive")
    return Vec3(
        math.floor(p.x / cell + 0.5) * cell,
        p.y,
        math.floor(p.z / cell + 0.5) * cell,
    )


def pose_distance(a: Pose, b: Pose) -> float:
    """Max of positional distance and quaternion component distance, used by
    tests and assertions as a single closeness measure."""
    dp = a.position.distance_to(b.position)
    qa, qb = a.orientation.canonical(), b.orientation.canonical()
    dq = max(
        abs(qa.w - qb.w), abs(qa.x - qb.x), abs(qa.y - qb.y), abs(qa.z - qb.z)
    )
    return max(dp, dq)


def transform_distance(a: RigidTransform, b: RigidTransform) -> float:
    return pose_distance(a.as_pose(), b.as_pose())
