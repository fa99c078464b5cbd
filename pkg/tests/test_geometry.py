"""Transform algebra tests.

Derived expectations are checked against an independent 3x3 rotation-matrix
oracle (built from trig directly, never from the quaternion code under test).
"""

from __future__ import annotations

import math
import random

import pytest

from cloneworks.errors import ScaleOutOfRange
from cloneworks.geometry import (
    MirrorPlane,
    Pose,
    Quat,
    RigidTransform,
    Vec3,
    apply,
    apply_point,
    compose,
    interp_pose,
    inverse,
    mirror_pose,
    pose_distance,
    scale_position_about,
    snap_to_grid,
    transform_distance,
)

TOL = 1e-9


# ---------------------------------------------------------------- oracle ---

def yaw_matrix(deg: float) -> list[list[float]]:
    t = math.radians(deg)
    c, s = math.cos(t), math.sin(t)
    return [[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]]


def matvec(m: list[list[float]], v: tuple[float, float, float]):
    return tuple(sum(m[i][j] * v[j] for j in range(3)) for i in range(3))


def matmul(a, b):
    return [
        [sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)]
        for i in range(3)
    ]


def transpose(m):
    return [[m[j][i] for j in range(3)] for i in range(3)]


MIRROR_X = [[-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]


def yaw_t(deg: float, tx=0.0, ty=0.0, tz=0.0) -> RigidTransform:
    return RigidTransform.from_yaw(math.radians(deg), Vec3(tx, ty, tz))


def random_transform(rng: random.Random) -> RigidTransform:
    # arbitrary-axis unit quaternion plus a translation
    axis = [rng.uniform(-1, 1) for _ in range(3)]
    n = math.sqrt(sum(a * a for a in axis)) or 1.0
    half = rng.uniform(-math.pi, math.pi) / 2
    s = math.sin(half)
    q = Quat(math.cos(half), axis[0] / n * s, axis[1] / n * s, axis[2] / n * s)
    t = Vec3(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5))
    return RigidTransform(t, q)


def random_pose(rng: random.Random) -> Pose:
    t = random_transform(rng)
    return Pose(t.translation, t.rotation)


# -------------------------------------------------------------- compose ---

def test_compose_identity_law():
    t = yaw_t(37.0, 1.0, 2.0, 3.0)
    assert transform_distance(compose(RigidTransform.identity(), t), t) < TOL
    assert transform_distance(compose(t, RigidTransform.identity()), t) < TOL


def test_compose_inverse_law():
    t = yaw_t(123.0, -2.0, 0.5, 4.0)
    assert transform_distance(compose(t, inverse(t)), RigidTransform.identity()) < TOL


def test_compose_yaw_then_translate_matches_matrix_oracle():
    # rotate 90 deg about +y after translating (0,0,-1): origin -> (-1,0,0)
    got = apply_point(
        compose(yaw_t(90.0), RigidTransform.from_translation(0, 0, -1)), Vec3()
    )
    expected = matvec(yaw_matrix(90.0), (0.0, 0.0, -1.0))
    assert abs(got.x - expected[0]) < TOL
    assert abs(got.y - expected[1]) < TOL
    assert abs(got.z - expected[2]) < TOL
    assert got.distance_to(Vec3(-1.0, 0.0, 0.0)) < TOL


def test_inverse_trivials():
    assert (
        transform_distance(inverse(RigidTransform.identity()), RigidTransform.identity())
        < TOL
    )
    inv = inverse(RigidTransform.from_translation(1, 2, 3))
    assert transform_distance(inv, RigidTransform.from_translation(-1, -2, -3)) < TOL


def test_inverse_of_yaw_translate_matches_matrix_oracle():
    t = yaw_t(90.0, 1.0, 0.0, 0.0)
    inv = inverse(t)
    # oracle: R' = R^T, t' = -R^T t
    rt = transpose(yaw_matrix(90.0))
    expected = matvec(rt, (-1.0, 0.0, 0.0))
    assert inv.translation.distance_to(Vec3(*expected)) < TOL
    assert inv.translation.distance_to(Vec3(0.0, 0.0, -1.0)) < TOL
    assert abs(math.degrees(inv.rotation.yaw()) - (-90.0)) < 1e-7


# ---------------------------------------------------------------- apply ---

def test_apply_trivials():
    p = Pose(Vec3(0.3, 1.1, -0.4), Quat.from_yaw(0.7))
    assert pose_distance(apply(RigidTransform.identity(), p), p) < TOL
    moved = apply(RigidTransform.from_translation(0, 1, 0), Pose())
    assert moved.position.distance_to(Vec3(0, 1, 0)) < TOL
    assert pose_distance(Pose(Vec3(0, 1, 0)), moved) < TOL


def test_apply_rotation_matches_matrix_oracle():
    p = Pose(Vec3(0, 0, -1), Quat())
    got = apply(yaw_t(90.0), p)
    expected = matvec(yaw_matrix(90.0), (0.0, 0.0, -1.0))
    assert got.position.distance_to(Vec3(*expected)) < TOL
    assert abs(math.degrees(got.orientation.yaw()) - 90.0) < 1e-7


# --------------------------------------------------------------- mirror ---

def test_mirror_point_through_identity_plane():
    p = Pose(Vec3(1, 2, 3), Quat())
    m = mirror_pose(p, MirrorPlane())
    assert m.position.distance_to(Vec3(-1, 2, 3)) < TOL
    assert pose_distance(Pose(Vec3(-1, 2, 3)), m) < TOL


def test_mirror_orientation_matches_srs_matrix_oracle():
    # S * R(90) * S with S = diag(-1,1,1) equals R(-90): check by action on
    # the basis, using matrices only.
    srs = matmul(matmul(MIRROR_X, yaw_matrix(90.0)), MIRROR_X)
    mirrored = mirror_pose(Pose(Vec3(), Quat.from_yaw(math.radians(90.0))), MirrorPlane())
    for basis in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]:
        want = matvec(srs, basis)
        got = mirrored.orientation.rotate(Vec3(*basis))
        assert got.distance_to(Vec3(*want)) < TOL
    assert abs(math.degrees(mirrored.orientation.yaw()) - (-90.0)) < 1e-7


def test_mirror_is_involution():
    rng = random.Random(7)
    for _ in range(200):
        plane = MirrorPlane(yaw_t(rng.uniform(-180, 180), rng.uniform(-3, 3), 0, rng.uniform(-3, 3)))
        p = random_pose(rng)
        assert pose_distance(mirror_pose(mirror_pose(p, plane), plane), p) < TOL


def test_mirror_preserves_distances_and_unit_norm():
    rng = random.Random(11)
    for _ in range(200):
        plane = MirrorPlane(random_transform(rng))
        a, b = random_pose(rng), random_pose(rng)
        ma, mb = mirror_pose(a, plane), mirror_pose(b, plane)
        assert abs(
            ma.position.distance_to(mb.position) - a.position.distance_to(b.position)
        ) < TOL
        q = ma.orientation
        assert abs(math.sqrt(q.w**2 + q.x**2 + q.y**2 + q.z**2) - 1.0) < TOL


# ---------------------------------------------------------------- scale ---

def test_scale_identity_and_uniform():
    p = Pose(Vec3(1, 0, 2), Quat.from_yaw(0.5))
    assert pose_distance(scale_position_about(p, RigidTransform.identity(), 1.0), p) < TOL
    doubled = scale_position_about(p, RigidTransform.identity(), 2.0)
    assert doubled.position.distance_to(Vec3(2, 0, 4)) < TOL
    assert pose_distance(Pose(doubled.position, p.orientation), doubled) < TOL


def test_scale_about_offset_anchor():
    # anchor at (1,0,0): local (1,0,0) * 3 re-offset -> (4,0,0)
    got = scale_position_about(
        Pose(Vec3(2, 0, 0)), RigidTransform.from_translation(1, 0, 0), 3.0
    )
    assert got.position.distance_to(Vec3(4, 0, 0)) < TOL


def test_scale_out_of_range():
    with pytest.raises(ScaleOutOfRange):
        scale_position_about(Pose(), RigidTransform.identity(), 0.05)
    with pytest.raises(ScaleOutOfRange):
        scale_position_about(Pose(), RigidTransform.identity(), 10.5)


def test_scale_roundtrip():
    rng = random.Random(3)
    for _ in range(100):
        p = random_pose(rng)
        anchor = random_transform(rng)
        s = rng.uniform(0.1, 10.0)
        back = scale_position_about(scale_position_about(p, anchor, s), anchor, 1.0 / s)
        assert pose_distance(back, p) < 1e-9 * max(1.0, s)


# --------------------------------------------------------------- interp ---

def test_interp_endpoints():
    rng = random.Random(5)
    a, b = random_pose(rng), random_pose(rng)
    assert pose_distance(interp_pose(a, b, 0.0), a) < TOL
    assert pose_distance(interp_pose(a, b, 1.0), b) < TOL


def test_interp_midpoint_yaw():
    a = Pose(Vec3(), Quat.from_yaw(0.0))
    b = Pose(Vec3(2, 0, 0), Quat.from_yaw(math.radians(90.0)))
    mid = interp_pose(a, b, 0.5)
    assert mid.position.distance_to(Vec3(1, 0, 0)) < TOL
    # shortest-arc oracle: half the angle between the rotations
    assert abs(math.degrees(mid.orientation.yaw()) - 45.0) < 1e-7


# ----------------------------------------------------------------- snap ---

def test_snap_nearest_multiple():
    got = snap_to_grid(Vec3(1.1, 0.0, 0.2), 0.5)
    assert got.distance_to(Vec3(1.0, 0.0, 0.0)) < TOL


def test_snap_tie_rounds_toward_positive_infinity():
    got = snap_to_grid(Vec3(0.25, 0.0, -0.25), 0.5)
    assert got.distance_to(Vec3(0.5, 0.0, 0.0)) < TOL


def test_snap_leaves_y_untouched():
    got = snap_to_grid(Vec3(0.0, 1.7, 0.0), 0.3)
    assert got.y == 1.7


def test_snap_idempotent_and_exact_multiples():
    rng = random.Random(9)
    for _ in range(500):
        cell = rng.choice([0.1, 0.25, 0.5, 0.75, 1.0])
        v = Vec3(rng.uniform(-20, 20), rng.uniform(0, 3), rng.uniform(-20, 20))
        snapped = snap_to_grid(v, cell)
        again = snap_to_grid(snapped, cell)
        assert snapped.x == again.x and snapped.z == again.z and snapped.y == again.y


# ----------------------------------------------------------- properties ---

def test_composition_associativity_random():
    rng = random.Random(13)
    for _ in range(300):
        a, b, c = (random_transform(rng) for _ in range(3))
        lhs = compose(a, compose(b, c))
        rhs = compose(compose(a, b), c)
        assert transform_distance(lhs, rhs) < TOL


def test_apply_compose_homomorphism():
    rng = random.Random(17)
    for _ in range(300):
        a, b = random_transform(rng), random_transform(rng)
        p = random_pose(rng)
        assert pose_distance(apply(compose(a, b), p), apply(a, apply(b, p))) < TOL
