"""Spawning methods: direct, indirect (with snapping), auto, relative, and
their undo entries. Derived placements were computed with the rigid
composition oracle (rotation matrices by hand) in the comments."""

from __future__ import annotations

import math
import random

import pytest

from cloneworks.engine import Engine, Static, Synchronous, object_frame
from cloneworks.errors import (
    NoSnapAnchor,
    SameObject,
    TargetNotOnGround,
    UnknownEntity,
)
from cloneworks.geometry import (
    Quat,
    RigidTransform,
    Vec3,
    compose,
    inverse,
    transform_distance,
)

from conftest import body, pose, vec, xf

TOL = 1e-9


def engine_with_held_hammer() -> tuple[Engine, int]:
    e = Engine()
    hid = e.world.add_object("hammer", pose(0.3, 1.0, 0.2), grabbable=True)
    e.tick(body(rg=True))
    assert e.world.attachments[hid].holder == e.world.avatar.entity_id
    return e, hid


# ---------------------------------------------------------------- direct ---

def test_direct_spawn_copies_body_and_transfers_held():
    e, hid = engine_with_held_hammer()
    before = e.world.avatar.body
    before_root = e.world.avatar.root
    cid = e.spawn_direct()
    clone = e.world.clones[cid]
    assert clone.body == before  # exact copy, bit for bit
    assert isinstance(clone.mode, Static)
    assert e.world.attachments[hid].holder == cid
    # avatar hands empty, stepped back by the configured offset
    held = [a for a in e.world.attachments.values() if a.holder == e.world.avatar.entity_id]
    assert held == []
    moved = e.world.avatar.root.translation - before_root.translation
    assert abs(moved.norm() - 0.5) < TOL
    assert moved.distance_to(Vec3(0, 0, -0.5)) < TOL


def test_two_direct_spawns_chain_along_minus_z():
    e = Engine()
    c1 = e.spawn_direct()
    e.tick()
    c2 = e.spawn_direct()
    r1 = e.world.clones[c1].root.translation
    r2 = e.world.clones[c2].root.translation
    assert (r2 - r1).distance_to(Vec3(0, 0, -0.5)) < TOL


def test_direct_spawn_respects_avatar_yaw():
    e = Engine()
    e.rotate(90.0)  # avatar faces +x; backward is -x
    e.spawn_direct()
    assert e.world.avatar.root.translation.distance_to(Vec3(-0.5, 0, 0)) < TOL


# -------------------------------------------------------------- indirect ---

def test_indirect_plain_placement():
    e = Engine()
    cid = e.spawn_indirect(pose(3, 0, 0, yaw_deg=180))
    clone = e.world.clones[cid]
    assert clone.root.translation.distance_to(Vec3(3, 0, 0)) < TOL
    assert abs(abs(math.degrees(clone.root.rotation.yaw())) - 180.0) < 1e-7
    assert isinstance(clone.mode, Static)
    # neutral standing pose, empty hands
    assert clone.body.head.position.y == pytest.approx(1.6, abs=1e-9)
    assert not any(a.holder == cid for a in e.world.attachments.values())


def test_indirect_grid_snap_uses_arm_length_cell():
    from cloneworks.world import WorldConfig

    e = Engine(WorldConfig(arm_length=0.5))
    cid = e.spawn_indirect(pose(1.1, 0, 0.2), snap="grid")
    assert e.world.clones[cid].root.translation.distance_to(Vec3(1.0, 0, 0)) < TOL


def test_indirect_nearest_object_snap_faces_anchor():
    # object at (2,0,0), avatar at origin: approach along +x, arm 0.75,
    # so the clone stands at (1.25, 0, 0) facing +x (yaw 90 deg).
    e = Engine()
    e.world.add_object("pot", pose(2, 0, 0))
    cid = e.spawn_indirect(pose(1.8, 0, 0.1), snap="nearest_object")
    clone = e.world.clones[cid]
    assert clone.root.translation.distance_to(Vec3(1.25, 0, 0)) < TOL
    assert abs(math.degrees(clone.root.rotation.yaw()) - 90.0) < 1e-7


def test_indirect_nearest_object_snap_without_anchor():
    e = Engine()
    with pytest.raises(NoSnapAnchor):
        e.spawn_indirect(pose(1, 0, 0), snap="nearest_object")


def test_indirect_requires_ground_target():
    e = Engine()
    with pytest.raises(TargetNotOnGround):
        e.spawn_indirect(pose(1, 0.4, 0))


# ------------------------------------------------------------------ auto ---

def test_auto_spawn_counts_modes_and_duplicated_tools():
    e, hid = engine_with_held_hammer()
    pegs = [e.world.add_object("peg", pose(2 + i, 0, 1, yaw_deg=15 * i)) for i in range(4)]
    created = e.spawn_auto(pegs[0])
    assert len(created) == 3  # one clone per remaining same-tag object
    hammers = e.world.objects_by_tag("hammer")
    assert len(hammers) == 4  # original plus one copy per clone
    for cid in created:
        clone = e.world.clones[cid]
        assert isinstance(clone.mode, Synchronous)
        assert not clone.mirror
        held = [a for a in e.world.attachments.values() if a.holder == cid]
        assert len(held) == 1 and held[0].hand == "right"
    # original hammer still with the avatar
    assert e.world.attachments[hid].holder == e.world.avatar.entity_id


def test_auto_spawn_preserves_offset_exactly():
    e = Engine()
    e.teleport(vec(0.3, 0, -1.2))
    e.rotate(33.0)
    pegs = [
        e.world.add_object("peg", pose(2, 0, 1, yaw_deg=10)),
        e.world.add_object("peg", pose(-3, 0, 4, yaw_deg=140)),
        e.world.add_object("peg", pose(5, 0, -2, yaw_deg=-75)),
    ]
    offset = compose(inverse(object_frame(e.world.objects[pegs[0]])), e.world.avatar.root)
    created = e.spawn_auto(pegs[0])
    for cid, oid in zip(created, pegs[1:]):
        got = compose(
            inverse(object_frame(e.world.objects[oid])), e.world.clones[cid].root
        )
        assert transform_distance(got, offset) < TOL


def test_auto_spawn_unique_tag_spawns_nothing():
    e = Engine()
    only = e.world.add_object("pot", pose(1, 0, 0))
    depth = len(e.undo_stack)
    assert e.spawn_auto(only) == []
    assert len(e.undo_stack) == depth  # no undo entry for an empty batch


def test_auto_spawn_unknown_entity():
    e = Engine()
    with pytest.raises(UnknownEntity):
        e.spawn_auto(999)


# -------------------------------------------------------------- relative ---

def test_relative_spawn_derived_placement():
    # reference at origin yaw 0, avatar root (0,0,-1) yaw 0, target (5,0,5)
    # yaw 90: O = translate(0,0,-1); R(90) * (0,0,-1) = (-1,0,0), so the
    # clone root lands at (4,0,5) with yaw 90.
    e = Engine()
    ref = e.world.add_object("handle", pose(0, 0, 0))
    tgt = e.world.add_object("handle", pose(5, 0, 5, yaw_deg=90))
    e.teleport(vec(0, 0, -1))
    cid = e.spawn_relative(ref, tgt)
    clone = e.world.clones[cid]
    assert clone.root.translation.distance_to(Vec3(4, 0, 5)) < TOL
    assert abs(math.degrees(clone.root.rotation.yaw()) - 90.0) < 1e-7
    assert isinstance(clone.mode, Synchronous)


def test_relative_spawn_same_object_rejected():
    e = Engine()
    ref = e.world.add_object("handle", pose(0, 0, 0))
    with pytest.raises(SameObject):
        e.spawn_relative(ref, ref)


def test_relative_spawn_offset_preservation_random():
    rng = random.Random(23)
    for _ in range(50):
        e = Engine()
        ref = e.world.add_object(
            "thing", pose(rng.uniform(-5, 5), 0, rng.uniform(-5, 5), yaw_deg=rng.uniform(-180, 180))
        )
        tgt = e.world.add_object(
            "thing", pose(rng.uniform(-5, 5), 0, rng.uniform(-5, 5), yaw_deg=rng.uniform(-180, 180))
        )
        e.teleport(vec(rng.uniform(-5, 5), 0, rng.uniform(-5, 5)))
        e.rotate(rng.uniform(-180, 180))
        cid = e.spawn_relative(ref, tgt)
        lhs = compose(
            inverse(object_frame(e.world.objects[tgt])), e.world.clones[cid].root
        )
        rhs = compose(inverse(object_frame(e.world.objects[ref])), e.world.avatar.root)
        assert transform_distance(lhs, rhs) < TOL


# ------------------------------------------------------------------ undo ---

def test_undo_restores_hash_for_each_spawn_kind():
    e, hid = engine_with_held_hammer()
    pegs = [e.world.add_object("peg", pose(2 + i, 0, 1)) for i in range(3)]

    h0 = e.world.world_hash()
    e.spawn_direct()
    e.undo()
    assert e.world.world_hash() == h0

    e.spawn_indirect(pose(3, 0, 0))
    e.undo()
    assert e.world.world_hash() == h0

    created = e.spawn_auto(pegs[0])
    assert len(created) == 2
    e.undo()  # the whole batch at once, including duplicated hammers
    assert e.world.world_hash() == h0

    e.spawn_relative(pegs[0], pegs[1])
    e.undo()
    assert e.world.world_hash() == h0


def test_undo_empty_stack():
    from cloneworks.errors import EmptyUndoStack

    e = Engine()
    with pytest.raises(EmptyUndoStack):
        e.undo()


def test_undo_lifo_across_nested_commands():
    e = Engine()
    h0 = e.world.world_hash()
    e.spawn_direct()
    h1 = e.world.world_hash()
    e.spawn_indirect(pose(2, 0, 0))
    e.undo()
    assert e.world.world_hash() == h1
    e.undo()
    assert e.world.world_hash() == h0
