"""Mutable world state: tagged objects, the avatar, clones, groups,
attachments, plus queries and the canonical state hash.

The world is owned by a single engine thread. Snapshots handed to other
threads are plain dicts produced by :meth:`World.state_dict`.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field

from .errors import EmptyTag
from .geometry import Pose, Quat, RigidTransform, Vec3

HASH_DECIMALS = 6


@dataclass(frozen=True, slots=True)
class BodyFrame:
    """Three-point tracked body: head plus both hands, with grab state."""

    head: Pose = Pose()
    left_hand: Pose = Pose()
    right_hand: Pose = Pose()
    left_grab: bool = False
    right_grab: bool = False

    def hand(self, side: str) -> Pose:
        return self.left_hand if side == "left" else self.right_hand

    def grab(self, side: str) -> bool:
        return self.left_grab if side == "left" else self.right_grab


@dataclass
class WorldConfig:
    tick_rate: float = 60.0
    arm_length: float = 0.75
    grab_radius: float = 0.25
    backward_offset: float = 0.5
    snap_search_radius: float = 3.0
    gravity: float = 9.81
    standing_height: float = 1.6
    max_hand_reach: float = 1.2
    ballistic: bool = False
    allow_pose_self_replay: bool = False

    def validate(self) -> None:
        for name in (
            "tick_rate",
            "arm_length",
            "grab_radius",
            "backward_offset",
            "snap_search_radius",
            "gravity",
            "standing_height",
            "max_hand_reach",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"config.{name} must be positive")

    @property
    def dt(self) -> float:
        return 1.0 / self.tick_rate


@dataclass
class WorldObject:
    id: int
    tag: str
    pose: Pose
    grabbable: bool = False
    scalar_state: dict[str, float] = field(default_factory=dict)
    velocity: Vec3 = Vec3()


@dataclass
class AvatarState:
    """The body currently driven by tracked input.

    ``root`` is yaw-only; ``body`` is the world-space solve of the latest
    input; ``input_local`` is that input in root coordinates (held between
    frames); ``scale`` is inherited when switching into a resized clone.
    """

    entity_id: int
    root: RigidTransform = RigidTransform()
    body: BodyFrame = BodyFrame()
    input_local: BodyFrame = BodyFrame()
    scale: float = 1.0
    controlled_clone: int | None = None


def neutral_body(config: WorldConfig) -> BodyFrame:
    """Standing rest pose in root-local coordinates."""
    up = Quat()
    return BodyFrame(
        head=Pose(Vec3(0.0, config.standing_height, 0.0), up),
        left_hand=Pose(Vec3(-0.3, 1.0, 0.2), up),
        right_hand=Pose(Vec3(0.3, 1.0, 0.2), up),
    )


def clamp_hands_to_reach(frame: BodyFrame, max_reach: float) -> BodyFrame:
    """Input validation: pull hands back inside max_reach of the head."""

    def clamp(hand: Pose) -> Pose:
        d = hand.position - frame.head.position
        n = d.norm()
        if n <= max_reach:
            return hand
        return Pose(frame.head.position + d * (max_reach / n), hand.orientation)

    return BodyFrame(
        head=frame.head,
        left_hand=clamp(frame.left_hand),
        right_hand=clamp(frame.right_hand),
        left_grab=frame.left_grab,
        right_grab=frame.right_grab,
    )


def _round(v: float) -> float:
    # +0.0 collapses -0.0 so the canonical JSON has one zero
    return round(v, HASH_DECIMALS) + 0.0


def vec_state(v: Vec3) -> list[float]:
    return [_round(v.x), _round(v.y), _round(v.z)]


def quat_state(q: Quat) -> list[float]:
    q = q.canonical()
    return [_round(q.w), _round(q.x), _round(q.y), _round(q.z)]


def pose_state(p: Pose) -> dict:
    return {"p": vec_state(p.position), "q": quat_state(p.orientation)}


def transform_state(t: RigidTransform) -> dict:
    return {"p": vec_state(t.translation), "q": quat_state(t.rotation)}


def body_state(b: BodyFrame) -> dict:
    return {
        "head": pose_state(b.head),
        "left": pose_state(b.left_hand),
        "right": pose_state(b.right_hand),
        "lg": b.left_grab,
        "rg": b.right_grab,
    }


class World:
    """Entity store with monotonically assigned, never reused ids.

    Clones and attachments are owned by the engine and interaction modules;
    the world only stores and serializes them (duck-typed ``state_dict``).
    """

    def __init__(self, config: WorldConfig | None = None):
        self.config = config or WorldConfig()
        self.config.validate()
        self._next_id = 1
        self.objects: dict[int, WorldObject] = {}
        self.clones: dict = {}
        self.groups: dict[int, set[int]] = {}
        self.attachments: dict = {}  # object id -> Attachment
        self.tick: int = 0
        self.object_version = 0  # bumped on add_object; engines watch it
        self.avatar = AvatarState(entity_id=self.allocate_id())
        local = neutral_body(self.config)
        self.avatar.input_local = local
        self.avatar.body = local

    # ------------------------------------------------------------- ids ---

    def allocate_id(self) -> int:
        eid = self._next_id
        self._next_id += 1
        return eid

    @property
    def next_id(self) -> int:
        return self._next_id

    # --------------------------------------------------------- objects ---

    def add_object(
        self,
        tag: str,
        pose: Pose,
        grabbable: bool = False,
        scalar_state: dict[str, float] | None = None,
    ) -> int:
        if not tag:
            raise EmptyTag("object tag must be non-empty")
        oid = self.allocate_id()
        self.object_version += 1
        self.objects[oid] = WorldObject(
            id=oid,
            tag=tag,
            pose=pose,
            grabbable=grabbable,
            scalar_state=dict(scalar_state or {}),
        )
        return oid

    def objects_by_tag(self, tag: str) -> list[int]:
        return sorted(oid for oid, obj in self.objects.items() if obj.tag == tag)

    def nearest_object(
        self, p: Vec3, radius: float, tag: str | None = None
    ) -> int | None:
        """Object minimizing horizontal (x, z) distance to p within radius;
        ties break toward the lower id."""
        if radius <= 0:
            raise ValueError("radius must be positive")
        best: tuple[float, int] | None = None
        for oid in sorted(self.objects):
            obj = self.objects[oid]
            if tag is not None and obj.tag != tag:
                continue
            d = obj.pose.position.horizontal_distance_to(p)
            if d > radius:
                continue
            if best is None or d < best[0]:
                best = (d, oid)
        return best[1] if best else None

    # ----------------------------------------------------------- hash ----

    def state_dict(self) -> dict:
        """Canonical serialization of the observable world state.

        Excludes the tick counter, the undo stack and the recording store so
        that undo soundness is expressible as hash equality.
        """
        objects = []
        for oid in sorted(self.objects):
            o = self.objects[oid]
            objects.append(
                {
                    "id": oid,
                    "tag": o.tag,
                    "pose": pose_state(o.pose),
                    "grabbable": o.grabbable,
                    "scalar_state": {
                        k: _round(v) for k, v in sorted(o.scalar_state.items())
                    },
                    "velocity": vec_state(o.velocity),
                }
            )
        clones = [self.clones[cid].state_dict(self) for cid in sorted(self.clones)]
        groups = [
            {"id": gid, "members": sorted(members)}
            for gid, members in sorted(self.groups.items())
        ]
        attachments = [
            self.attachments[oid].state_dict() for oid in sorted(self.attachments)
        ]
        avatar = {
            "id": self.avatar.entity_id,
            "root": transform_state(self.avatar.root),
            "body": body_state(self.avatar.body),
            "scale": _round(self.avatar.scale),
            "controlled": self.avatar.controlled_clone,
        }
        return {
            "objects": objects,
            "clones": clones,
            "groups": groups,
            "attachments": attachments,
            "avatar": avatar,
        }

    def canonical_json(self) -> str:
        return json.dumps(self.state_dict(), sort_keys=True, separators=(",", ":"))

    def world_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()

    # ------------------------------------------------------- integrity ---

    def check_integrity(self) -> None:
        """No dangling ids in groups or attachments; used by tests."""
        for gid, members in self.groups.items():
            for cid in members:
                if cid not in self.clones:
                    raise AssertionError(f"group {gid} references missing clone {cid}")
        for oid, att in self.attachments.items():
            if oid not in self.objects:
                raise AssertionError(f"attachment references missing object {oid}")
            holder = att.holder
            if holder != self.avatar.entity_id and holder not in self.clones:
                raise AssertionError(f"attachment references missing holder {holder}")
