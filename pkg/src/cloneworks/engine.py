"""The clone engine: spawning methods, temporal modes, mirroring, scaling,
grouping, duplication, undo, control switching, locomotion, recording
capture, and the fixed-step tick that solves every clone.

One engine owns one world. Commands may be called directly between ticks or
queued for the next tick boundary; they are never safe to call concurrently
with :meth:`Engine.tick`.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import interaction
from .errors import (
    AlreadyGrouped,
    AlreadyRecording,
    BadTimestep,
    CannotRemoveControlledBody,
    EmptyUndoStack,
    EngineError,
    NoSnapAnchor,
    NotAClone,
    NotRecording,
    NotStatic,
    SameObject,
    ScopeViolation,
    TargetNotOnGround,
    TooFewMembers,
    UnknownEntity,
    UnknownRecording,
)
from .geometry import (
    Pose,
    Quat,
    RigidTransform,
    Vec3,
    apply,
    apply_point,
    check_scale,
    compose,
    inverse,
    mirror_quat_local,
    snap_to_grid,
)
from .interaction import Attachment, ContactRule
from .recorder import (
    SCOPE_EXTENDED,
    SCOPE_POSES,
    RecordedEvent,
    RecordedFrame,
    RecorderState,
    Recording,
    RecordingStore,
    events_between,
    recording_from_dict,
    recording_to_dict,
    sample_body,
)
from .world import (
    BodyFrame,
    World,
    WorldConfig,
    WorldObject,
    body_state,
    clamp_hands_to_reach,
    neutral_body,
    pose_state,
    transform_state,
)

JOINTS = ("head", "left_hand", "right_hand")
TRANSITION_SECONDS = 0.3
REMOVE_DROP_LOCAL = Vec3(0.0, 1.0, 0.5)
GROUP_COLOR_CYCLE = 6


# ------------------------------------------------------------------ modes ---


@dataclass
class Static:
    kind = "static"


@dataclass
class Synchronous:
    kind = "synchronous"
    user_anchor: RigidTransform = RigidTransform()
    clone_anchor: RigidTransform = RigidTransform()


@dataclass
class Replayed:
    kind = "replayed"
    recording: int = 0
    phase: float = 0.0
    started_at_tick: int = 0


CloneMode = Static | Synchronous | Replayed


class Clone:
    """A copy of the user's avatar living in the world.

    Synchronous clones are solved in a batch each tick; their BodyFrame is
    materialized lazily from the batch output on first access.
    """

    __slots__ = (
        "id",
        "root",
        "mode",
        "mirror",
        "scale",
        "group",
        "outline_color_index",
        "_body",
        "_solved",
    )

    def __init__(
        self,
        id: int,
        root: RigidTransform,
        mode: CloneMode,
        body: BodyFrame,
        mirror: bool = False,
        scale: float = 1.0,
    ):
        self.id = id
        self.root = root
        self.mode = mode
        self.mirror = mirror
        self.scale = scale
        self.group: int | None = None
        self.outline_color_index = 0
        self._body: BodyFrame | None = body
        self._solved = None  # (positions (3,3), quats (3,4), lg, rg)

    @property
    def body(self) -> BodyFrame:
        if self._body is None:
            pos, quat, lg, rg = self._solved
            poses = [
                Pose(
                    Vec3(float(pos[j, 0]), float(pos[j, 1]), float(pos[j, 2])),
                    Quat(
                        float(quat[j, 0]),
                        float(quat[j, 1]),
                        float(quat[j, 2]),
                        float(quat[j, 3]),
                    ),
                )
                for j in range(3)
            ]
            self._body = BodyFrame(poses[0], poses[1], poses[2], lg, rg)
        return self._body

    @body.setter
    def body(self, frame: BodyFrame) -> None:
        self._body = frame
        self._solved = None

    def set_solved(self, positions, quats, lg: bool, rg: bool) -> None:
        self._solved = (positions, quats, lg, rg)
        self._body = None

    @property
    def flags(self) -> tuple[bool, bool]:
        if self._body is None and self._solved is not None:
            return (self._solved[2], self._solved[3])
        return (self._body.left_grab, self._body.right_grab)

    def mode_state(self) -> dict:
        m = self.mode
        if isinstance(m, Static):
            return {"kind": "static"}
        if isinstance(m, Synchronous):
            return {
                "kind": "synchronous",
                "user_anchor": transform_state(m.user_anchor),
                "clone_anchor": transform_state(m.clone_anchor),
            }
        return {
            "kind": "replayed",
            "recording": m.recording,
            "phase": round(m.phase, 6),
            "started_at_tick": m.started_at_tick,
        }

    def state_dict(self, world: World) -> dict:
        held = {"left": None, "right": None}
        for att in world.attachments.values():
            if att.holder == self.id:
                held[att.hand] = att.object
        return {
            "id": self.id,
            "root": transform_state(self.root),
            "mode": self.mode_state(),
            "body": body_state(self.body),
            "mirror": self.mirror,
            "scale": round(self.scale, 6),
            "group": self.group,
            "color": self.outline_color_index,
            "held": held,
        }


# ----------------------------------------------------------------- events ---


@dataclass(frozen=True)
class SwitchTransition:
    tick: int
    from_pose: Pose
    to_pose: Pose
    duration: float = TRANSITION_SECONDS


@dataclass(frozen=True)
class RecordingStarted:
    tick: int
    scope: str


@dataclass(frozen=True)
class RecordingStopped:
    tick: int
    recording: int


@dataclass(frozen=True)
class ReplayGrabMiss:
    tick: int
    holder: int
    hand: str


@dataclass(frozen=True)
class ReplayCommandSkipped:
    tick: int
    op: str
    reason: str


# ------------------------------------------------------------------- undo ---


@dataclass
class UndoEntry:
    kind: str  # "spawn" | "auto_spawn_batch" | "group" | "duplicate"
    created_clone_ids: list[int] = field(default_factory=list)
    created_object_ids: list[int] = field(default_factory=list)
    created_group_id: int | None = None
    prior_avatar_root: RigidTransform | None = None
    prior_avatar_body: BodyFrame | None = None
    # attachments transferred off the avatar: (object id, hand, grip, pose)
    transferred: list[tuple[int, str, RigidTransform, Pose]] = field(default_factory=list)
    # group undo: clone id -> (prior group, prior color)
    prior_groups: dict[int, tuple[int | None, int]] = field(default_factory=dict)


@dataclass
class SelfReplay:
    recording: Recording
    anchor: RigidTransform
    started_at_tick: int
    results: dict[int, list[int]] = field(default_factory=dict)


# ---------------------------------------------------------------- helpers ---


def object_frame(obj: WorldObject) -> RigidTransform:
    """Position plus yaw of a prop; pitch and roll are ignored so clones
    spawned from object offsets stay upright."""
    return RigidTransform(obj.pose.position, obj.pose.orientation.yaw_component())


def transform_body(t: RigidTransform, b: BodyFrame) -> BodyFrame:
    return BodyFrame(
        head=apply(t, b.head),
        left_hand=apply(t, b.left_hand),
        right_hand=apply(t, b.right_hand),
        left_grab=b.left_grab,
        right_grab=b.right_grab,
    )


def body_to_world(root: RigidTransform, local: BodyFrame, scale: float) -> BodyFrame:
    """Root-local input to world space; local joint positions scale with the
    controlled body's size (the control-display ratio effect)."""

    def j(p: Pose) -> Pose:
        return Pose(
            apply_point(root, p.position * scale),
            root.rotation.multiply(p.orientation),
        )

    return BodyFrame(
        head=j(local.head),
        left_hand=j(local.left_hand),
        right_hand=j(local.right_hand),
        left_grab=local.left_grab,
        right_grab=local.right_grab,
    )


def body_to_local(root: RigidTransform, world: BodyFrame, scale: float) -> BodyFrame:
    inv = inverse(root)

    def j(p: Pose) -> Pose:
        local = apply(inv, p)
        return Pose(local.position * (1.0 / scale), local.orientation)

    return BodyFrame(
        head=j(world.head),
        left_hand=j(world.left_hand),
        right_hand=j(world.right_hand),
        left_grab=world.left_grab,
        right_grab=world.right_grab,
    )


def solve_sync_joint(
    user_pose: Pose,
    user_anchor: RigidTransform,
    clone_anchor: RigidTransform,
    scale: float,
    mirrored: bool,
) -> Pose:
    """Scalar reference solve: clone_anchor o [mirror] o [scale] o
    user_anchor^-1 o user_pose. The batched solver must match this exactly."""
    local = apply(inverse(user_anchor), user_pose)
    p = local.position * scale
    q = local.orientation
    if mirrored:
        p = Vec3(-p.x, p.y, p.z)
        q = mirror_quat_local(q)
    return apply(clone_anchor, Pose(p, q))


def solve_sync_body(
    user_body: BodyFrame,
    user_anchor: RigidTransform,
    clone_anchor: RigidTransform,
    scale: float,
    mirrored: bool,
) -> BodyFrame:
    """Reference solve for a whole body, including the mirrored hand-channel
    swap (left output follows the user's right hand, grabs included)."""
    head = solve_sync_joint(user_body.head, user_anchor, clone_anchor, scale, mirrored)
    if mirrored:
        left = solve_sync_joint(
            user_body.right_hand, user_anchor, clone_anchor, scale, True
        )
        right = solve_sync_joint(
            user_body.left_hand, user_anchor, clone_anchor, scale, True
        )
        return BodyFrame(head, left, right, user_body.right_grab, user_body.left_grab)
    left = solve_sync_joint(user_body.left_hand, user_anchor, clone_anchor, scale, False)
    right = solve_sync_joint(
        user_body.right_hand, user_anchor, clone_anchor, scale, False
    )
    return BodyFrame(head, left, right, user_body.left_grab, user_body.right_grab)


def _quat_mul_np(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    w1, x1, y1, z1 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    w2, x2, y2, z2 = b[..., 0], b[..., 1], b[..., 2], b[..., 3]
    shape = np.broadcast(w1, w2).shape + (4,)
    out = np.empty(shape, dtype=np.float64)
    out[..., 0] = w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2
    out[..., 1] = w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2
    out[..., 2] = w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2
    out[..., 3] = w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2
    return out


def _rot_matrix(q: Quat) -> np.ndarray:
    w, x, y, z = q.w, q.x, q.y, q.z
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ],
        dtype=np.float64,
    )


# ------------------------------------------------------------------ engine ---


class Engine:
    def __init__(
        self,
        config: WorldConfig | None = None,
        contact_rules: list[ContactRule] | None = None,
    ):
        self.world = World(config)
        self.contact_rules: list[ContactRule] = list(contact_rules or [])
        self.recordings = RecordingStore()
        self.recorder = RecorderState()
        self.undo_stack: list[UndoEntry] = []
        self.queue: deque = deque()  # (op, params, on_result)
        self._record_first_tick: int | None = None
        self._self_replay: SelfReplay | None = None
        self._replaying_commands = False
        self._prev_flags: dict[int, tuple[bool, bool]] = {
            self.world.avatar.entity_id: (False, False)
        }
        self._prev_obj_pos: dict[int, Vec3] = {}
        self._prev_hands: dict[tuple[int, str], Vec3] = {}
        self._groups_created = 0
        # events emitted by commands run between ticks; returned by next tick
        self._pending_events: list = []
        # batched synchronous solve state
        self._solve_rows: dict[int, tuple] = {}
        self._batch = None
        self._replayed_ids: set[int] = set()
        # grab-edge scan for sync clones runs only when flags can change
        self._prev_user_flags = (False, False)
        self._flags_dirty = True
        # objects that may still be falling; rebuilt when the world changes
        self._settling: set[int] = set()
        self._objects_version_seen = -1

    # --------------------------------------------------------- plumbing ---

    @property
    def config(self) -> WorldConfig:
        return self.world.config

    def enqueue(self, op: str, params: dict, on_result: Callable | None = None):
        self.queue.append((op, params, on_result))

    def _clone(self, cid) -> Clone:
        clone = self.world.clones.get(cid)
        if clone is None:
            if cid in self.world.objects:
                raise NotAClone(f"entity {cid} is an object, not a clone")
            raise UnknownEntity(f"no clone {cid}")
        return clone

    def _object(self, oid) -> WorldObject:
        obj = self.world.objects.get(oid)
        if obj is None:
            raise UnknownEntity(f"no object {oid}")
        return obj

    def _next_group_color(self) -> int:
        self._groups_created += 1
        return 1 + (self._groups_created - 1) % GROUP_COLOR_CYCLE

    # --------------------------------------------------- solve row cache ---

    def _rebuild_row(self, clone: Clone) -> None:
        mode = clone.mode
        if isinstance(mode, Replayed):
            self._replayed_ids.add(clone.id)
        else:
            self._replayed_ids.discard(clone.id)
        if not isinstance(mode, Synchronous):
            self._solve_rows.pop(clone.id, None)
            self._batch = None
            return
        a_u, a_c = mode.user_anchor, mode.clone_anchor
        s = clone.scale
        r_c = _rot_matrix(a_c.rotation)
        r_u = _rot_matrix(a_u.rotation)
        mirror_sign = -1.0 if clone.mirror else 1.0
        scale_mat = np.diag([s * mirror_sign, s, s])
        lin = r_c @ scale_mat @ r_u.T
        t_u = np.array(a_u.translation.as_tuple())
        t_c = np.array(a_c.translation.as_tuple())
        trans = t_c - lin @ t_u
        inv_qu = a_u.rotation.conjugate()
        if clone.mirror:
            inv_qu = mirror_quat_local(inv_qu)
        q_pre = a_c.rotation.multiply(inv_qu)
        qsign = (
            np.array([1.0, 1.0, -1.0, -1.0])
            if clone.mirror
            else np.array([1.0, 1.0, 1.0, 1.0])
        )
        self._solve_rows[clone.id] = (
            lin,
            trans,
            np.array(q_pre.as_tuple()),
            qsign,
            clone.mirror,
        )
        self._batch = None

    def _mark_all_sync_dirty(self) -> None:
        for cid in list(self._solve_rows):
            self._rebuild_row(self.world.clones[cid])

    def _build_batch(self):
        ids = sorted(self._solve_rows)
        if not ids:
            self._batch = ([], None)
            return
        lin = np.stack([self._solve_rows[i][0] for i in ids])
        trans = np.stack([self._solve_rows[i][1] for i in ids])
        qpre = np.stack([self._solve_rows[i][2] for i in ids])
        qsign = np.stack([self._solve_rows[i][3] for i in ids])
        # joint input order: mirrored clones read the opposite hand channel
        idx = np.array(
            [[0, 2, 1] if self._solve_rows[i][4] else [0, 1, 2] for i in ids]
        )
        self._batch = (ids, (lin, trans, qpre, qsign, idx))

    def _solve_sync_clones(self) -> None:
        if self._batch is None:
            self._build_batch()
        ids, packed = self._batch
        if not ids:
            return
        lin, trans, qpre, qsign, idx = packed
        body = self.world.avatar.body
        upos = np.array(
            [
                body.head.position.as_tuple(),
                body.left_hand.position.as_tuple(),
                body.right_hand.position.as_tuple(),
            ]
        )
        uquat = np.array(
            [
                body.head.orientation.as_tuple(),
                body.left_hand.orientation.as_tuple(),
                body.right_hand.orientation.as_tuple(),
            ]
        )
        sel_pos = upos[idx]  # (N, 3, 3)
        sel_quat = uquat[idx] * qsign[:, None, :]  # (N, 3, 4)
        out_pos = np.einsum("nab,njb->nja", lin, sel_pos) + trans[:, None, :]
        out_quat = _quat_mul_np(qpre[:, None, :], sel_quat)
        out_quat /= np.sqrt(
            np.einsum("njk,njk->nj", out_quat, out_quat)
        )[..., None]
        flags = (body.left_grab, body.right_grab)
        clones = self.world.clones
        for n, cid in enumerate(ids):
            clone = clones[cid]
            if clone.mirror:
                clone.set_solved(out_pos[n], out_quat[n], flags[1], flags[0])
            else:
                clone.set_solved(out_pos[n], out_quat[n], flags[0], flags[1])

    # ------------------------------------------------- recording capture ---

    def _recording_now(self) -> float:
        if self._record_first_tick is None:
            return 0.0
        return (self.world.tick - self._record_first_tick) * self.config.dt

    def _record_command(self, op: str, encoded_args: dict, results: list[int]):
        """Log an executed command into the active extended recording.

        Entity arguments that point at entities created by earlier recorded
        commands are stored as {"$cmd": k, "i": j} placeholders so a replayed
        automator binds to the entities it creates itself.
        """
        rec = self.recorder
        if (
            not rec.active
            or rec.scope != SCOPE_EXTENDED
            or self._replaying_commands
        ):
            return
        n = len(rec.created_ids)
        rec.events.append(
            RecordedEvent(
                t=self._recording_now(),
                kind="command",
                command={"op": op, "args": encoded_args, "n": n},
            )
        )
        rec.created_ids.append(list(results))

    def _encode_ref(self, value):
        """Rewrite an entity id to a placeholder when it was created by an
        earlier command in the active recording."""
        for k, ids in enumerate(self.recorder.created_ids):
            if value in ids:
                return {"$cmd": k, "i": ids.index(value)}
        return value

    def _local_pose(self, p: Pose) -> dict:
        return pose_state(apply(inverse(self.world.avatar.root), p))

    def _local_vec(self, v: Vec3) -> list[float]:
        local = apply_point(inverse(self.world.avatar.root), v)
        return [local.x, local.y, local.z]

    def _local_xf(self, t: RigidTransform) -> dict:
        return transform_state(compose(inverse(self.world.avatar.root), t))

    def _local_delta(self, t: RigidTransform) -> dict:
        # conjugate a world-space delta into avatar-root coordinates
        inv_root = inverse(self.world.avatar.root)
        return transform_state(compose(compose(inv_root, t), self.world.avatar.root))

    # ------------------------------------------------------ spawn methods ---

    def spawn_direct(self) -> int:
        """Clone the avatar in place; held objects transfer to the clone and
        the avatar steps backward by the configured offset."""
        w = self.world
        avatar = w.avatar
        prior_root = avatar.root
        prior_body = avatar.body
        cid = w.allocate_id()
        clone = Clone(
            id=cid,
            root=avatar.root,
            mode=Static(),
            body=avatar.body,
            scale=avatar.scale,
        )
        w.clones[cid] = clone
        transferred = []
        for att in list(w.attachments.values()):
            if att.holder == avatar.entity_id:
                transferred.append(
                    (att.object, att.hand, att.grip, w.objects[att.object].pose)
                )
                att.holder = cid
        avatar.root = compose(
            avatar.root, RigidTransform.from_translation(0, 0, -self.config.backward_offset)
        )
        avatar.body = body_to_world(avatar.root, avatar.input_local, avatar.scale)
        self._prev_flags[cid] = clone.flags
        self.undo_stack.append(
            UndoEntry(
                kind="spawn",
                created_clone_ids=[cid],
                prior_avatar_root=prior_root,
                prior_avatar_body=prior_body,
                transferred=transferred,
            )
        )
        self._record_command("spawn_direct", {}, [cid])
        return cid

    def spawn_indirect(
        self, target: Pose, snap: str = "none", scale: float = 1.0
    ) -> int:
        """Spawn a standing clone at a ground target chosen by ray, with
        optional grid or nearest-object snapping."""
        w = self.world
        if abs(target.position.y) > 1e-9:
            raise TargetNotOnGround("indirect spawn target must be on the ground")
        check_scale(scale)
        pos = target.position
        yaw_q = target.orientation.yaw_component()
        if snap == "grid":
            pos = snap_to_grid(pos, self.config.arm_length)
        elif snap == "nearest_object":
            oid = w.nearest_object(pos, self.config.snap_search_radius)
            if oid is None:
                raise NoSnapAnchor("no object within the snap search radius")
            opos = w.objects[oid].pose.position
            d = Vec3(opos.x - w.avatar.root.translation.x, 0.0, opos.z - w.avatar.root.translation.z)
            if d.norm() < 1e-9:
                d = Vec3(opos.x - pos.x, 0.0, opos.z - pos.z)
            if d.norm() < 1e-9:
                d = Vec3(0.0, 0.0, 1.0)
            d = d * (1.0 / d.norm())
            arm = self.config.arm_length
            pos = Vec3(opos.x - d.x * arm, 0.0, opos.z - d.z * arm)
            yaw_q = Quat.from_yaw(math.atan2(d.x, d.z))
        elif snap != "none":
            raise EngineError(f"unknown snap mode {snap!r}")
        root = RigidTransform(Vec3(pos.x, 0.0, pos.z), yaw_q)
        cid = w.allocate_id()
        clone = Clone(
            id=cid,
            root=root,
            mode=Static(),
            body=body_to_world(root, neutral_body(self.config), scale),
            scale=scale,
        )
        w.clones[cid] = clone
        self._prev_flags[cid] = (False, False)
        self.undo_stack.append(UndoEntry(kind="spawn", created_clone_ids=[cid]))
        self._record_command(
            "spawn_indirect",
            {"target": self._local_pose(target), "snap": snap, "scale": scale},
            [cid],
        )
        return cid

    def _spawn_offset_clone(self, offset: RigidTransform, anchor_obj: WorldObject):
        """Shared auto/relative machinery: place a synchronous clone so its
        root carries the captured user offset onto the anchor object."""
        w = self.world
        avatar = w.avatar
        root = compose(object_frame(anchor_obj), offset)
        cid = w.allocate_id()
        rebase = compose(root, inverse(avatar.root))
        clone = Clone(
            id=cid,
            root=root,
            mode=Synchronous(user_anchor=avatar.root, clone_anchor=root),
            body=transform_body(rebase, avatar.body),
        )
        w.clones[cid] = clone
        self._prev_flags[cid] = clone.flags
        created_objects = []
        for att in list(w.attachments.values()):
            if att.holder != avatar.entity_id:
                continue
            src = w.objects[att.object]
            hand_pose = clone.body.hand(att.hand)
            copy_id = w.add_object(
                src.tag,
                apply(RigidTransform.from_pose(hand_pose), att.grip.as_pose()),
                grabbable=src.grabbable,
                scalar_state=dict(src.scalar_state),
            )
            w.attachments[copy_id] = Attachment(
                object=copy_id, holder=cid, hand=att.hand, grip=att.grip
            )
            created_objects.append(copy_id)
        self._rebuild_row(clone)
        return cid, created_objects

    def spawn_auto(self, selected) -> list[int]:
        """Clone in front of every other object sharing the selected object's
        tag, preserving the user's offset from the selected one. Held objects
        are duplicated into each clone's hands. One batch undo entry."""
        w = self.world
        sel = self._object(selected)
        offset = compose(inverse(object_frame(sel)), w.avatar.root)
        created_clones: list[int] = []
        created_objects: list[int] = []
        for oid in w.objects_by_tag(sel.tag):
            if oid == selected:
                continue
            cid, objs = self._spawn_offset_clone(offset, w.objects[oid])
            created_clones.append(cid)
            created_objects.extend(objs)
        if created_clones:
            self.undo_stack.append(
                UndoEntry(
                    kind="auto_spawn_batch",
                    created_clone_ids=created_clones,
                    created_object_ids=created_objects,
                )
            )
        self._record_command(
            "spawn_auto", {"selected": self._encode_ref(selected)}, created_clones
        )
        return created_clones

    def spawn_relative(self, reference, target) -> int:
        """Capture the offset between the reference object and the user and
        replicate it onto the target object."""
        w = self.world
        if reference == target:
            raise SameObject("reference and target must differ")
        ref = self._object(reference)
        tgt = self._object(target)
        offset = compose(inverse(object_frame(ref)), w.avatar.root)
        cid, created_objects = self._spawn_offset_clone(offset, tgt)
        self.undo_stack.append(
            UndoEntry(
                kind="spawn",
                created_clone_ids=[cid],
                created_object_ids=created_objects,
            )
        )
        self._record_command(
            "spawn_relative",
            {
                "reference": self._encode_ref(reference),
                "target": self._encode_ref(target),
            },
            [cid],
        )
        return cid

    # ----------------------------------------------------- configuration ---

    def set_mode(
        self, clone, kind: str, recording: int | None = None, phase: float = 0.0
    ) -> None:
        """Change a clone's temporal mode. Synchronous captures fresh anchors
        from the current avatar root and clone root; static freezes the body;
        replayed starts the referenced recording now."""
        target = self._clone(clone)
        if kind == "static":
            _ = target.body  # materialize before dropping the solve reference
            target.mode = Static()
        elif kind == "synchronous":
            target.mode = Synchronous(
                user_anchor=self.world.avatar.root, clone_anchor=target.root
            )
        elif kind == "replayed":
            if recording is None or recording not in self.recordings:
                raise UnknownRecording(f"no recording {recording}")
            rec = self.recordings.get(recording)
            wrapped = phase % rec.duration if rec.duration > 0 else 0.0
            _ = target.body
            target.mode = Replayed(
                recording=recording, phase=wrapped, started_at_tick=self.world.tick
            )
        else:
            raise EngineError(f"unknown mode kind {kind!r}")
        self._rebuild_row(target)
        self._flags_dirty = True
        self._record_command(
            "set_mode",
            {
                "clone": self._encode_ref(clone),
                "kind": kind,
                "recording": recording,
                "phase": phase,
            },
            [],
        )

    def set_mirror(self, clone, on: bool) -> None:
        target = self._clone(clone)
        target.mirror = bool(on)
        self._rebuild_row(target)
        self._flags_dirty = True
        self._record_command(
            "set_mirror", {"clone": self._encode_ref(clone), "on": bool(on)}, []
        )

    def set_scale(self, clone, s: float) -> None:
        check_scale(s)
        target = self._clone(clone)
        target.scale = s
        self._rebuild_row(target)
        self._record_command(
            "set_scale", {"clone": self._encode_ref(clone), "s": s}, []
        )

    # ----------------------------------------------------------- control ---

    def switch_control(self, target) -> int:
        """Move the user's control binding into a clone. The former body stays
        behind as a static clone; engine state changes atomically, and a
        transition descriptor is emitted for clients to animate. Returns the
        id of the former body."""
        w = self.world
        clone = self._clone(target)
        avatar = w.avatar
        former_id = w.allocate_id()
        former = Clone(
            id=former_id,
            root=avatar.root,
            mode=Static(),
            body=avatar.body,
            scale=avatar.scale,
        )
        from_head = avatar.body.head
        for att in list(w.attachments.values()):
            if att.holder == avatar.entity_id:
                att.holder = former_id
            elif att.holder == target:
                att.holder = avatar.entity_id
        new_root = RigidTransform(
            clone.root.translation, clone.root.rotation.yaw_component()
        )
        adopted = clone.body
        avatar.root = new_root
        avatar.scale = clone.scale
        avatar.body = adopted
        avatar.input_local = body_to_local(new_root, adopted, clone.scale)
        avatar.controlled_clone = target
        self._drop_clone_bookkeeping(target)
        del w.clones[target]
        self._ungroup_on_departure(target)
        w.clones[former_id] = former
        self._prev_flags[former_id] = former.flags
        self._prev_flags[avatar.entity_id] = (adopted.left_grab, adopted.right_grab)
        # virtual relocation: synchronous clones must not jump
        delta = compose(new_root, inverse(former.root))
        self._shift_user_anchors(delta)
        self._pending_events.append(
            SwitchTransition(tick=w.tick, from_pose=from_head, to_pose=adopted.head)
        )
        self._record_command(
            "switch_control", {"target": self._encode_ref(target)}, [former_id]
        )
        return former_id

    def _drop_clone_bookkeeping(self, cid) -> None:
        self._solve_rows.pop(cid, None)
        self._prev_flags.pop(cid, None)
        self._replayed_ids.discard(cid)
        self._batch = None

    def _ungroup_on_departure(self, cid) -> None:
        w = self.world
        for gid, members in list(w.groups.items()):
            if cid in members:
                members.discard(cid)
                if len(members) < 2:
                    for rest in members:
                        w.clones[rest].group = None
                        w.clones[rest].outline_color_index = 0
                    del w.groups[gid]
                break

    def _shift_user_anchors(self, delta: RigidTransform) -> None:
        for clone in self.world.clones.values():
            if isinstance(clone.mode, Synchronous):
                clone.mode.user_anchor = compose(delta, clone.mode.user_anchor)
                self._rebuild_row(clone)

    # ---------------------------------------------------------- grouping ---

    def set_group(self, members: list[int]) -> int:
        if len(members) < 2:
            raise TooFewMembers("a group needs at least two clones")
        clones = [self._clone(cid) for cid in members]
        for clone in clones:
            if clone.group is not None:
                raise AlreadyGrouped(f"clone {clone.id} already grouped")
        if len(set(members)) != len(members):
            raise AlreadyGrouped("duplicate member ids")
        w = self.world
        gid = w.allocate_id()
        color = self._next_group_color()
        prior = {c.id: (c.group, c.outline_color_index) for c in clones}
        for clone in clones:
            clone.group = gid
            clone.outline_color_index = color
        w.groups[gid] = set(members)
        self.undo_stack.append(
            UndoEntry(kind="group", created_group_id=gid, prior_groups=prior)
        )
        self._record_command(
            "set_group",
            {"members": [self._encode_ref(m) for m in members]},
            [gid],
        )
        return gid

    def move(self, target, new_root: RigidTransform) -> None:
        """Rigidly move a clone, or its whole group, preserving all pairwise
        member transforms. Synchronous anchors follow so tracked motion stays
        relative to the new placement."""
        clone = self._clone(target)
        delta = compose(new_root, inverse(clone.root))
        members = (
            sorted(self.world.groups[clone.group])
            if clone.group is not None
            else [target]
        )
        for cid in members:
            c = self.world.clones[cid]
            c.root = compose(delta, c.root)
            c.body = transform_body(delta, c.body)
            if isinstance(c.mode, Synchronous):
                c.mode.clone_anchor = compose(delta, c.mode.clone_anchor)
                self._rebuild_row(c)
            self._refresh_holder_attachments(cid)
        self._record_command(
            "move",
            {
                "target": self._encode_ref(target),
                "new_root": self._local_xf(new_root),
            },
            [],
        )

    def duplicate(self, target, placement: RigidTransform) -> list[int]:
        """Deep-copy a clone or a whole group, displaced by placement. Copies
        keep mode, mirror, scale and recording references; held objects are
        copied; group copies form a new group."""
        w = self.world
        if target in w.clones:
            originals = [target]
            as_group = False
        elif target in w.groups:
            originals = sorted(w.groups[target])
            as_group = True
        elif target in w.objects:
            raise NotAClone(f"entity {target} is an object")
        else:
            raise UnknownEntity(f"no clone or group {target}")
        created_clones: list[int] = []
        created_objects: list[int] = []
        for cid in originals:
            src = w.clones[cid]
            new_id = w.allocate_id()
            mode = src.mode
            if isinstance(mode, Synchronous):
                new_mode: CloneMode = Synchronous(
                    user_anchor=mode.user_anchor,
                    clone_anchor=compose(placement, mode.clone_anchor),
                )
            elif isinstance(mode, Replayed):
                new_mode = Replayed(
                    recording=mode.recording,
                    phase=mode.phase,
                    started_at_tick=mode.started_at_tick,
                )
            else:
                new_mode = Static()
            copy = Clone(
                id=new_id,
                root=compose(placement, src.root),
                mode=new_mode,
                body=transform_body(placement, src.body),
                mirror=src.mirror,
                scale=src.scale,
            )
            w.clones[new_id] = copy
            self._prev_flags[new_id] = copy.flags
            created_clones.append(new_id)
            for att in list(w.attachments.values()):
                if att.holder != cid:
                    continue
                srcobj = w.objects[att.object]
                hand_pose = copy.body.hand(att.hand)
                copy_oid = w.add_object(
                    srcobj.tag,
                    apply(RigidTransform.from_pose(hand_pose), att.grip.as_pose()),
                    grabbable=srcobj.grabbable,
                    scalar_state=dict(srcobj.scalar_state),
                )
                w.attachments[copy_oid] = Attachment(
                    object=copy_oid, holder=new_id, hand=att.hand, grip=att.grip
                )
                created_objects.append(copy_oid)
            self._rebuild_row(copy)
        new_gid = None
        if as_group and len(created_clones) >= 2:
            new_gid = w.allocate_id()
            color = self._next_group_color()
            for cid in created_clones:
                w.clones[cid].group = new_gid
                w.clones[cid].outline_color_index = color
            w.groups[new_gid] = set(created_clones)
        self.undo_stack.append(
            UndoEntry(
                kind="duplicate",
                created_clone_ids=created_clones,
                created_object_ids=created_objects,
                created_group_id=new_gid,
            )
        )
        self._record_command(
            "duplicate",
            {
                "target": self._encode_ref(target),
                "placement": self._local_delta(placement),
            },
            created_clones,
        )
        return created_clones

    def remove_clone(self, target) -> None:
        """Delete a clone; anything it held reappears just in front of the
        avatar (waist height) and then settles."""
        w = self.world
        if target == w.avatar.entity_id or target == w.avatar.controlled_clone:
            raise CannotRemoveControlledBody("cannot remove the controlled body")
        if target not in w.clones:
            if target in w.objects:
                raise NotAClone(f"entity {target} is an object")
            raise UnknownEntity(f"no clone {target}")
        drop = apply_point(w.avatar.root, REMOVE_DROP_LOCAL)
        for att in list(w.attachments.values()):
            if att.holder == target:
                obj = w.objects[att.object]
                obj.pose = Pose(drop, obj.pose.orientation)
                obj.velocity = Vec3()
                del w.attachments[att.object]
                self._settling.add(att.object)
        self._drop_clone_bookkeeping(target)
        del w.clones[target]
        self._ungroup_on_departure(target)
        self._record_command("remove_clone", {"target": self._encode_ref(target)}, [])

    # -------------------------------------------------------------- undo ---

    def undo(self) -> None:
        """Revert the top undoable command (spawns, auto-spawn batches,
        grouping, duplication). Restores the world hash captured before the
        command when applied LIFO."""
        if not self.undo_stack:
            raise EmptyUndoStack("nothing to undo")
        entry = self.undo_stack.pop()
        w = self.world
        if entry.kind == "group":
            if entry.created_group_id in w.groups:
                del w.groups[entry.created_group_id]
            for cid, (group, color) in entry.prior_groups.items():
                if cid in w.clones:
                    w.clones[cid].group = group
                    w.clones[cid].outline_color_index = color
            self._record_command("undo", {}, [])
            return
        for cid in entry.created_clone_ids:
            if cid in w.clones:
                for att in list(w.attachments.values()):
                    if att.holder == cid:
                        del w.attachments[att.object]
                self._drop_clone_bookkeeping(cid)
                del w.clones[cid]
                self._ungroup_on_departure(cid)
        for oid in entry.created_object_ids:
            w.attachments.pop(oid, None)
            w.objects.pop(oid, None)
        if entry.created_group_id is not None:
            w.groups.pop(entry.created_group_id, None)
        if entry.prior_avatar_root is not None:
            w.avatar.root = entry.prior_avatar_root
            w.avatar.body = entry.prior_avatar_body
        for oid, hand, grip, pose in entry.transferred:
            if oid in w.objects:
                w.objects[oid].pose = pose
                w.attachments[oid] = Attachment(
                    object=oid, holder=w.avatar.entity_id, hand=hand, grip=grip
                )
        self._record_command("undo", {}, [])

    # --------------------------------------------------------- locomotion ---

    def _locomote(self, new_root: RigidTransform) -> None:
        avatar = self.world.avatar
        delta = compose(new_root, inverse(avatar.root))
        avatar.root = new_root
        avatar.body = body_to_world(new_root, avatar.input_local, avatar.scale)
        self._shift_user_anchors(delta)
        self._refresh_holder_attachments(avatar.entity_id)

    def teleport(self, to: Vec3) -> None:
        """Virtual locomotion: moves the avatar root without propagating any
        motion into synchronous clones (their user anchors shift along)."""
        self._locomote(RigidTransform(to, self.world.avatar.root.rotation))
        self._record_command("teleport", {"to": self._local_vec(to)}, [])

    def rotate(self, yaw_delta_deg: float) -> None:
        """Rotate the avatar in place; establishes a rotational offset against
        synchronous clones without moving them."""
        avatar = self.world.avatar
        new_rot = Quat.from_yaw(math.radians(yaw_delta_deg)).multiply(
            avatar.root.rotation
        )
        self._locomote(RigidTransform(avatar.root.translation, new_rot))
        self._record_command("rotate", {"yaw_delta_deg": yaw_delta_deg}, [])

    def step_onto(self, target) -> None:
        """Teleport to a static clone's head (step-stool use); yaw preserved."""
        clone = self._clone(target)
        if not isinstance(clone.mode, Static):
            raise NotStatic("can only step onto a static clone")
        head = clone.body.head.position
        self._locomote(RigidTransform(head, self.world.avatar.root.rotation))
        self._record_command("step_onto", {"target": self._encode_ref(target)}, [])

    # ---------------------------------------------------------- recording ---

    def start_recording(self, scope: str = SCOPE_POSES) -> None:
        if self.recorder.active:
            raise AlreadyRecording("a recording is already active")
        if scope not in (SCOPE_POSES, SCOPE_EXTENDED):
            raise EngineError(f"unknown recording scope {scope!r}")
        self.recorder = RecorderState(
            active=True, scope=scope, anchor=self.world.avatar.root
        )
        self._record_first_tick = None
        self._pending_events.append(
            RecordingStarted(tick=self.world.tick, scope=scope)
        )

    def stop_recording(self) -> int:
        if not self.recorder.active:
            raise NotRecording("no active recording")
        state = self.recorder
        self.recorder = RecorderState()
        self._record_first_tick = None
        rid = self.world.allocate_id()
        rec = self.recordings.add(rid, state)  # raises EmptyRecording on 0 frames
        self._pending_events.append(
            RecordingStopped(tick=self.world.tick, recording=rec.id)
        )
        return rid

    def list_recordings(self) -> list[tuple[int, float, str, int]]:
        return self.recordings.list_recordings()

    def apply_recording(self, recording: int, target, delta: float = 0.0) -> None:
        """Drive a clone, a group (with a per-member phase shift), or the
        avatar itself from a stored recording.

        Group members get phases i * delta (ascending id), all started on the
        same tick. Self-application overrides the avatar's input source for
        exactly one pass and re-executes recorded commands relative to the
        current avatar root."""
        rec = self.recordings.get(recording)
        w = self.world
        if target == "self":
            if rec.scope != SCOPE_EXTENDED and not self.config.allow_pose_self_replay:
                raise ScopeViolation(
                    "self-application needs an extended recording "
                    "(or allow_pose_self_replay)"
                )
            if self._self_replay is not None:
                raise ScopeViolation("a self replay is already running")
            self._self_replay = SelfReplay(
                recording=rec, anchor=w.avatar.root, started_at_tick=w.tick
            )
        elif target in w.clones:
            clone = w.clones[target]
            _ = clone.body
            clone.mode = Replayed(
                recording=recording, phase=0.0, started_at_tick=w.tick
            )
            self._rebuild_row(clone)
        elif target in w.groups:
            for i, cid in enumerate(sorted(w.groups[target])):
                clone = w.clones[cid]
                _ = clone.body
                # member i is DELAYED by i * delta: pose_i(t) = pose_0(t - i*delta)
                phase = (-(i * delta)) % rec.duration if rec.duration > 0 else 0.0
                clone.mode = Replayed(
                    recording=recording, phase=phase, started_at_tick=w.tick
                )
                self._rebuild_row(clone)
        else:
            raise UnknownEntity(f"no clone or group {target}")
        self._record_command(
            "apply_recording",
            {
                "recording": recording,
                "target": self._encode_ref(target) if target != "self" else "self",
                "delta": delta,
            },
            [],
        )

    def sample_recording(self, recording: int, local_t: float):
        """Query form of replay sampling: the interpolated body plus the
        events whose looped occurrences land in the one-tick window ending at
        local_t."""
        if local_t < 0:
            raise EngineError("local_t must be non-negative")
        rec = self.recordings.get(recording)
        body = sample_body(rec, local_t)
        window = self.config.dt
        events = events_between(rec, local_t - window, local_t, include_start=local_t == 0.0)
        return body, events

    # ----------------------------------------------------------- the tick ---

    def _refresh_holder_attachments(self, holder: int) -> None:
        w = self.world
        for att in w.attachments.values():
            if att.holder != holder:
                continue
            body = (
                w.avatar.body if holder == w.avatar.entity_id else w.clones[holder].body
            )
            interaction.refresh_attachment(w, att, body.hand(att.hand))

    def _holder_body(self, holder: int) -> BodyFrame:
        w = self.world
        if holder == w.avatar.entity_id:
            return w.avatar.body
        return w.clones[holder].body

    def _capture_frame(self) -> None:
        rec = self.recorder
        if not rec.active:
            return
        if self._record_first_tick is None:
            self._record_first_tick = self.world.tick
        t = (self.world.tick - self._record_first_tick) * self.config.dt
        local = transform_body(inverse(rec.anchor), self.world.avatar.body)
        rec.frames.append(RecordedFrame(t=t, body=local))

    def _record_interaction(self, kind: str, hand: str) -> None:
        rec = self.recorder
        if rec.active:
            rec.events.append(
                RecordedEvent(t=self._recording_now(), kind=kind, hand=hand)
            )

    def _flag_edges(self, holder: int, lg: bool, rg: bool, grabs, releases) -> None:
        plg, prg = self._prev_flags.get(holder, (lg, rg))
        if lg and not plg:
            grabs.append((holder, "left", "flag"))
        elif plg and not lg:
            releases.append((holder, "left"))
        if rg and not prg:
            grabs.append((holder, "right", "flag"))
        elif prg and not rg:
            releases.append((holder, "right"))
        self._prev_flags[holder] = (lg, rg)

    def _execute_recorded_command(self, cmd: dict, results: dict[int, list[int]]):
        from .commands import decode_recorded_args, dispatch

        op = cmd["op"]
        try:
            args = decode_recorded_args(self, op, cmd["args"], results)
            self._replaying_commands = True
            try:
                result = dispatch(self, op, args)
            finally:
                self._replaying_commands = False
            ids = result if isinstance(result, list) else (
                [result] if isinstance(result, int) else []
            )
            results[cmd["n"]] = ids
        except EngineError as err:
            results[cmd["n"]] = []
            self._pending_events.append(
                ReplayCommandSkipped(
                    tick=self.world.tick, op=op, reason=err.code
                )
            )

    def tick(self, input_frame: BodyFrame | None = None, dt: float | None = None):
        """Advance the simulation one fixed step.

        Order: queued commands; avatar input (or self-replay); recording
        capture; clone solve; releases then grabs (ascending holder id);
        attachment refresh and settling; contact rules; tick advance.
        Returns the events emitted this tick.
        """
        cfg = self.config
        if dt is None:
            dt = cfg.dt
        if dt != cfg.dt:
            raise BadTimestep(f"dt must be exactly 1/{cfg.tick_rate}")
        w = self.world
        avatar = w.avatar
        events = self._pending_events  # carry events from direct commands

        # (1) queued commands, in arrival (seq) order
        while self.queue:
            op, params, on_result = self.queue.popleft()
            from .commands import dispatch_json

            try:
                result = dispatch_json(self, op, params)
                if on_result:
                    on_result(result, None)
            except EngineError as err:
                if on_result:
                    on_result(None, err)
                else:
                    raise

        grabs: list[tuple[int, str, str]] = []
        releases: list[tuple[int, str]] = []

        # (2) avatar input, or the recording that possessed it
        sr = self._self_replay
        if sr is not None:
            u_cur = (w.tick - sr.started_at_tick) * dt
            first = w.tick == sr.started_at_tick
            u_prev = u_cur - dt
            duration = sr.recording.duration
            u_clamped = min(u_cur, duration)
            for ev in events_between(
                sr.recording, u_prev, u_clamped, include_start=first
            ):
                if ev.kind == "command":
                    self._execute_recorded_command(ev.command, sr.results)
                elif ev.kind == "grab":
                    grabs.append((avatar.entity_id, ev.hand, "replay"))
                    self._record_interaction("grab", ev.hand)
                elif ev.kind == "release":
                    releases.append((avatar.entity_id, ev.hand))
                    self._record_interaction("release", ev.hand)
            if u_clamped >= duration - 1e-12:
                frame = sr.recording.frames[-1].body
            else:
                frame = sample_body(sr.recording, u_clamped)
            avatar.body = transform_body(sr.anchor, frame)
            avatar.input_local = body_to_local(avatar.root, avatar.body, avatar.scale)
            self._prev_flags[avatar.entity_id] = (
                avatar.body.left_grab,
                avatar.body.right_grab,
            )
            if u_cur >= duration - 1e-12:
                self._self_replay = None
        else:
            if input_frame is not None:
                avatar.input_local = clamp_hands_to_reach(
                    input_frame, cfg.max_hand_reach
                )
            avatar.body = body_to_world(avatar.root, avatar.input_local, avatar.scale)
            lg, rg = avatar.body.left_grab, avatar.body.right_grab
            before = len(grabs) + len(releases)
            self._flag_edges(avatar.entity_id, lg, rg, grabs, releases)
            if self.recorder.active and len(grabs) + len(releases) != before:
                for holder, hand, _src in grabs:
                    if holder == avatar.entity_id:
                        self._record_interaction("grab", hand)
                for holder, hand in releases:
                    if holder == avatar.entity_id:
                        self._record_interaction("release", hand)

        self._capture_frame()

        # (3) solve clones; sync grab edges can only appear when the user's
        # flags changed or a clone's channel mapping was reconfigured
        self._solve_sync_clones()
        user_flags = (avatar.body.left_grab, avatar.body.right_grab)
        if self._solve_rows and (
            self._flags_dirty or user_flags != self._prev_user_flags
        ):
            for cid in sorted(self._solve_rows):
                mirrored = self._solve_rows[cid][4]
                lg, rg = (user_flags[1], user_flags[0]) if mirrored else user_flags
                self._flag_edges(cid, lg, rg, grabs, releases)
        self._prev_user_flags = user_flags
        self._flags_dirty = False
        for cid in sorted(self._replayed_ids):
            clone = w.clones[cid]
            mode = clone.mode
            rec = self.recordings.get(mode.recording)
            u_cur = (w.tick - mode.started_at_tick) * dt + mode.phase
            first = w.tick == mode.started_at_tick
            clone.body = transform_body(clone.root, sample_body(rec, u_cur))
            for ev in events_between(rec, u_cur - dt, u_cur, include_start=first):
                if ev.kind == "grab":
                    grabs.append((cid, ev.hand, "replay"))
                elif ev.kind == "release":
                    releases.append((cid, ev.hand))
            self._prev_flags[cid] = clone.flags

        # (4) attachment refresh first (objects track the freshly solved
        # hands), then releases before grabs, then settling; without the
        # up-front refresh a moving handoff would see stale object poses
        # and accumulate one tick of grip lag per hop
        for oid in sorted(w.attachments):
            att = w.attachments[oid]
            interaction.refresh_attachment(
                w, att, self._holder_body(att.holder).hand(att.hand)
            )
        if self.config.ballistic:
            for holder, hand in sorted(releases):
                pos = self._holder_body(holder).hand(hand).position
                prev = self._prev_hands.get((holder, hand), pos)
                vel = (pos - prev) * (1.0 / dt)
                released = interaction.release(w, holder, hand, vel)
                if released is not None:
                    self._settling.add(released)
        else:
            for holder, hand in sorted(releases):
                released = interaction.release(w, holder, hand)
                if released is not None:
                    self._settling.add(released)
        for holder, hand, source in sorted(grabs, key=lambda g: (g[0], g[1])):
            if interaction.held_object(w, holder, hand) is not None:
                continue
            got = interaction.grab(w, holder, hand, self._holder_body(holder).hand(hand))
            if got is None and source == "replay":
                events.append(ReplayGrabMiss(tick=w.tick, holder=holder, hand=hand))
        if self._objects_version_seen != w.object_version:
            self._objects_version_seen = w.object_version
            self._settling.update(
                oid
                for oid, obj in w.objects.items()
                if obj.pose.position.y > 0.0 or obj.velocity != Vec3()
            )
        if self._settling:
            for oid in interaction.settle_free_objects(w, dt, self._settling):
                self._settling.discard(oid)

        # (5) contact rules
        if self.contact_rules:
            velocities = {}
            for oid in sorted(w.objects):
                pos = w.objects[oid].pose.position
                prev = self._prev_obj_pos.get(oid, pos)
                velocities[oid] = (pos - prev) * (1.0 / dt)
            events.extend(
                interaction.process_contacts(w, self.contact_rules, velocities, w.tick)
            )
        if self.contact_rules or self.config.ballistic:
            self._prev_obj_pos = {
                oid: w.objects[oid].pose.position for oid in w.objects
            }
        if self.config.ballistic:
            for att in w.attachments.values():
                body = self._holder_body(att.holder)
                self._prev_hands[(att.holder, att.hand)] = body.hand(att.hand).position
            body = avatar.body
            self._prev_hands[(avatar.entity_id, "left")] = body.left_hand.position
            self._prev_hands[(avatar.entity_id, "right")] = body.right_hand.position

        # (6) advance
        w.tick += 1
        self._pending_events = []
        return events

    # -------------------------------------------------------- persistence ---

    def save_state(self) -> dict:
        w = self.world
        cfg = self.config
        return {
            "version": "cloneworks-world/1",
            "config": {
                "tick_rate": cfg.tick_rate,
                "arm_length": cfg.arm_length,
                "grab_radius": cfg.grab_radius,
                "backward_offset": cfg.backward_offset,
                "snap_search_radius": cfg.snap_search_radius,
                "gravity": cfg.gravity,
                "standing_height": cfg.standing_height,
                "max_hand_reach": cfg.max_hand_reach,
                "ballistic": cfg.ballistic,
                "allow_pose_self_replay": cfg.allow_pose_self_replay,
            },
            "tick": w.tick,
            "next_id": w.next_id,
            "groups_created": self._groups_created,
            "state": w.state_dict(),
            "recordings": [recording_to_dict(r) for r in self.recordings.all()],
        }

    @classmethod
    def load_state(cls, doc: dict, contact_rules=None) -> "Engine":
        from .commands import parse_body, parse_pose, parse_transform

        if doc.get("version") != "cloneworks-world/1":
            raise EngineError("unsupported world document version")
        engine = cls(WorldConfig(**doc["config"]), contact_rules)
        w = engine.world
        state = doc["state"]
        w.tick = doc["tick"]
        w.objects.clear()
        for o in state["objects"]:
            w.objects[o["id"]] = WorldObject(
                id=o["id"],
                tag=o["tag"],
                pose=parse_pose(o["pose"]),
                grabbable=o["grabbable"],
                scalar_state=dict(o["scalar_state"]),
                velocity=Vec3(*o["velocity"]),
            )
        for c in state["clones"]:
            m = c["mode"]
            if m["kind"] == "synchronous":
                mode: CloneMode = Synchronous(
                    user_anchor=parse_transform(m["user_anchor"]),
                    clone_anchor=parse_transform(m["clone_anchor"]),
                )
            elif m["kind"] == "replayed":
                mode = Replayed(
                    recording=m["recording"],
                    phase=m["phase"],
                    started_at_tick=m["started_at_tick"],
                )
            else:
                mode = Static()
            clone = Clone(
                id=c["id"],
                root=parse_transform(c["root"]),
                mode=mode,
                body=parse_body(c["body"]),
                mirror=c["mirror"],
                scale=c["scale"],
            )
            clone.group = c["group"]
            clone.outline_color_index = c["color"]
            w.clones[c["id"]] = clone
            engine._prev_flags[c["id"]] = clone.flags
            engine._rebuild_row(clone)
        for g in state["groups"]:
            w.groups[g["id"]] = set(g["members"])
        for a in state["attachments"]:
            w.attachments[a["object"]] = Attachment(
                object=a["object"],
                holder=a["holder"],
                hand=a["hand"],
                grip=parse_transform(a["grip"]),
            )
        av = state["avatar"]
        w.avatar.root = parse_transform(av["root"])
        w.avatar.body = parse_body(av["body"])
        w.avatar.scale = av["scale"]
        w.avatar.controlled_clone = av["controlled"]
        w.avatar.input_local = body_to_local(w.avatar.root, w.avatar.body, av["scale"])
        w._next_id = doc["next_id"]
        engine._groups_created = doc["groups_created"]
        for rec_data in doc.get("recordings", []):
            rec = recording_from_dict(rec_data)
            engine.recordings._recordings[rec.id] = rec
        engine._prev_flags[w.avatar.entity_id] = (
            w.avatar.body.left_grab,
            w.avatar.body.right_grab,
        )
        return engine
