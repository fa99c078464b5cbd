"""Grab/release resolution, rigid attachment of held objects, free-object
settling, and the pluggable contact rules scenarios use for task effects.

Attachment is kinematic: while held, an object's pose is hand_pose o grip,
refreshed every tick. There are no physics joints.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import HandOccupied
from .geometry import (
    RigidTransform,
    Vec3,
    apply,
    compose,
    inverse,
)
from .world import World, transform_state


@dataclass
class Attachment:
    object: int
    holder: int
    hand: str  # "left" | "right"
    grip: RigidTransform  # object pose relative to the hand, fixed at grab

    def state_dict(self) -> dict:
        return {
            "object": self.object,
            "holder": self.holder,
            "hand": self.hand,
            "grip": transform_state(self.grip),
        }


@dataclass(frozen=True)
class ContactRule:
    name: str
    actor_tag: str
    target_tag: str
    max_distance: float
    min_relative_speed: float = 0.0
    direction: Vec3 | None = None  # project relative velocity onto this axis
    state_key: str = ""
    state_delta: float = 0.0

    def __post_init__(self):
        if self.max_distance <= 0:
            raise ValueError("max_distance must be positive")


@dataclass(frozen=True)
class ContactEvent:
    tick: int
    rule: str
    actor: int
    target: int


def held_object(world: World, holder: int, hand: str) -> int | None:
    for att in world.attachments.values():
        if att.holder == holder and att.hand == hand:
            return att.object
    return None


def grab(world: World, holder: int, hand: str, hand_pose) -> int | None:
    """Attach the nearest grabbable, unheld object within grab_radius of the
    hand. Returns the object id, or None when nothing is in range (a replayed
    grab that misses is skipped, not an error)."""
    if held_object(world, holder, hand) is not None:
        raise HandOccupied(f"holder {holder} {hand} hand already holds an object")
    best: tuple[float, int] | None = None
    for oid in sorted(world.objects):
        if oid in world.attachments:
            continue
        obj = world.objects[oid]
        if not obj.grabbable:
            continue
        d = obj.pose.position.distance_to(hand_pose.position)
        if d > world.config.grab_radius:
            continue
        if best is None or d < best[0]:
            best = (d, oid)
    if best is None:
        return None
    oid = best[1]
    obj = world.objects[oid]
    grip = compose(
        inverse(RigidTransform.from_pose(hand_pose)),
        RigidTransform.from_pose(obj.pose),
    )
    world.attachments[oid] = Attachment(object=oid, holder=holder, hand=hand, grip=grip)
    obj.velocity = Vec3()
    return oid


def release(
    world: World, holder: int, hand: str, velocity: Vec3 | None = None
) -> int | None:
    """Detach the held object, if any. ``velocity`` is the carry velocity for
    ballistic worlds (estimated from hand motion); otherwise the object only
    falls."""
    oid = held_object(world, holder, hand)
    if oid is None:
        return None
    del world.attachments[oid]
    obj = world.objects[oid]
    obj.velocity = velocity if (velocity and world.config.ballistic) else Vec3()
    return oid


def refresh_attachment(world: World, att: Attachment, hand_pose) -> None:
    obj = world.objects[att.object]
    obj.pose = apply(RigidTransform.from_pose(hand_pose), att.grip.as_pose())


def settle_free_objects(world: World, dt: float, ids=None) -> list[int]:
    """Gravity-only integration (semi-implicit), clamped at the ground.
    Horizontal velocity exists only when a ballistic release set it.

    ``ids`` restricts the scan to a candidate set (the engine tracks which
    objects can still be moving); the result lists ids that need no further
    settling (grounded, held, or gone) so callers can prune."""
    g = world.config.gravity
    done: list[int] = []
    for oid in sorted(world.objects) if ids is None else sorted(ids):
        obj = world.objects.get(oid)
        if obj is None:
            done.append(oid)
            continue
        if oid in world.attachments:
            done.append(oid)
            continue
        v = obj.velocity
        p = obj.pose.position
        if p.y <= 0.0 and v.x == 0.0 and v.y == 0.0 and v.z == 0.0:
            done.append(oid)
            continue
        v = Vec3(v.x, v.y - g * dt, v.z)
        p = p + v * dt
        if p.y <= 0.0:
            p = Vec3(p.x, 0.0, p.z)
            v = Vec3()
            done.append(oid)
        obj.velocity = v
        obj.pose = type(obj.pose)(p, obj.pose.orientation)
    return done


def process_contacts(
    world: World,
    rules: list[ContactRule],
    velocities: dict[int, Vec3],
    tick: int,
) -> list[ContactEvent]:
    """Evaluate every rule against (held actor object, target object) pairs.
    At most one event per rule-pair per tick; effects mutate the target's
    scalar state."""
    events: list[ContactEvent] = []
    zero = Vec3()
    for rule in rules:
        actors = [
            oid
            for oid in sorted(world.attachments)
            if world.objects[oid].tag == rule.actor_tag
        ]
        if not actors:
            continue
        targets = [
            oid for oid in sorted(world.objects) if world.objects[oid].tag == rule.target_tag
        ]
        for aid in actors:
            apos = world.objects[aid].pose.position
            avel = velocities.get(aid, zero)
            for tid in targets:
                if tid == aid:
                    continue
                tobj = world.objects[tid]
                if apos.distance_to(tobj.pose.position) > rule.max_distance:
                    continue
                rel = avel - velocities.get(tid, zero)
                speed = rel.dot(rule.direction) if rule.direction else rel.norm()
                if speed < rule.min_relative_speed:
                    continue
                events.append(ContactEvent(tick=tick, rule=rule.name, actor=aid, target=tid))
                if rule.state_key:
                    tobj.scalar_state[rule.state_key] = (
                        tobj.scalar_state.get(rule.state_key, 0.0) + rule.state_delta
                    )
    return events
