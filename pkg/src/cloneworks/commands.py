"""Command dispatch and JSON codecs.

Every engine operation is reachable by name through one table, shared by the
scenario runner, the session protocol, and replayed automator commands. The
JSON forms here are the wire forms of clonemator-proto/1 payloads and the
storage forms of recorded commands.
"""

from __future__ import annotations

import math

from .errors import EngineError, UnknownEntity
from .geometry import Pose, Quat, RigidTransform, Vec3, apply, apply_point, compose
from .world import BodyFrame

# Command types of the session protocol. The continuous input stream is a
# separate message kind, not a palette command.
COMMAND_TYPES = [
    "spawn_direct",
    "spawn_indirect",
    "spawn_auto",
    "spawn_relative",
    "set_mode",
    "set_mirror",
    "set_scale",
    "switch_control",
    "set_group",
    "move",
    "duplicate",
    "remove_clone",
    "undo",
    "teleport",
    "rotate",
    "step_onto",
    "start_recording",
    "stop_recording",
    "apply_recording",
    "list_recordings",
]


# -------------------------------------------------------------- decoding ---


def parse_vec(v) -> Vec3:
    if not (isinstance(v, (list, tuple)) and len(v) == 3):
        raise EngineError(f"expected [x, y, z], got {v!r}")
    return Vec3(float(v[0]), float(v[1]), float(v[2]))


def parse_quat(q) -> Quat:
    if not (isinstance(q, (list, tuple)) and len(q) == 4):
        raise EngineError(f"expected [w, x, y, z], got {q!r}")
    return Quat(float(q[0]), float(q[1]), float(q[2]), float(q[3])).normalized()


def _parse_placed(d: dict) -> tuple[Vec3, Quat]:
    pos = parse_vec(d.get("p", [0, 0, 0]))
    if "yaw_deg" in d:
        rot = Quat.from_yaw(math.radians(float(d["yaw_deg"])))
    elif "q" in d:
        rot = parse_quat(d["q"])
    else:
        rot = Quat()
    return pos, rot


def parse_pose(d: dict) -> Pose:
    pos, rot = _parse_placed(d)
    return Pose(pos, rot)


def parse_transform(d: dict) -> RigidTransform:
    pos, rot = _parse_placed(d)
    return RigidTransform(pos, rot)


def parse_body(d: dict) -> BodyFrame:
    return BodyFrame(
        head=parse_pose(d["head"]),
        left_hand=parse_pose(d["left"]),
        right_hand=parse_pose(d["right"]),
        left_grab=bool(d.get("lg", False)),
        right_grab=bool(d.get("rg", False)),
    )


# Field decoders per op for JSON payloads; everything else passes through.
_JSON_FIELDS: dict[str, dict[str, str]] = {
    "spawn_indirect": {"target": "pose"},
    "move": {"new_root": "transform"},
    "duplicate": {"placement": "transform"},
    "teleport": {"to": "vec"},
}

_PARSERS = {"pose": parse_pose, "transform": parse_transform, "vec": parse_vec}


def dispatch(engine, op: str, kwargs: dict):
    """Invoke an engine operation by name with typed arguments."""
    if op not in COMMAND_TYPES:
        raise EngineError(f"unknown command {op!r}")
    return getattr(engine, op)(**kwargs)


def dispatch_json(engine, op: str, params: dict):
    """Invoke an operation with a JSON payload; returns a JSON-able result."""
    if op not in COMMAND_TYPES:
        raise EngineError(f"unknown command {op!r}")
    kwargs = dict(params)
    for field, kind in _JSON_FIELDS.get(op, {}).items():
        if field in kwargs:
            kwargs[field] = _PARSERS[kind](kwargs[field])
    result = dispatch(engine, op, kwargs)
    if op == "list_recordings":
        return [list(entry) for entry in result]
    return result


# ----------------------------------------------- recorded command replay ---


def _resolve_ref(value, results: dict[int, list[int]]):
    if isinstance(value, dict) and "$cmd" in value:
        ids = results.get(value["$cmd"], [])
        idx = value.get("i", 0)
        if idx >= len(ids):
            raise UnknownEntity("recorded command reference did not bind")
        return ids[idx]
    return value

_REF_FIELDS: dict[str, list[str]] = {
    "spawn_auto": ["selected"],
    "spawn_relative": ["reference", "target"],
    "set_mode": ["clone"],
    "set_mirror": ["clone"],
    "set_scale": ["clone"],
    "switch_control": ["target"],
    "move": ["target"],
    "duplicate": ["target"],
    "remove_clone": ["target"],
    "step_onto": ["target"],
}


def decode_recorded_args(engine, op: str, args: dict, results: dict) -> dict:
    """Rebuild typed kwargs for a recorded command: placeholder entity refs
    bind to this pass's created entities and spatial arguments re-express
    relative to the avatar's current root."""
    root = engine.world.avatar.root
    kwargs = dict(args)
    for field in _REF_FIELDS.get(op, []):
        if field in kwargs:
            kwargs[field] = _resolve_ref(kwargs[field], results)
    if op == "set_group":
        kwargs["members"] = [_resolve_ref(m, results) for m in kwargs["members"]]
    if op == "apply_recording" and kwargs.get("target") != "self":
        kwargs["target"] = _resolve_ref(kwargs["target"], results)
    if op == "spawn_indirect" and "target" in kwargs:
        kwargs["target"] = apply(root, parse_pose(kwargs["target"]))
    if op == "teleport":
        kwargs["to"] = apply_point(root, parse_vec(kwargs["to"]))
    if op == "move" and "new_root" in kwargs:
        kwargs["new_root"] = compose(root, parse_transform(kwargs["new_root"]))
    if op == "duplicate" and "placement" in kwargs:
        from .geometry import inverse

        local = parse_transform(kwargs["placement"])
        kwargs["placement"] = compose(compose(root, local), inverse(root))
    return kwargs
