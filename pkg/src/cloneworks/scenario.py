"""Declarative scenario scripts: world setup plus a timed command/input
timeline plus assertions, run deterministically and reported as JSON.

Schema version: clonemator-scenario/1. Parsing is strict: unknown fields are
rejected so golden files stay honest. Entity ids are assigned at runtime, so
scripts bind symbolic names ("bind": "peg1") and reference them as "$peg1"
(or "$name[i]" for commands returning several ids). "avatar" and "self" are
reserved references.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass, field

from .commands import dispatch_json, parse_transform
from .engine import Engine
from .errors import EngineError, ParseError, UnresolvedName, ValidationError
from .geometry import (
    Pose,
    RigidTransform,
    Vec3,
    compose,
    inverse,
)
from .interaction import ContactEvent, ContactRule
from .world import BodyFrame, WorldConfig, transform_state

SCHEMA_VERSION = "clonemator-scenario/1"

ASSERTION_KINDS = (
    "pose_equals",
    "relative_transform_equals",
    "scalar_state_at_least",
    "entity_count",
    "hash_equals",
    "event_count_equals",
)

_CONFIG_FIELDS = {
    "tick_rate",
    "arm_length",
    "grab_radius",
    "backward_offset",
    "snap_search_radius",
    "gravity",
    "standing_height",
    "max_hand_reach",
    "ballistic",
    "allow_pose_self_replay",
}


def _require_keys(d: dict, allowed: set[str], path: str) -> None:
    for key in d:
        if key not in allowed:
            raise ParseError(f"unknown field {path}.{key}")


@dataclass
class ObjectSpec:
    tag: str
    pose: dict
    grabbable: bool = False
    scalar_state: dict = field(default_factory=dict)
    bind: str | None = None


@dataclass
class TimedStep:
    tick: int
    command: dict | None = None  # {"op":..., params...}
    input: dict | None = None  # keyframe body
    bind: str | None = None


@dataclass
class AssertionSpec:
    tick: int
    kind: str
    params: dict
    tolerance: float = 1e-6


@dataclass
class ScenarioScript:
    name: str
    ticks: int
    config: dict = field(default_factory=dict)
    avatar: dict | None = None
    objects: list[ObjectSpec] = field(default_factory=list)
    contact_rules: list[dict] = field(default_factory=list)
    timeline: list[TimedStep] = field(default_factory=list)
    assertions: list[AssertionSpec] = field(default_factory=list)


@dataclass
class AssertionResult:
    tick: int
    kind: str
    passed: bool
    expected: object
    measured: object

    def as_dict(self) -> dict:
        return {
            "tick": self.tick,
            "kind": self.kind,
            "pass": self.passed,
            "expected": self.expected,
            "measured": self.measured,
        }


@dataclass
class RunReport:
    scenario: str
    ticks: int
    assertions: list[AssertionResult]
    final_hash: str
    error: dict | None = None
    wall_seconds: float = 0.0  # excluded from the canonical form

    @property
    def passed(self) -> bool:
        return self.error is None and all(a.passed for a in self.assertions)

    def as_dict(self, include_timing: bool = False) -> dict:
        doc = {
            "scenario": self.scenario,
            "ticks": self.ticks,
            "assertions": [a.as_dict() for a in self.assertions],
            "final_hash": self.final_hash,
            "error": self.error,
            "pass": self.passed,
        }
        if include_timing:
            doc["wall_seconds"] = self.wall_seconds
        return doc

    def to_json(self, include_timing: bool = False) -> str:
        return json.dumps(
            self.as_dict(include_timing), sort_keys=True, separators=(",", ":")
        )


# ---------------------------------------------------------------- loading ---


def load_scenario(doc: dict | str) -> ScenarioScript:
    """Parse and validate a scenario document (dict or JSON text)."""
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as err:
            raise ParseError(f"invalid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ParseError("scenario document must be an object")
    _require_keys(
        doc,
        {
            "version",
            "name",
            "ticks",
            "config",
            "avatar",
            "objects",
            "contact_rules",
            "timeline",
            "assertions",
        },
        "scenario",
    )
    if doc.get("version") != SCHEMA_VERSION:
        raise ParseError(f"version must be {SCHEMA_VERSION!r}")
    if "name" not in doc or not isinstance(doc["name"], str):
        raise ParseError("scenario.name must be a string")
    ticks = doc.get("ticks")
    if not isinstance(ticks, int) or ticks < 1:
        raise ValidationError("scenario.ticks must be a positive integer")

    config = doc.get("config", {})
    _require_keys(config, _CONFIG_FIELDS, "config")

    avatar = doc.get("avatar")
    if avatar is not None:
        _require_keys(avatar, {"p", "yaw_deg"}, "avatar")

    objects = []
    for i, o in enumerate(doc.get("objects", [])):
        _require_keys(
            o, {"tag", "p", "yaw_deg", "grabbable", "scalar_state", "bind"}, f"objects[{i}]"
        )
        if not o.get("tag"):
            raise ValidationError(f"objects[{i}].tag must be non-empty")
        objects.append(
            ObjectSpec(
                tag=o["tag"],
                pose={"p": o.get("p", [0, 0, 0]), "yaw_deg": o.get("yaw_deg", 0.0)},
                grabbable=o.get("grabbable", False),
                scalar_state=o.get("scalar_state", {}),
                bind=o.get("bind"),
            )
        )

    rules = []
    for i, r in enumerate(doc.get("contact_rules", [])):
        _require_keys(
            r,
            {
                "name",
                "actor_tag",
                "target_tag",
                "max_distance",
                "min_relative_speed",
                "direction",
                "state_key",
                "state_delta",
            },
            f"contact_rules[{i}]",
        )
        rules.append(r)

    timeline = []
    last_tick = -1
    last_input_tick = -1
    for i, step in enumerate(doc.get("timeline", [])):
        _require_keys(step, {"tick", "command", "input", "bind"}, f"timeline[{i}]")
        tick = step.get("tick")
        if not isinstance(tick, int) or tick < 0:
            raise ValidationError(f"timeline[{i}].tick must be a non-negative integer")
        if tick < last_tick:
            raise ValidationError("timeline must be sorted by tick")
        last_tick = tick
        has_cmd = "command" in step
        has_input = "input" in step
        if has_cmd == has_input:
            raise ParseError(f"timeline[{i}] needs exactly one of command or input")
        if has_input:
            if tick <= last_input_tick and last_input_tick >= 0:
                raise ValidationError("input keyframes must be strictly increasing")
            last_input_tick = tick
            _require_keys(
                step["input"],
                {"head", "left", "right", "lg", "rg"},
                f"timeline[{i}].input",
            )
        if has_cmd and "op" not in step["command"]:
            raise ParseError(f"timeline[{i}].command.op is required")
        timeline.append(
            TimedStep(
                tick=tick,
                command=step.get("command"),
                input=step.get("input"),
                bind=step.get("bind"),
            )
        )

    assertions = []
    for i, a in enumerate(doc.get("assertions", [])):
        _require_keys(a, {"tick", "kind", "tolerance", "args"}, f"assertions[{i}]")
        kind = a.get("kind")
        if kind not in ASSERTION_KINDS:
            raise ParseError(f"assertions[{i}].kind: unknown kind {kind!r}")
        tick = a.get("tick")
        if not isinstance(tick, int) or tick < 0 or tick >= ticks:
            raise ValidationError(f"assertions[{i}].tick outside the run length")
        assertions.append(
            AssertionSpec(
                tick=tick,
                kind=kind,
                params=a.get("args", {}),
                tolerance=a.get("tolerance", 1e-6),
            )
        )

    return ScenarioScript(
        name=doc["name"],
        ticks=ticks,
        config=config,
        avatar=avatar,
        objects=objects,
        contact_rules=rules,
        timeline=timeline,
        assertions=assertions,
    )


def load_scenario_file(path: str) -> ScenarioScript:
    with open(path, "r", encoding="utf-8") as fh:
        return load_scenario(fh.read())


def bundled_scenario_names() -> list[str]:
    from importlib import resources

    names = []
    for entry in resources.files("cloneworks.scenarios").iterdir():
        if entry.name.endswith(".json"):
            names.append(entry.name[: -len(".json")])
    return sorted(names)


def load_bundled_scenario(name: str) -> ScenarioScript:
    from importlib import resources

    ref = resources.files("cloneworks.scenarios") / f"{name}.json"
    if not ref.is_file():
        raise ParseError(f"no bundled scenario {name!r}")
    return load_scenario(ref.read_text(encoding="utf-8"))


# ---------------------------------------------------------------- running ---

_REF_RE = re.compile(r"^\$(?P<name>[A-Za-z_][A-Za-z0-9_]*)(\[(?P<idx>\d+)\])?$")


def _resolve(value, bindings: dict):
    if isinstance(value, str):
        if value in ("self", "avatar"):
            return bindings[value] if value in bindings else value
        m = _REF_RE.match(value)
        if m:
            name = m.group("name")
            if name not in bindings:
                raise UnresolvedName(f"name {name!r} is not bound")
            bound = bindings[name]
            if m.group("idx") is not None:
                idx = int(m.group("idx"))
                if not isinstance(bound, list) or idx >= len(bound):
                    raise UnresolvedName(f"{value}: index out of range")
                return bound[idx]
            return bound
        return value
    if isinstance(value, list):
        return [_resolve(v, bindings) for v in value]
    if isinstance(value, dict):
        return {k: _resolve(v, bindings) for k, v in value.items()}
    return value


def _keyframe_body(step_input: dict) -> BodyFrame:
    from .commands import parse_body

    return parse_body(
        {
            "head": step_input["head"],
            "left": step_input["left"],
            "right": step_input["right"],
            "lg": step_input.get("lg", False),
            "rg": step_input.get("rg", False),
        }
    )


class _InputTrack:
    """Piecewise-linear input between keyframes. Grab flags do not
    interpolate: a keyframe's flags hold from its tick until the next
    keyframe's tick. The pose holds beyond both ends."""

    def __init__(self, steps: list[TimedStep]):
        from .geometry import interp_pose

        self._interp = interp_pose
        self.keys: list[tuple[int, BodyFrame]] = [
            (s.tick, _keyframe_body(s.input)) for s in steps if s.input is not None
        ]

    def body_at(self, tick: int) -> BodyFrame | None:
        keys = self.keys
        if not keys:
            return None
        if tick <= keys[0][0]:
            return keys[0][1]
        for (t0, b0), (t1, b1) in zip(keys, keys[1:]):
            if t0 <= tick < t1:
                u = (tick - t0) / (t1 - t0)
                return BodyFrame(
                    head=self._interp(b0.head, b1.head, u),
                    left_hand=self._interp(b0.left_hand, b1.left_hand, u),
                    right_hand=self._interp(b0.right_hand, b1.right_hand, u),
                    left_grab=b0.left_grab,
                    right_grab=b0.right_grab,
                )
        return keys[-1][1]


def _round6(v: float) -> float:
    return round(v, 6) + 0.0


def _frame_of(engine: Engine, entity) -> RigidTransform:
    w = engine.world
    if entity == w.avatar.entity_id:
        return w.avatar.root
    if entity in w.clones:
        return w.clones[entity].root
    if entity in w.objects:
        return RigidTransform.from_pose(w.objects[entity].pose)
    raise UnresolvedName(f"no entity {entity}")


def _pose_of(engine: Engine, entity, joint: str | None) -> Pose:
    w = engine.world
    if entity == w.avatar.entity_id:
        body = w.avatar.body
        if joint in (None, "root"):
            return w.avatar.root.as_pose()
        return getattr(body, joint)
    if entity in w.clones:
        clone = w.clones[entity]
        if joint in (None, "root"):
            return clone.root.as_pose()
        return getattr(clone.body, joint)
    if entity in w.objects:
        return w.objects[entity].pose
    raise UnresolvedName(f"no entity {entity}")


def check_assertion(
    engine: Engine,
    spec: AssertionSpec,
    bindings: dict,
    event_counts: dict[str, int],
) -> AssertionResult:
    params = _resolve(spec.params, bindings)
    tol = spec.tolerance
    kind = spec.kind
    if kind == "pose_equals":
        got = _pose_of(engine, params["entity"], params.get("joint"))
        want_pos = Vec3(*params["position"])
        dist = got.position.distance_to(want_pos)
        passed = dist <= tol
        expected = [_round6(want_pos.x), _round6(want_pos.y), _round6(want_pos.z)]
        measured = [
            _round6(got.position.x),
            _round6(got.position.y),
            _round6(got.position.z),
        ]
        if "yaw_deg" in params:
            import math

            got_yaw = math.degrees(got.orientation.yaw())
            diff = abs((got_yaw - params["yaw_deg"] + 180.0) % 360.0 - 180.0)
            passed = passed and diff <= max(tol, 1e-6) * 180.0
            measured.append(_round6(got_yaw))
            expected.append(_round6(params["yaw_deg"]))
        return AssertionResult(spec.tick, kind, passed, expected, measured)
    if kind == "relative_transform_equals":
        rel = compose(
            inverse(_frame_of(engine, params["a"])), _frame_of(engine, params["b"])
        )
        want = parse_transform(
            {"p": params["position"], "yaw_deg": params.get("yaw_deg", 0.0)}
        )
        from .geometry import transform_distance

        dist = transform_distance(rel, want)
        return AssertionResult(
            spec.tick,
            kind,
            dist <= tol,
            transform_state(want),
            transform_state(rel),
        )
    if kind == "scalar_state_at_least":
        obj = engine.world.objects.get(params["entity"])
        if obj is None:
            raise UnresolvedName(f"no object {params['entity']}")
        measured = obj.scalar_state.get(params["key"], 0.0)
        return AssertionResult(
            spec.tick,
            kind,
            measured >= params["value"] - 1e-12,
            _round6(params["value"]),
            _round6(measured),
        )
    if kind == "entity_count":
        w = engine.world
        what = params.get("of", "clones")
        if what == "clones":
            measured = len(w.clones)
        elif what == "groups":
            measured = len(w.groups)
        else:
            tag = params.get("tag")
            measured = len(
                [o for o in w.objects.values() if tag is None or o.tag == tag]
            )
        return AssertionResult(
            spec.tick, kind, measured == params["value"], params["value"], measured
        )
    if kind == "hash_equals":
        measured = engine.world.world_hash()
        return AssertionResult(
            spec.tick, kind, measured == params["value"], params["value"], measured
        )
    if kind == "event_count_equals":
        measured = event_counts.get(params["rule"], 0)
        return AssertionResult(
            spec.tick, kind, measured == params["value"], params["value"], measured
        )
    raise ParseError(f"unknown assertion kind {kind!r}")


def build_engine(script: ScenarioScript) -> tuple[Engine, dict]:
    """World construction shared by the runner and the session service."""
    config = WorldConfig(**script.config)
    rules = [
        ContactRule(
            name=r["name"],
            actor_tag=r["actor_tag"],
            target_tag=r["target_tag"],
            max_distance=r["max_distance"],
            min_relative_speed=r.get("min_relative_speed", 0.0),
            direction=Vec3(*r["direction"]) if r.get("direction") else None,
            state_key=r.get("state_key", ""),
            state_delta=r.get("state_delta", 0.0),
        )
        for r in script.contact_rules
    ]
    engine = Engine(config, rules)
    bindings: dict = {"avatar": engine.world.avatar.entity_id}
    if script.avatar:
        engine.teleport(Vec3(*script.avatar.get("p", [0, 0, 0])))
        engine.rotate(script.avatar.get("yaw_deg", 0.0))
    from .commands import parse_pose

    for spec in script.objects:
        oid = engine.world.add_object(
            spec.tag,
            parse_pose(spec.pose),
            grabbable=spec.grabbable,
            scalar_state=spec.scalar_state,
        )
        if spec.bind:
            bindings[spec.bind] = oid
    return engine, bindings


def run_scenario(script: ScenarioScript) -> RunReport:
    """Execute a script tick by tick; deterministic for identical inputs."""
    started = time.perf_counter()
    engine, bindings = build_engine(script)
    track = _InputTrack(script.timeline)
    commands_by_tick: dict[int, list[TimedStep]] = {}
    for step in script.timeline:
        if step.command is not None:
            commands_by_tick.setdefault(step.tick, []).append(step)
    assertions_by_tick: dict[int, list[AssertionSpec]] = {}
    for spec in script.assertions:
        assertions_by_tick.setdefault(spec.tick, []).append(spec)

    event_counts: dict[str, int] = {}
    results: list[AssertionResult] = []
    error: dict | None = None

    for tick in range(script.ticks):
        for step in commands_by_tick.get(tick, []):
            cmd = _resolve(step.command, bindings)
            op = cmd.pop("op")
            bind_name = step.bind

            def on_result(result, err, op=op, tick=tick, bind_name=bind_name):
                nonlocal error
                if err is not None:
                    error = {"tick": tick, "op": op, "code": err.code}
                elif bind_name:
                    bindings[bind_name] = result

            engine.enqueue(op, cmd, on_result)
        frame = track.body_at(tick)
        for ev in engine.tick(frame):
            if isinstance(ev, ContactEvent):
                event_counts[ev.rule] = event_counts.get(ev.rule, 0) + 1
        if error is not None:
            break
        for spec in assertions_by_tick.get(tick, []):
            try:
                results.append(check_assertion(engine, spec, bindings, event_counts))
            except (UnresolvedName, EngineError) as err:
                results.append(
                    AssertionResult(spec.tick, spec.kind, False, None, str(err))
                )

    report = RunReport(
        scenario=script.name,
        ticks=script.ticks,
        assertions=results,
        final_hash=engine.world.world_hash(),
        error=error,
        wall_seconds=time.perf_counter() - started,
    )
    return report
