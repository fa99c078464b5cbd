"""Recording store and sampling.

A recording is an immutable, anchor-relative stream of body frames captured
once per tick, plus timestamped events (grabs, releases, and optionally the
commands executed while recording). Frames are stored relative to the avatar
root at recording start, so a motion recorded in one place replays with the
identical local trajectory wherever it is re-anchored.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import EmptyRecording, UnknownRecording
from .geometry import Pose, Quat, RigidTransform, Vec3, interp_pose
from .world import BodyFrame

SCOPE_POSES = "poses_and_grabs"
SCOPE_EXTENDED = "extended"


@dataclass(frozen=True)
class RecordedFrame:
    t: float  # seconds since recording start, exact multiple of the tick period
    body: BodyFrame  # anchor-relative


@dataclass(frozen=True)
class RecordedEvent:
    t: float
    kind: str  # "grab" | "release" | "command"
    hand: str | None = None
    command: dict | None = None  # op + args; spatial args avatar-root-relative


@dataclass(frozen=True)
class Recording:
    id: int
    frames: tuple[RecordedFrame, ...]
    events: tuple[RecordedEvent, ...]
    scope: str

    @property
    def duration(self) -> float:
        return self.frames[-1].t

    @property
    def frame_count(self) -> int:
        return len(self.frames)


@dataclass
class RecorderState:
    """At most one active recording per session."""

    active: bool = False
    scope: str = SCOPE_POSES
    anchor: RigidTransform = RigidTransform()
    frames: list[RecordedFrame] = field(default_factory=list)
    events: list[RecordedEvent] = field(default_factory=list)
    created_ids: list[int] = field(default_factory=list)  # results of recorded commands


class RecordingStore:
    """Append-only store of immutable recordings."""

    def __init__(self):
        self._recordings: dict[int, Recording] = {}

    def add(self, rec_id: int, state: RecorderState) -> Recording:
        if not state.frames:
            raise EmptyRecording("recording captured no frames")
        rec = Recording(
            id=rec_id,
            frames=tuple(state.frames),
            events=tuple(state.events),
            scope=state.scope,
        )
        self._recordings[rec_id] = rec
        return rec

    def get(self, rec_id: int) -> Recording:
        try:
            return self._recordings[rec_id]
        except KeyError:
            raise UnknownRecording(f"no recording {rec_id}") from None

    def __contains__(self, rec_id: int) -> bool:
        return rec_id in self._recordings

    def list_recordings(self) -> list[tuple[int, float, str, int]]:
        return [
            (rid, rec.duration, rec.scope, rec.frame_count)
            for rid, rec in sorted(self._recordings.items())
        ]

    def all(self) -> list[Recording]:
        return [self._recordings[rid] for rid in sorted(self._recordings)]


def wrap_time(local_t: float, duration: float) -> float:
    if duration <= 0.0:
        return 0.0
    return local_t % duration


def sample_body(rec: Recording, local_t: float) -> BodyFrame:
    """Interpolated anchor-relative body at wrapped time local_t mod duration.

    Positions interpolate linearly, orientations along the shortest arc, so
    replay is independent of the consumer's tick rate. Grab flags come from
    the frame at or before the sample point (events, not flags, drive actual
    grabs during replay).
    """
    frames = rec.frames
    if len(frames) == 1 or rec.duration <= 0.0:
        return frames[0].body
    tau = wrap_time(local_t, rec.duration)
    spacing = frames[1].t - frames[0].t
    i = int(math.floor(tau / spacing + 1e-9))
    i = max(0, min(i, len(frames) - 2))
    a, b = frames[i], frames[i + 1]
    u = (tau - a.t) / (b.t - a.t)
    u = max(0.0, min(1.0, u))
    if u == 0.0:
        return a.body
    return BodyFrame(
        head=interp_pose(a.body.head, b.body.head, u),
        left_hand=interp_pose(a.body.left_hand, b.body.left_hand, u),
        right_hand=interp_pose(a.body.right_hand, b.body.right_hand, u),
        left_grab=a.body.left_grab,
        right_grab=a.body.right_grab,
    )


def events_between(
    rec: Recording, u_prev: float, u_cur: float, include_start: bool = False
) -> list[RecordedEvent]:
    """Events whose looped occurrence times fall in (u_prev, u_cur] of the
    unwrapped replay clock; with include_start the left endpoint counts too
    (used at the tick a replay begins). Each event fires exactly once per
    traversal of its timestamp."""
    out: list[tuple[float, int, RecordedEvent]] = []
    duration = rec.duration
    for idx, ev in enumerate(rec.events):
        if duration <= 0.0:
            if include_start and u_prev <= 0.0 <= u_cur and ev.t == 0.0:
                out.append((0.0, idx, ev))
            continue
        # occurrences at ev.t + k * duration, k >= 0
        k0 = math.floor((u_prev - ev.t) / duration)
        for k in range(max(0, int(k0)), int(math.floor((u_cur - ev.t) / duration)) + 2):
            occ = ev.t + k * duration
            if occ > u_cur + 1e-12:
                break
            hit = occ > u_prev + 1e-12 or (
                include_start and abs(occ - u_prev) <= 1e-12
            )
            if hit and occ <= u_cur + 1e-12:
                out.append((occ, idx, ev))
    out.sort(key=lambda item: (item[0], item[1]))
    return [ev for _, _, ev in out]


# ------------------------------------------------------------ JSON form ---


def _pose_to_list(p: Pose) -> list[float]:
    q = p.orientation.canonical()
    return [
        round(p.position.x, 6),
        round(p.position.y, 6),
        round(p.position.z, 6),
        round(q.w, 6),
        round(q.x, 6),
        round(q.y, 6),
        round(q.z, 6),
    ]


def _pose_from_list(v: list[float]) -> Pose:
    return Pose(Vec3(v[0], v[1], v[2]), Quat(v[3], v[4], v[5], v[6]).normalized())


def recording_to_dict(rec: Recording) -> dict:
    return {
        "id": rec.id,
        "scope": rec.scope,
        "frames": [
            {
                "t": f.t,
                "head": _pose_to_list(f.body.head),
                "left": _pose_to_list(f.body.left_hand),
                "right": _pose_to_list(f.body.right_hand),
                "lg": f.body.left_grab,
                "rg": f.body.right_grab,
            }
            for f in rec.frames
        ],
        "events": [
            {
                "t": e.t,
                "kind": e.kind,
                **({"hand": e.hand} if e.hand else {}),
                **({"command": e.command} if e.command else {}),
            }
            for e in rec.events
        ],
    }


def recording_from_dict(data: dict) -> Recording:
    frames = tuple(
        RecordedFrame(
            t=f["t"],
            body=BodyFrame(
                head=_pose_from_list(f["head"]),
                left_hand=_pose_from_list(f["left"]),
                right_hand=_pose_from_list(f["right"]),
                left_grab=f["lg"],
                right_grab=f["rg"],
            ),
        )
        for f in data["frames"]
    )
    events = tuple(
        RecordedEvent(
            t=e["t"],
            kind=e["kind"],
            hand=e.get("hand"),
            command=e.get("command"),
        )
        for e in data["events"]
    )
    if not frames:
        raise EmptyRecording("serialized recording has no frames")
    return Recording(id=data["id"], frames=frames, events=events, scope=data["scope"])
