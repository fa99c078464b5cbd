#!/usr/bin/env python3
"""Capture a genuine full+delta wire stream into the frontend test fixture.

The frontend's wire.test.ts folds these messages through its mirror and must
reconstruct the final snapshot exactly."""

from __future__ import annotations

import json
import math
import os

from cloneworks.engine import Engine
from cloneworks.geometry import Pose, Quat, Vec3
from cloneworks.service import make_state_delta, snapshot_state
from cloneworks.world import BodyFrame

OUT = os.path.join(
    os.path.dirname(__file__), "..", "frontend", "test", "fixtures", "state_stream.json"
)


def body(head=(0, 1.6, 0), left=(-0.3, 1.0, 0.2), right=(0.3, 1.0, 0.2), lg=False, rg=False):
    q = Quat()
    return BodyFrame(
        head=Pose(Vec3(*head), q),
        left_hand=Pose(Vec3(*left), q),
        right_hand=Pose(Vec3(*right), q),
        left_grab=lg,
        right_grab=rg,
    )


def main() -> None:
    e = Engine()
    e.world.add_object("peg", Pose(Vec3(2, 0, 1)), scalar_state={"depth": 0.0})
    e.world.add_object("ball", Pose(Vec3(0.3, 0, 0.4)), grabbable=True)
    messages = []
    last = None
    snap = None

    def publish():
        nonlocal last, snap
        snap = snapshot_state(e)
        messages.append(make_state_delta(last, snap))
        last = snap

    e.tick(body())
    publish()
    e.tick(body(head=(0, 1.0, 0), right=(0.3, 0.2, 0.4), rg=True))  # grab the ball
    assert e.world.attachments, "fixture must include a held object"
    publish()
    e.spawn_direct()  # transfers the ball to the clone, avatar steps back
    cid = e.spawn_indirect(Pose(Vec3(3, 0, 0), Quat.from_yaw(math.pi / 2)), scale=2.0)
    e.set_mirror(cid, True)
    e.tick(body(head=(0, 1.0, 0), right=(0.3, 0.2, 0.4), rg=True))
    publish()
    e.remove_clone(cid)
    e.start_recording()
    e.tick(body())
    publish()
    e.stop_recording()
    e.tick(body())
    publish()
    assert snap["recordings"], "fixture must include a stored recording"

    with open(OUT, "w", encoding="utf-8") as fh:
        json.dump({"messages": messages, "final": snap}, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("wrote", OUT)


if __name__ == "__main__":
    main()
