#!/usr/bin/env python3
"""Generate the bundled scenario files.

The numbers encode hand-derived choreography (grab points, handoff meeting
points, strike windows); rerunning overwrites src/cloneworks/scenarios/.
"""

from __future__ import annotations

import json
import os

OUT = os.path.join(os.path.dirname(__file__), "..", "src", "cloneworks", "scenarios")

V = "clonemator-scenario/1"


def kf(tick, head, left, right, lg=False, rg=False):
    return {
        "tick": tick,
        "input": {
            "head": {"p": list(head)},
            "left": {"p": list(left)},
            "right": {"p": list(right)},
            "lg": lg,
            "rg": rg,
        },
    }


def cmd(tick, op, bind=None, **params):
    step = {"tick": tick, "command": {"op": op, **params}}
    if bind:
        step["bind"] = bind
    return step


def obj(tag, p, yaw=0.0, grabbable=False, state=None, bind=None):
    o = {"tag": tag, "p": list(p), "yaw_deg": yaw, "grabbable": grabbable}
    if state:
        o["scalar_state"] = state
    if bind:
        o["bind"] = bind
    return o


def write(name, doc):
    path = os.path.join(OUT, name + ".json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print("wrote", path)


# ------------------------------------------------------------- hammering ---
# Avatar at (2,0,0.6) facing +z, hammer in the right hand at world (2,1,1).
# Auto-spawn over 4 pegs 2 m apart; 9 swing cycles of 60 ticks; each
# downswing spends exactly 6 ticks within 0.3 m of the peg at 1.7 m/s, so
# every peg takes 54 strikes of 0.004 m = 0.216 m depth, all on equal ticks.
def hammering():
    head = (0.0, 1.1, 0.0)
    left = (-0.3, 0.8, 0.1)
    up = (0.0, 1.0, 0.4)
    down = (0.0, 0.15, 0.4)
    timeline = [
        kf(0, head, left, up, rg=True),
        cmd(2, "spawn_auto", selected="$peg0", bind="clones"),
        kf(10, head, left, up, rg=True),
    ]
    for c in range(9):
        timeline.append(kf(40 + 60 * c, head, left, down, rg=True))
        timeline.append(kf(70 + 60 * c, head, left, up, rg=True))
    timeline.sort(key=lambda s: s["tick"])
    assertions = [
        {
            "tick": 545,
            "kind": "scalar_state_at_least",
            "args": {"entity": f"$peg{i}", "key": "depth", "value": 0.2},
        }
        for i in range(4)
    ] + [
        {
            "tick": 545,
            "kind": "event_count_equals",
            "args": {"rule": "strike", "value": 216},
        },
        {"tick": 545, "kind": "entity_count", "args": {"of": "clones", "value": 3}},
    ]
    write(
        "hammering",
        {
            "version": V,
            "name": "hammering",
            "ticks": 560,
            "avatar": {"p": [2, 0, 0.6], "yaw_deg": 0},
            "objects": [
                obj("hammer", (2, 1.0, 1.0), grabbable=True),
                obj("peg", (2, 0, 1), state={"depth": 0.0}, bind="peg0"),
                obj("peg", (4, 0, 1), state={"depth": 0.0}, bind="peg1"),
                obj("peg", (6, 0, 1), state={"depth": 0.0}, bind="peg2"),
                obj("peg", (8, 0, 1), state={"depth": 0.0}, bind="peg3"),
            ],
            "contact_rules": [
                {
                    "name": "strike",
                    "actor_tag": "hammer",
                    "target_tag": "peg",
                    "max_distance": 0.3,
                    "min_relative_speed": 1.0,
                    "direction": [0, -1, 0],
                    "state_key": "depth",
                    "state_delta": 0.004,
                }
            ],
            "timeline": timeline,
            "assertions": assertions,
        },
    )


# ---------------------------------------------------------- mirrored net ---
# Relative spawn puts the clone at the far handle with the user's offset;
# mirroring makes backward pulls spread the net and sideways steps move both
# bodies the same world direction (they face each other).
def mirrored_net():
    head = (0.0, 1.0, 0.0)
    rest_l, rest_r = (-0.3, 0.2, 0.4), (0.3, 0.2, 0.4)
    pull_l, pull_r = (-0.3, 0.2, 0.2), (0.3, 0.2, 0.2)
    side_l, side_r = (-0.1, 0.2, 0.2), (0.5, 0.2, 0.2)
    write(
        "mirrored_net",
        {
            "version": V,
            "name": "mirrored_net",
            "ticks": 50,
            "objects": [
                obj("handle", (0.3, 0, 0.4), grabbable=True, bind="near"),
                obj("handle", (0.3, 0, 4.4), yaw=180.0, grabbable=True, bind="far"),
            ],
            "timeline": [
                kf(0, head, rest_l, rest_r),
                cmd(2, "spawn_relative", reference="$near", target="$far", bind="clone"),
                kf(10, head, rest_l, rest_r, lg=True, rg=True),
                cmd(20, "set_mirror", clone="$clone", on=True),
                kf(20, head, rest_l, rest_r, lg=True, rg=True),
                kf(30, head, pull_l, pull_r, lg=True, rg=True),
                kf(40, head, side_l, side_r, lg=True, rg=True),
            ],
            "assertions": [
                {
                    "tick": 5,
                    "kind": "relative_transform_equals",
                    "args": {"a": "$far", "b": "$clone", "position": [-0.3, 0, -0.4]},
                },
                {
                    "tick": 30,
                    "kind": "pose_equals",
                    "args": {"entity": "$near", "position": [0.3, 0, 0.2]},
                },
                {
                    "tick": 30,
                    "kind": "pose_equals",
                    "args": {"entity": "$far", "position": [0.3, 0, 4.6]},
                },
                {
                    "tick": 40,
                    "kind": "pose_equals",
                    "args": {"entity": "$near", "position": [0.5, 0, 0.2]},
                },
                {
                    "tick": 40,
                    "kind": "pose_equals",
                    "args": {"entity": "$far", "position": [0.5, 0, 4.6]},
                },
                {"tick": 45, "kind": "entity_count", "args": {"of": "clones", "value": 1}},
            ],
        },
    )


# ------------------------------------------------------------- step stool ---
# Crouch, clone in place, step onto its head, reach the 2.5 m shelf.
def step_stool():
    crouch = (0.0, 1.0, 0.0)
    stand = (0.0, 1.6, 0.0)
    rest_l = (-0.3, 0.8, 0.1)
    write(
        "step_stool",
        {
            "version": V,
            "name": "step_stool",
            "ticks": 50,
            "config": {"gravity": 1e-9},
            "objects": [obj("beef", (0.3, 2.5, 0.4), grabbable=True, bind="beef")],
            "timeline": [
                kf(0, crouch, rest_l, (0.3, 0.8, 0.1)),
                cmd(5, "spawn_direct", bind="stool"),
                cmd(10, "step_onto", target="$stool"),
                kf(15, crouch, rest_l, (0.3, 0.8, 0.1)),
                kf(20, stand, rest_l, (0.3, 1.5, 0.4)),
                kf(30, stand, rest_l, (0.3, 1.5, 0.4), rg=True),
                kf(40, stand, rest_l, (0.3, 1.0, 0.4), rg=True),
            ],
            "assertions": [
                {
                    "tick": 20,
                    "kind": "pose_equals",
                    "args": {"entity": "avatar", "joint": "root", "position": [0, 1.0, 0]},
                },
                {
                    "tick": 25,
                    "kind": "pose_equals",
                    "args": {"entity": "$beef", "position": [0.3, 2.5, 0.4]},
                },
                {
                    "tick": 40,
                    "kind": "pose_equals",
                    "args": {"entity": "$beef", "position": [0.3, 2.0, 0.4]},
                },
                {"tick": 45, "kind": "entity_count", "args": {"of": "clones", "value": 1}},
            ],
        },
    )


# --------------------------------------------------------- fanning + beef ---
# Indirect spawn at the campfire, switch over to pick up the fan, switch
# back for the knife, set the remote body synchronous, then one waving
# motion cuts and fans at once.
def fanning_cutting():
    head = (0.0, 1.0, 0.0)
    rest_l = (-0.3, 0.6, 0.1)
    lo = (0.3, 0.2, 0.4)
    hi = (0.3, 0.8, 0.4)
    timeline = [
        kf(0, head, rest_l, lo),
        cmd(2, "spawn_indirect", target={"p": [5, 0, 0]}, bind="firebody"),
        cmd(4, "switch_control", target="$firebody", bind="tablebody"),
        kf(10, head, rest_l, lo, rg=True),
        cmd(20, "switch_control", target="$tablebody", bind="firebody2"),
        cmd(30, "set_mode", clone="$firebody2", kind="synchronous"),
        kf(35, head, rest_l, lo, rg=True),
    ]
    for c in range(6):
        timeline.append(kf(40 + 30 * c, head, rest_l, hi, rg=True))
        timeline.append(kf(55 + 30 * c, head, rest_l, lo, rg=True))
    timeline.sort(key=lambda s: s["tick"])
    write(
        "fanning_cutting",
        {
            "version": V,
            "name": "fanning_cutting",
            "ticks": 240,
            "objects": [
                obj("knife", (0.3, 0, 0.4), grabbable=True, bind="knife"),
                obj("beef_slab", (0.3, 0, 0.6), state={"cuts": 0.0}, bind="slab"),
                obj("fan", (5.3, 0, 0.4), grabbable=True, bind="fan"),
                obj("campfire", (5.3, 0, 0.6), state={"fanned": 0.0}, bind="fire"),
            ],
            "contact_rules": [
                {
                    "name": "cut",
                    "actor_tag": "knife",
                    "target_tag": "beef_slab",
                    "max_distance": 0.35,
                    "min_relative_speed": 0.8,
                    "direction": [0, -1, 0],
                    "state_key": "cuts",
                    "state_delta": 1.0,
                },
                {
                    "name": "fanning",
                    "actor_tag": "fan",
                    "target_tag": "campfire",
                    "max_distance": 0.6,
                    "min_relative_speed": 0.8,
                    "state_key": "fanned",
                    "state_delta": 1.0,
                },
            ],
            "timeline": timeline,
            "assertions": [
                {
                    "tick": 230,
                    "kind": "scalar_state_at_least",
                    "args": {"entity": "$slab", "key": "cuts", "value": 12},
                },
                {
                    "tick": 230,
                    "kind": "scalar_state_at_least",
                    "args": {"entity": "$fire", "key": "fanned", "value": 30},
                },
                {"tick": 230, "kind": "entity_count", "args": {"of": "clones", "value": 1}},
            ],
        },
    )


# ---------------------------------------------------------------- stirring ---
# Record one stirring lap (grab ladle, square path around the pot, release
# at the start point), hand the loop to a clone standing where the user
# stood, and watch the pot's stir counter climb loop after loop.
def stir_pot():
    head = (0.0, 1.0, 0.0)
    rest_l = (-0.3, 0.6, 0.1)
    p0 = (0.3, 0.2, 0.4)
    p1 = (0.5, 0.2, 0.6)
    p2 = (0.3, 0.2, 0.8)
    p3 = (0.1, 0.2, 0.6)
    timeline = [
        kf(0, head, rest_l, p0),
        cmd(2, "start_recording"),
        kf(5, head, rest_l, p0, rg=True),
        kf(10, head, rest_l, p0, rg=True),
        kf(25, head, rest_l, p1, rg=True),
        kf(40, head, rest_l, p2, rg=True),
        kf(55, head, rest_l, p3, rg=True),
        kf(70, head, rest_l, p0, rg=True),
        kf(72, head, rest_l, p0),
        cmd(78, "stop_recording", bind="rec"),
        cmd(80, "teleport", to=[-3, 0, 0]),
        cmd(82, "spawn_indirect", target={"p": [0, 0, 0]}, bind="stirrer"),
        cmd(84, "apply_recording", recording="$rec", target="$stirrer"),
    ]
    # one loop is 76 ticks (frames 2..77, duration 75/60 s)
    assertions = [
        {
            "tick": 84 + 76 * (k + 1),
            "kind": "scalar_state_at_least",
            "args": {"entity": "$pot", "key": "stirred", "value": 60.0 + 50.0 * k},
        }
        for k in range(5)
    ] + [
        {"tick": 550, "kind": "entity_count", "args": {"of": "clones", "value": 1}},
    ]
    write(
        "stir_pot",
        {
            "version": V,
            "name": "stir_pot",
            "ticks": 560,
            "objects": [
                obj("ladle", (0.3, 0, 0.4), grabbable=True, bind="ladle"),
                obj("pot", (0.3, 0, 0.6), state={"stirred": 0.0}, bind="pot"),
            ],
            "contact_rules": [
                {
                    "name": "stir",
                    "actor_tag": "ladle",
                    "target_tag": "pot",
                    "max_distance": 0.45,
                    "min_relative_speed": 0.5,
                    "state_key": "stirred",
                    "state_delta": 1.0,
                }
            ],
            "timeline": timeline,
            "assertions": assertions,
        },
    )


# ------------------------------------------------------------ phase dance ---
# One recorded 2 s arm loop drives a grouped row of four clones with 0.5 s
# delays: the Thousand-Hand effect, checked at frozen sample points.
def phase_dance():
    head = (0.0, 1.6, 0.0)
    rest_l = (-0.3, 1.0, 0.1)
    w0 = (0.3, 1.0, 0.2)
    w1 = (0.3, 1.3, 0.2)
    w2 = (0.0, 1.3, 0.2)
    w3 = (0.0, 1.0, 0.2)
    timeline = [
        kf(0, head, rest_l, w0),
        cmd(2, "start_recording"),
        kf(2, head, rest_l, w0),
        kf(32, head, rest_l, w1),
        kf(62, head, rest_l, w2),
        kf(92, head, rest_l, w3),
        kf(122, head, rest_l, w0),
        cmd(123, "stop_recording", bind="rec"),
        cmd(130, "spawn_indirect", target={"p": [2, 0, 0]}, bind="c1"),
        cmd(132, "spawn_indirect", target={"p": [3, 0, 0]}, bind="c2"),
        cmd(134, "spawn_indirect", target={"p": [4, 0, 0]}, bind="c3"),
        cmd(136, "spawn_indirect", target={"p": [5, 0, 0]}, bind="c4"),
        cmd(138, "set_group", members=["$c1", "$c2", "$c3", "$c4"], bind="grp"),
        cmd(140, "apply_recording", recording="$rec", target="$grp", delta=0.5),
        cmd(270, "move", target="$c1", new_root={"p": [2, 0, 3]}),
    ]
    assertions = [
        # at t = 2.0 s into the replay the delays place the hands at
        # recording times 0.0, 0.5, 1.0, 1.5 respectively
        {
            "tick": 260,
            "kind": "pose_equals",
            "args": {"entity": "$c1", "joint": "right_hand", "position": [2.3, 1.0, 0.2]},
        },
        {
            "tick": 260,
            "kind": "pose_equals",
            "args": {"entity": "$c2", "joint": "right_hand", "position": [3.0, 1.0, 0.2]},
        },
        {
            "tick": 260,
            "kind": "pose_equals",
            "args": {"entity": "$c3", "joint": "right_hand", "position": [4.0, 1.3, 0.2]},
        },
        {
            "tick": 260,
            "kind": "pose_equals",
            "args": {"entity": "$c4", "joint": "right_hand", "position": [5.3, 1.3, 0.2]},
        },
        {
            "tick": 275,
            "kind": "relative_transform_equals",
            "args": {"a": "$c1", "b": "$c2", "position": [1, 0, 0]},
        },
        # the group move re-anchors the loops without interrupting them:
        # at t = 3 s clone 2's delay of 0.5 s lands on recording time 0.5
        {
            "tick": 320,
            "kind": "pose_equals",
            "args": {"entity": "$c2", "joint": "right_hand", "position": [3.3, 1.3, 3.2]},
        },
    ]
    write(
        "phase_dance",
        {
            "version": V,
            "name": "phase_dance",
            "ticks": 340,
            "timeline": timeline,
            "assertions": assertions,
        },
    )


# --------------------------------------------------------- bucket brigade ---
# Four stacked synchronous clones, 2 and 4 mirrored; both user hands loop
# between (0,0.2,0.4) and (0,1.2,0.4) in antiphase, so each released bucket
# is caught the same tick one level up. Bucket b0 reaches the top clone at
# t = 2.0 s after the choreography starts.
def bucket_brigade():
    head = (0.0, 1.0, 0.0)
    lo = (0.0, 0.2, 0.4)
    hi = (0.0, 1.2, 0.4)
    timeline = [kf(0, head, hi, lo)]
    for i, tick in enumerate([2, 4, 6, 8]):
        timeline.append(cmd(tick, "spawn_direct", bind=f"c{i + 1}"))
    timeline.append(cmd(10, "teleport", to=[0, 0, 0]))
    for i in range(4):
        timeline.append(
            cmd(12 + 2 * i, "move", target=f"$c{i + 1}", new_root={"p": [0, i + 1, 0]})
        )
    for i in range(4):
        timeline.append(cmd(20 + 2 * i, "set_mode", clone=f"$c{i + 1}", kind="synchronous"))
    timeline.append(cmd(28, "set_mirror", clone="$c2", on=True))
    timeline.append(cmd(30, "set_mirror", clone="$c4", on=True))
    # antiphase hand loops from tick 40, half period 30 ticks
    for half in range(7):
        t = 40 + 30 * half
        if half % 2 == 0:
            timeline.append(kf(t, head, hi, lo, lg=False, rg=True))
        else:
            timeline.append(kf(t, head, lo, hi, lg=True, rg=False))
    timeline.sort(key=lambda s: (s["tick"], "input" in s))
    write(
        "bucket_brigade",
        {
            "version": V,
            "name": "bucket_brigade",
            "ticks": 200,
            "objects": [
                obj("bucket", (0, 0, 0.4), grabbable=True, bind="b0"),
                obj("bucket", (0, 0, 0.4), grabbable=True, bind="b1"),
                obj("bucket", (0, 0, 0.4), grabbable=True, bind="b2"),
            ],
            "timeline": timeline,
            "assertions": [
                # t = 2.25 s: the top (mirrored) clone carries b0 upward
                {
                    "tick": 175,
                    "kind": "pose_equals",
                    "args": {"entity": "$b0", "position": [0, 4.5, 0.4]},
                },
                {"tick": 175, "kind": "entity_count", "args": {"of": "clones", "value": 4}},
            ],
        },
    )


# ------------------------------------------------------------- 9 m passing ---
# Horizontal pipeline of eight plain synchronous clones spaced one meter
# apart; both hands shuttle between G0 and G1 = G0 + (1,0,0) in antiphase.
# Each ball advances one station per half second and lands 9 m downrange.
def ball_pass():
    head = (0.0, 1.0, 0.0)
    g0 = (-0.3, 0.2, 0.4)
    g1 = (0.7, 0.2, 0.4)
    timeline = [kf(0, head, g1, g0)]
    for i in range(8):
        timeline.append(cmd(2 + 2 * i, "spawn_direct", bind=f"c{i + 1}"))
    timeline.append(cmd(18, "teleport", to=[0, 0, 0]))
    for i in range(8):
        timeline.append(
            cmd(20 + 2 * i, "move", target=f"$c{i + 1}", new_root={"p": [i + 1, 0, 0]})
        )
    for i in range(8):
        timeline.append(cmd(36 + 2 * i, "set_mode", clone=f"$c{i + 1}", kind="synchronous"))
    for half in range(12):
        t = 60 + 30 * half
        if half % 2 == 0:
            timeline.append(kf(t, head, g1, g0, lg=False, rg=True))
        else:
            timeline.append(kf(t, head, g0, g1, lg=True, rg=False))
    timeline.sort(key=lambda s: (s["tick"], "input" in s))
    assertions = [
        {
            "tick": 400,
            "kind": "pose_equals",
            "args": {"entity": f"$ball{i}", "position": [8.7, 0, 0.4]},
        }
        for i in range(3)
    ] + [
        {"tick": 400, "kind": "entity_count", "args": {"of": "clones", "value": 8}},
    ]
    write(
        "ball_pass",
        {
            "version": V,
            "name": "ball_pass",
            "ticks": 410,
            "objects": [
                obj("ball", (-0.3, 0, 0.4), grabbable=True, bind="ball0"),
                obj("ball", (-0.3, 0, 0.4), grabbable=True, bind="ball1"),
                obj("ball", (-0.3, 0, 0.4), grabbable=True, bind="ball2"),
            ],
            "timeline": timeline,
            "assertions": assertions,
        },
    )


# ------------------------------------------------------------ apple fetch ---
# Relative spawn against a 1 m gas cylinder floats a clone next to the apple
# 7.5 m up; switch in, pick it, switch back, remove the sky body and the
# apple lands in front of the user.
def apple_fetch():
    head = (0.0, 1.6, 0.0)
    rest_l = (-0.3, 1.0, 0.1)
    reach = (0.4, 1.0, 0.0)
    write(
        "apple_fetch",
        {
            "version": V,
            "name": "apple_fetch",
            "ticks": 40,
            "config": {"gravity": 1e-9},
            "avatar": {"p": [0.6, 0, 0], "yaw_deg": 0},
            "objects": [
                obj("cylinder", (1, 1.0, 0), bind="cyl"),
                obj("apple", (4, 7.5, 2), grabbable=True, bind="apple"),
            ],
            "timeline": [
                kf(0, head, rest_l, reach),
                cmd(2, "spawn_relative", reference="$cyl", target="$apple", bind="sky"),
                cmd(4, "switch_control", target="$sky", bind="ground"),
                kf(10, head, rest_l, reach, rg=True),
                cmd(20, "switch_control", target="$ground", bind="sky2"),
                cmd(25, "remove_clone", target="$sky2"),
            ],
            "assertions": [
                {
                    "tick": 3,
                    "kind": "relative_transform_equals",
                    "args": {"a": "$apple", "b": "$sky", "position": [-0.4, -1.0, 0]},
                },
                {
                    "tick": 15,
                    "kind": "pose_equals",
                    "args": {"entity": "$apple", "position": [4, 7.5, 2]},
                },
                {
                    "tick": 30,
                    "kind": "pose_equals",
                    "args": {"entity": "$apple", "position": [0.6, 1.0, 0.5]},
                },
                {"tick": 35, "kind": "entity_count", "args": {"of": "clones", "value": 0}},
            ],
        },
    )


# ---------------------------------------------------------- auto teleport ---
# Record the spawn/switch/remove sequence as an extended automator, then
# trigger it somewhere else: the avatar hops its own recorded offset.
def auto_teleport():
    head = (0.0, 1.6, 0.0)
    rest_l = (-0.3, 1.0, 0.1)
    rest_r = (0.3, 1.0, 0.1)
    write(
        "auto_teleport",
        {
            "version": V,
            "name": "auto_teleport",
            "ticks": 80,
            "timeline": [
                kf(0, head, rest_l, rest_r),
                cmd(2, "start_recording", scope="extended"),
                cmd(6, "spawn_indirect", target={"p": [0, 0, 2]}, bind="hop"),
                cmd(10, "switch_control", target="$hop", bind="former"),
                cmd(14, "rotate", yaw_delta_deg=180.0),
                cmd(18, "remove_clone", target="$former"),
                cmd(22, "rotate", yaw_delta_deg=-180.0),
                cmd(26, "stop_recording", bind="rec"),
                cmd(30, "teleport", to=[5, 0, 5]),
                cmd(32, "rotate", yaw_delta_deg=90.0),
                cmd(36, "apply_recording", recording="$rec", target="self"),
            ],
            "assertions": [
                {
                    "tick": 28,
                    "kind": "pose_equals",
                    "args": {
                        "entity": "avatar",
                        "joint": "root",
                        "position": [0, 0, 2],
                        "yaw_deg": 0.0,
                    },
                },
                {"tick": 28, "kind": "entity_count", "args": {"of": "clones", "value": 0}},
                {
                    "tick": 70,
                    "kind": "pose_equals",
                    "args": {
                        "entity": "avatar",
                        "joint": "root",
                        "position": [7, 0, 5],
                        "yaw_deg": 90.0,
                    },
                },
                {"tick": 70, "kind": "entity_count", "args": {"of": "clones", "value": 0}},
            ],
        },
    )


if __name__ == "__main__":
    os.makedirs(OUT, exist_ok=True)
    hammering()
    mirrored_net()
    step_stool()
    fanning_cutting()
    stir_pot()
    phase_dance()
    bucket_brigade()
    ball_pass()
    apple_fetch()
    auto_teleport()
