"""Session protocol tests: handshake, controller policy, command round trips
with acks, input streaming, and full+delta state reconstruction within wire
quantization."""

from __future__ import annotations

import asyncio
import json
import socket

import pytest
import websockets

from cloneworks.commands import COMMAND_TYPES
from cloneworks.engine import Engine
from cloneworks.geometry import Pose, Vec3
from cloneworks.service import (
    PROTOCOL,
    SessionServer,
    apply_state_message,
    make_state_delta,
    snapshot_state,
)
from cloneworks.world import WorldConfig

from conftest import body, pose


@pytest.fixture()
def server():
    engine = Engine(WorldConfig(tick_rate=120.0))  # faster ticks, faster tests
    engine.world.add_object("peg", pose(2, 0, 1))
    engine.world.add_object("peg", pose(4, 0, 1))
    engine.world.add_object("anchor", pose(1, 0, 0))
    engine.world.add_object("target", pose(5, 0, 5, yaw_deg=90))
    srv = SessionServer(engine=engine, snapshot_hz=30.0)
    srv.start()
    yield srv
    srv.stop()


class Client:
    """Minimal scripted protocol client keeping a state mirror."""

    def __init__(self, ws):
        self.ws = ws
        self.seq = 0
        self.mirror = None
        self.events = []

    async def hello(self, role="controller"):
        await self.ws.send(json.dumps({"v": PROTOCOL, "type": "hello", "role": role}))
        while True:
            msg = json.loads(await asyncio.wait_for(self.ws.recv(), 5))
            if msg["type"] == "welcome":
                return msg["role"]
            self._fold(msg)

    def _fold(self, msg):
        if msg["type"] == "state":
            self.mirror = apply_state_message(self.mirror, msg)
        elif msg["type"] == "event":
            self.events.append(msg["event"])

    async def pump_until(self, predicate, timeout=5.0):
        async def _pump():
            while not predicate(self):
                self._fold(json.loads(await self.ws.recv()))

        await asyncio.wait_for(_pump(), timeout)

    async def command(self, op, **params):
        self.seq += 1
        seq = self.seq
        await self.ws.send(
            json.dumps(
                {"v": PROTOCOL, "type": "command", "seq": seq, "payload": {"op": op, **params}}
            )
        )
        result = {}

        def got_ack(client):
            for ev in client.events:
                if ev["kind"] in ("ack", "error") and ev.get("seq") == seq:
                    result.update(ev)
                    return True
            return False

        await self.pump_until(got_ack)
        if result["kind"] == "error":
            raise AssertionError(f"command {op} rejected: {result}")
        return result.get("result")

    async def send_input(self, frame_dict):
        self.seq += 1
        await self.ws.send(
            json.dumps({"v": PROTOCOL, "type": "input", "seq": self.seq, "body": frame_dict})
        )

    async def resync_snapshot(self):
        await self.ws.send(json.dumps({"v": PROTOCOL, "type": "resync"}))
        got = {}

        def got_full(client):
            return client.mirror is not None and got.setdefault("done", True)

        # resync replies with a full state message; fold messages until then
        while True:
            msg = json.loads(await asyncio.wait_for(self.ws.recv(), 5))
            if msg["type"] == "state" and msg["mode"] == "full":
                self.mirror = apply_state_message(self.mirror, msg)
                return {
                    k: self.mirror[k]
                    for k in ("tick", "avatar", "clones", "objects", "groups", "recorder", "recordings")
                }
            self._fold(msg)


def body_json(**kw):
    frame = body(**kw)
    def p(pose_):
        v = pose_.position
        return {"p": [v.x, v.y, v.z]}
    return {
        "head": p(frame.head),
        "left": p(frame.left_hand),
        "right": p(frame.right_hand),
        "lg": frame.left_grab,
        "rg": frame.right_grab,
    }


def test_delta_codec_roundtrip_without_network():
    e = Engine()
    e.world.add_object("box", pose(1, 0, 0))
    e.tick(body())
    snap0 = snapshot_state(e)
    full = make_state_delta(None, snap0)
    mirror = apply_state_message(None, full)
    e.spawn_direct()
    e.tick(body(right=(0.4, 1.1, 0.2)))
    snap1 = snapshot_state(e)
    delta = make_state_delta(snap0, snap1)
    assert delta["mode"] == "delta"
    mirror = apply_state_message(mirror, delta)
    assert mirror == {k: snap1[k] for k in mirror}


def test_empty_delta_is_heartbeat():
    e = Engine()
    snap = snapshot_state(e)
    delta = make_state_delta(snap, snap)
    assert set(delta.keys()) == {"v", "type", "mode", "tick"}


def test_protocol_round_trip_and_reconstruction(server):
    async def run():
        async with websockets.connect(server.url) as ws:
            client = Client(ws)
            role = await client.hello("controller")
            assert role == "controller"
            await client.pump_until(lambda c: c.mirror is not None)
            assert client.mirror["tick"] >= 0

            # all four spawn methods over the wire
            objects = {o["tag"]: o["id"] for o in client.mirror["objects"].values()}
            c1 = await client.command("spawn_direct")
            c2 = await client.command(
                "spawn_indirect", target={"p": [3, 0, 0], "yaw_deg": 180}
            )
            auto = await client.command("spawn_auto", selected=objects["peg"])
            assert len(auto) == 1
            c4 = await client.command(
                "spawn_relative", reference=objects["anchor"], target=objects["target"]
            )
            assert len({c1, c2, auto[0], c4}) == 4

            # stream input, record, and apply the recording to a clone
            await client.command("start_recording")
            for i in range(30):
                await client.send_input(body_json(right=(0.3 + 0.003 * i, 1.0, 0.2)))
                await asyncio.sleep(0.005)
            rid = await client.command("stop_recording")
            listing = await client.command("list_recordings")
            assert [entry[0] for entry in listing] == [rid]
            await client.command("apply_recording", recording=rid, target=c2)

            # the mirror reconstructed from full + deltas must equal a fresh
            # full snapshot exactly (both already wire-quantized)
            fresh = await client.resync_snapshot()
            mirror = {k: client.mirror[k] for k in fresh}
            assert mirror == fresh
            assert str(c2) in fresh["clones"]
            assert fresh["clones"][str(c2)]["mode"] == "replayed"

    asyncio.run(run())


def test_second_controller_rejected_and_observer_read_only(server):
    async def run():
        async with websockets.connect(server.url) as first:
            c1 = Client(first)
            assert await c1.hello("controller") == "controller"
            async with websockets.connect(server.url) as second:
                c2 = Client(second)
                role = await c2.hello("controller")
                assert role == "observer"
                assert any(ev["code"] == "ControllerTaken" for ev in c2.events)
                # observers cannot issue commands
                c2.seq += 1
                await second.send(
                    json.dumps(
                        {
                            "v": PROTOCOL,
                            "type": "command",
                            "seq": c2.seq,
                            "payload": {"op": "spawn_direct"},
                        }
                    )
                )
                await c2.pump_until(
                    lambda c: any(ev["kind"] == "error" and ev["code"] == "NotController" for ev in c.events)
                )

    asyncio.run(run())


def test_out_of_order_seq_rejected(server):
    async def run():
        async with websockets.connect(server.url) as ws:
            client = Client(ws)
            await client.hello("controller")
            await ws.send(
                json.dumps(
                    {"v": PROTOCOL, "type": "command", "seq": 5, "payload": {"op": "spawn_direct"}}
                )
            )
            await client.pump_until(
                lambda c: any(ev.get("seq") == 5 and ev["kind"] == "ack" for ev in c.events)
            )
            await ws.send(
                json.dumps(
                    {"v": PROTOCOL, "type": "command", "seq": 4, "payload": {"op": "spawn_direct"}}
                )
            )
            await client.pump_until(
                lambda c: any(
                    ev["kind"] == "error" and ev["code"] == "OutOfOrderSeq" for ev in c.events
                )
            )

    asyncio.run(run())


def test_malformed_payload_leaves_engine_unchanged(server):
    async def run():
        async with websockets.connect(server.url) as ws:
            client = Client(ws)
            await client.hello("controller")
            await client.pump_until(lambda c: c.mirror is not None)
            clones_before = dict(client.mirror["clones"])
            await ws.send(json.dumps({"v": PROTOCOL, "type": "command", "seq": 1, "payload": {"op": "no_such_op"}}))
            await client.pump_until(
                lambda c: any(ev["kind"] == "error" and ev["code"] == "MalformedPayload" for ev in c.events)
            )
            fresh = await client.resync_snapshot()
            assert fresh["clones"] == clones_before

    asyncio.run(run())


def test_engine_error_reported_with_seq(server):
    async def run():
        async with websockets.connect(server.url) as ws:
            client = Client(ws)
            await client.hello("controller")
            client.seq += 1
            await ws.send(
                json.dumps(
                    {"v": PROTOCOL, "type": "command", "seq": client.seq, "payload": {"op": "undo"}}
                )
            )
            await client.pump_until(
                lambda c: any(
                    ev["kind"] == "error" and ev["code"] == "EmptyUndoStack" and ev["seq"] == 1
                    for ev in c.events
                )
            )

    asyncio.run(run())


def test_port_in_use():
    sock = socket.socket()
    sock.bind(("127.0.0.1", 0))
    port = sock.getsockname()[1]
    try:
        from cloneworks.errors import EngineError

        srv = SessionServer(port=port)
        with pytest.raises(EngineError, match="PortInUse"):
            srv.start()
    finally:
        sock.close()


def test_scene_load_error():
    from cloneworks.errors import SceneLoadError

    with pytest.raises(SceneLoadError):
        SessionServer(scene="/nonexistent/scene.json")


def test_schema_file_matches_command_table():
    import json as _json
    import os

    path = os.path.join(os.path.dirname(__file__), "..", "schemas", "clonemator-proto-1.json")
    with open(path) as fh:
        schema = _json.load(fh)
    assert schema["commands"] == COMMAND_TYPES
    assert schema["version"] == PROTOCOL
