"""Live session service: exposes one engine over a WebSocket JSON protocol
(clonemator-proto/1) so interactive clients can stream avatar input, issue
commands, and mirror state from full snapshots plus deltas.

Threading: the engine ticks at a fixed rate on its own thread; the network
side runs an asyncio loop on another. They share exactly two channels, an
inbound command/input queue and an outbound published-snapshot slot.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
import time
from dataclasses import dataclass, field

from .commands import COMMAND_TYPES, parse_body
from .engine import (
    Engine,
    RecordingStarted,
    RecordingStopped,
    ReplayCommandSkipped,
    ReplayGrabMiss,
    SwitchTransition,
    Synchronous,
    Replayed,
)
from .errors import EngineError, SceneLoadError
from .interaction import ContactEvent
from .world import WorldConfig

PROTOCOL = "clonemator-proto/1"
WIRE_DECIMALS = 4


def _q(v: float) -> float:
    return round(v, WIRE_DECIMALS) + 0.0


def _qvec(v) -> list[float]:
    return [_q(v.x), _q(v.y), _q(v.z)]


def _qquat(q) -> list[float]:
    q = q.canonical()
    return [_q(q.w), _q(q.x), _q(q.y), _q(q.z)]


def _qpose(p) -> dict:
    return {"p": _qvec(p.position), "q": _qquat(p.orientation)}


def _qxf(t) -> dict:
    return {"p": _qvec(t.translation), "q": _qquat(t.rotation)}


def _qbody(b) -> dict:
    return {
        "head": _qpose(b.head),
        "left": _qpose(b.left_hand),
        "right": _qpose(b.right_hand),
        "lg": b.left_grab,
        "rg": b.right_grab,
    }


def snapshot_state(engine: Engine) -> dict:
    """Full wire-quantized view of the world for clients."""
    w = engine.world
    clones = {}
    for cid in sorted(w.clones):
        c = w.clones[cid]
        mode = c.mode
        clones[str(cid)] = {
            "id": cid,
            "root": _qxf(c.root),
            "body": _qbody(c.body),
            "mode": mode.kind,
            "recording": mode.recording if isinstance(mode, Replayed) else None,
            "mirror": c.mirror,
            "scale": _q(c.scale),
            "group": c.group,
            "color": c.outline_color_index,
        }
    objects = {}
    for oid in sorted(w.objects):
        o = w.objects[oid]
        objects[str(oid)] = {
            "id": oid,
            "tag": o.tag,
            "pose": _qpose(o.pose),
            "grabbable": o.grabbable,
            "scalar_state": {k: _q(v) for k, v in sorted(o.scalar_state.items())},
            "held_by": w.attachments[oid].holder if oid in w.attachments else None,
        }
    return {
        "tick": w.tick,
        "avatar": {
            "id": w.avatar.entity_id,
            "root": _qxf(w.avatar.root),
            "body": _qbody(w.avatar.body),
            "scale": _q(w.avatar.scale),
            "controlled": w.avatar.controlled_clone,
        },
        "clones": clones,
        "objects": objects,
        "groups": {str(g): sorted(m) for g, m in sorted(w.groups.items())},
        "recorder": {"active": engine.recorder.active, "scope": engine.recorder.scope},
        "recordings": [list(r) for r in engine.list_recordings()],
    }


def make_state_delta(last_sent: dict | None, current: dict) -> dict:
    """Minimal message bringing a client from last_sent to current. A client
    without a snapshot gets a full message."""
    if last_sent is None:
        return {"v": PROTOCOL, "type": "state", "mode": "full", **current}
    delta: dict = {"v": PROTOCOL, "type": "state", "mode": "delta", "tick": current["tick"]}
    for scalar_key in ("avatar", "groups", "recorder", "recordings"):
        if current[scalar_key] != last_sent[scalar_key]:
            delta[scalar_key] = current[scalar_key]
    for table in ("clones", "objects"):
        changed = {
            key: entry
            for key, entry in current[table].items()
            if last_sent[table].get(key) != entry
        }
        removed = [key for key in last_sent[table] if key not in current[table]]
        if changed:
            delta.setdefault("changed", {})[table] = changed
        if removed:
            delta.setdefault("removed", {})[table] = removed
    return delta


def apply_state_message(mirror: dict | None, message: dict) -> dict:
    """Client-side reconstruction: fold a state message into a mirror dict.
    The result of folding full + all deltas equals the server snapshot."""
    if message["mode"] == "full":
        return {
            key: message[key]
            for key in (
                "tick",
                "avatar",
                "clones",
                "objects",
                "groups",
                "recorder",
                "recordings",
            )
        }
    if mirror is None:
        raise ValueError("delta received before any full snapshot")
    mirror = json.loads(json.dumps(mirror))  # defensive copy
    mirror["tick"] = message["tick"]
    for scalar_key in ("avatar", "groups", "recorder", "recordings"):
        if scalar_key in message:
            mirror[scalar_key] = message[scalar_key]
    for table, entries in message.get("changed", {}).items():
        mirror[table].update(entries)
    for table, keys in message.get("removed", {}).items():
        for key in keys:
            mirror[table].pop(key, None)
    return mirror


def encode_event(ev) -> dict | None:
    if isinstance(ev, ContactEvent):
        return {
            "kind": "contact",
            "tick": ev.tick,
            "rule": ev.rule,
            "actor": ev.actor,
            "target": ev.target,
        }
    if isinstance(ev, SwitchTransition):
        return {
            "kind": "switch_transition",
            "tick": ev.tick,
            "from": _qpose(ev.from_pose),
            "to": _qpose(ev.to_pose),
            "duration": ev.duration,
        }
    if isinstance(ev, RecordingStarted):
        return {"kind": "recording_started", "tick": ev.tick, "scope": ev.scope}
    if isinstance(ev, RecordingStopped):
        return {"kind": "recording_stopped", "tick": ev.tick, "recording": ev.recording}
    if isinstance(ev, ReplayGrabMiss):
        return {"kind": "replay_grab_miss", "tick": ev.tick, "holder": ev.holder, "hand": ev.hand}
    if isinstance(ev, ReplayCommandSkipped):
        return {"kind": "replay_command_skipped", "tick": ev.tick, "op": ev.op, "reason": ev.reason}
    return None


@dataclass
class _Published:
    """One engine-thread publication: snapshot plus events since the last."""

    seqno: int
    snapshot: dict
    events: list[dict] = field(default_factory=list)


class SessionServer:
    """Ticks an engine in real time and serves clonemator-proto/1."""

    def __init__(
        self,
        engine: Engine | None = None,
        scene: str | None = None,
        host: str = "127.0.0.1",
        port: int = 0,
        tick_rate: float | None = None,
        snapshot_hz: float = 20.0,
    ):
        if engine is None:
            if scene is not None:
                from .scenario import build_engine, load_scenario_file

                try:
                    script = load_scenario_file(scene)
                    engine, _ = build_engine(script)
                except (OSError, EngineError) as err:
                    raise SceneLoadError(f"cannot load scene {scene}: {err}") from None
            else:
                config = WorldConfig()
                if tick_rate:
                    config.tick_rate = tick_rate
                engine = Engine(config)
        self.engine = engine
        self.host = host
        self.port = port
        self.snapshot_hz = snapshot_hz
        self._inbound: queue.Queue = queue.Queue()
        self._published: _Published | None = None
        self._history: list[_Published] = []  # recent bundles, capped
        self._published_lock = threading.Lock()
        self._publish_waiters: list[asyncio.Event] = []
        self._stop = threading.Event()
        self._engine_thread: threading.Thread | None = None
        self._net_thread: threading.Thread | None = None
        self._loop: asyncio.AbstractEventLoop | None = None
        self._server = None
        self._controller: object | None = None
        self._latest_input = None
        self._input_lock = threading.Lock()

    # ------------------------------------------------------ engine thread ---

    def _engine_loop(self) -> None:
        engine = self.engine
        dt = engine.config.dt
        per_snapshot = max(1, round(engine.config.tick_rate / self.snapshot_hz))
        pending: list[dict] = []
        seqno = 0
        next_time = time.perf_counter()
        while not self._stop.is_set():
            while True:
                try:
                    item = self._inbound.get_nowait()
                except queue.Empty:
                    break
                kind = item[0]
                if kind == "command":
                    _, conn, seq, op, params = item

                    def on_result(result, err, conn=conn, seq=seq):
                        if err is not None:
                            pending.append(
                                {
                                    "kind": "error",
                                    "seq": seq,
                                    "code": err.code,
                                    "detail": err.detail,
                                    "_conn": conn,
                                }
                            )
                        else:
                            pending.append(
                                {"kind": "ack", "seq": seq, "result": result, "_conn": conn}
                            )

                    engine.enqueue(op, params, on_result)
                elif kind == "input":
                    with self._input_lock:
                        self._latest_input = item[1]
            with self._input_lock:
                frame = self._latest_input
                self._latest_input = None  # hold-last handled by the engine
            try:
                events = engine.tick(frame)
            except EngineError as err:
                pending.append({"kind": "error", "seq": None, "code": err.code, "detail": err.detail})
                events = []
            for ev in events:
                encoded = encode_event(ev)
                if encoded:
                    pending.append(encoded)
            if engine.world.tick % per_snapshot == 0 or pending:
                seqno += 1
                bundle = _Published(seqno, snapshot_state(engine), pending)
                pending = []
                with self._published_lock:
                    self._published = bundle
                    self._history.append(bundle)
                    del self._history[:-256]
                if self._loop is not None:
                    self._loop.call_soon_threadsafe(self._wake_waiters)
            next_time += dt
            delay = next_time - time.perf_counter()
            if delay > 0:
                time.sleep(delay)
            else:
                next_time = time.perf_counter()

    def _wake_waiters(self) -> None:
        for event in self._publish_waiters:
            event.set()

    # --------------------------------------------------------- network side ---

    async def _handler(self, ws) -> None:
        conn_state = {
            "role": "observer",
            "seq": 0,
            "last_sent": None,
            "sent_upto": 0,
        }
        wake = asyncio.Event()
        self._publish_waiters.append(wake)
        sender = asyncio.create_task(self._sender(ws, conn_state, wake))
        try:
            async for raw in ws:
                await self._on_message(ws, conn_state, raw)
        except Exception:
            pass
        finally:
            sender.cancel()
            if wake in self._publish_waiters:
                self._publish_waiters.remove(wake)
            if self._controller is ws:
                self._controller = None

    async def _send_error(self, ws, seq, code, detail="") -> None:
        await ws.send(
            json.dumps(
                {
                    "v": PROTOCOL,
                    "type": "event",
                    "event": {"kind": "error", "seq": seq, "code": code, "detail": detail},
                }
            )
        )

    async def _on_message(self, ws, conn_state, raw) -> None:
        try:
            msg = json.loads(raw)
        except json.JSONDecodeError:
            await self._send_error(ws, None, "MalformedPayload", "invalid JSON")
            return
        mtype = msg.get("type")
        if mtype == "hello":
            if msg.get("role") == "controller":
                if self._controller is None or self._controller is ws:
                    self._controller = ws
                    conn_state["role"] = "controller"
                else:
                    await self._send_error(ws, None, "ControllerTaken")
            await ws.send(json.dumps({"v": PROTOCOL, "type": "welcome", "role": conn_state["role"]}))
            return
        if mtype == "resync":
            with self._published_lock:
                bundle = self._published
            if bundle:
                full = make_state_delta(None, bundle.snapshot)
                conn_state["last_sent"] = bundle.snapshot
                conn_state["sent_upto"] = bundle.seqno
                await ws.send(json.dumps(full))
            return
        seq = msg.get("seq")
        if not isinstance(seq, int) or seq <= conn_state["seq"]:
            await self._send_error(ws, seq, "OutOfOrderSeq", f"last seq {conn_state['seq']}")
            return
        conn_state["seq"] = seq
        if conn_state["role"] != "controller":
            await self._send_error(ws, seq, "NotController")
            return
        if mtype == "input":
            try:
                frame = parse_body(msg["body"])
            except (KeyError, TypeError, EngineError):
                await self._send_error(ws, seq, "MalformedPayload", "bad input frame")
                return
            self._inbound.put(("input", frame))
            return
        if mtype == "command":
            payload = msg.get("payload")
            if not isinstance(payload, dict) or "op" not in payload:
                await self._send_error(ws, seq, "MalformedPayload", "payload needs op")
                return
            params = dict(payload)
            op = params.pop("op")
            if op not in COMMAND_TYPES:
                await self._send_error(ws, seq, "MalformedPayload", f"unknown op {op}")
                return
            self._inbound.put(("command", ws, seq, op, params))
            return
        await self._send_error(ws, seq, "MalformedPayload", f"unknown type {mtype}")

    async def _sender(self, ws, conn_state, wake: asyncio.Event) -> None:
        while True:
            await wake.wait()
            wake.clear()
            with self._published_lock:
                fresh = [b for b in self._history if b.seqno > conn_state["sent_upto"]]
            if not fresh:
                continue
            conn_state["sent_upto"] = fresh[-1].seqno
            for bundle in fresh:
                for event in bundle.events:
                    target = event.get("_conn")
                    if target is not None and target is not ws:
                        continue  # acks and errors go only to their origin
                    payload = {k: v for k, v in event.items() if k != "_conn"}
                    await ws.send(
                        json.dumps({"v": PROTOCOL, "type": "event", "event": payload})
                    )
            message = make_state_delta(conn_state["last_sent"], fresh[-1].snapshot)
            conn_state["last_sent"] = fresh[-1].snapshot
            await ws.send(json.dumps(message))

    # ------------------------------------------------------------ lifecycle ---

    def start(self) -> None:
        import websockets.asyncio.server as ws_server

        self._loop = asyncio.new_event_loop()
        started = threading.Event()
        boot_error: list[BaseException] = []

        async def boot():
            try:
                self._server = await ws_server.serve(self._handler, self.host, self.port)
                self.port = self._server.sockets[0].getsockname()[1]
            except BaseException as err:  # surfaces PortInUse to start()
                boot_error.append(err)
            finally:
                started.set()

        def run_loop():
            asyncio.set_event_loop(self._loop)
            self._loop.create_task(boot())
            self._loop.run_forever()

        self._net_thread = threading.Thread(target=run_loop, daemon=True)
        self._net_thread.start()
        started.wait(timeout=10)
        if boot_error:
            self._loop.call_soon_threadsafe(self._loop.stop)
            err = boot_error[0]
            if isinstance(err, OSError):
                raise EngineError(f"PortInUse: {err}")
            raise err
        self._engine_thread = threading.Thread(target=self._engine_loop, daemon=True)
        self._engine_thread.start()

    def stop(self) -> None:
        self._stop.set()
        if self._engine_thread:
            self._engine_thread.join(timeout=5)

        async def shutdown():
            if self._server is not None:
                self._server.close()
                await self._server.wait_closed()

        if self._loop is not None:
            fut = asyncio.run_coroutine_threadsafe(shutdown(), self._loop)
            try:
                fut.result(timeout=5)
            except Exception:
                pass
            self._loop.call_soon_threadsafe(self._loop.stop)
        if self._net_thread:
            self._net_thread.join(timeout=5)

    @property
    def url(self) -> str:
        return f"ws://{self.host}:{self.port}"


def serve(port: int, scene: str | None = None, tick_rate: float | None = None) -> None:
    """Blocking entry point used by the CLI."""
    server = SessionServer(scene=scene, port=port, tick_rate=tick_rate)
    server.start()
    print(f"serving {PROTOCOL} on {server.url} (ctrl-c to stop)")
    try:
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        server.stop()
