"""Live interaction service: the tick loop paced in real time behind a
WebSocket endpoint, plus an offline-drivable session engine.

One asyncio task owns the session; connection handlers only enqueue
commands (drained at tick boundaries) and receive broadcast snapshots, so
transport adds nothing to the simulation: a LiveSession driven with the same
gesture timeline as a compiled scenario produces the identical event log.

Wire protocol (line-delimited JSON text messages, schema version 1):
  client -> server:
    {"v":1,"type":"perform","id":"<id>","kind":"<gesture_name>"}
    {"v":1,"type":"set_config","id":"<id>","key":"<name>","value":<value>}
    {"v":1,"type":"reset","id":"<id>"}
  server -> client:
    {"v":1,"type":"ack","id":"<id>"}
    {"v":1,"type":"error","id":"<id-or-null>","message":"<text>"}
    {"v":1,"type":"snapshot", ...}  (see docs/snapshot.schema.json)
"""

from __future__ import annotations

import asyncio
import json
from collections import deque
from pathlib import Path

import numpy as np
import websockets
from websockets.asyncio.server import serve as ws_serve
from websockets.datastructures import Headers
from websockets.http11 import Response

from hri_sim.gestures import (
    ACTIVITY_KINDS,
    BASE_POSE,
    DEFAULT_DURATIONS,
    GestureKind,
    pose_sequence,
)
from hri_sim.loop import Event, InteractionState, LoopConfig, tick
from hri_sim.recognizer import LstmNetwork
from hri_sim.skeleton import SkeletonFrame

PROTOCOL_VERSION = 1
SNAPSHOT_EVERY_TICKS = 3  # 10 Hz at the 30 Hz tick rate
RECENT_EVENTS = 50
MAX_QUEUED_POSES = 30 * 60  # one simulated minute of backlog

SET_CONFIG_KEYS = ("auto_resume_suspended", "recognition_latency_ticks")


class LiveSession:
    """InteractionState plus a live frame source: queued gesture poses with
    hold-last-pose fill, exactly like scenario compilation."""

    def __init__(self, net: LstmNetwork | None, config: LoopConfig | None = None,
                 recognize=None):
        self.net = net
        self.config = config or LoopConfig()
        self.recognize = recognize
        self.state = InteractionState(net, self.config, recognize=recognize)
        self.pending_poses: deque[np.ndarray] = deque()
        self.fill_pose: np.ndarray = BASE_POSE

    def perform(self, kind: GestureKind) -> int:
        """Queue a gesture for playback; returns the number of queued frames."""
        num = round(DEFAULT_DURATIONS[kind] * self.config.frame_rate)
        if len(self.pending_poses) + num > MAX_QUEUED_POSES:
            raise OverflowError("gesture queue is full")
        seq = pose_sequence(kind, num, self.config.frame_rate)
        self.pending_poses.extend(seq)
        return num

    def set_config(self, key: str, value) -> None:
        if key == "auto_resume_suspended":
            if not isinstance(value, bool):
                raise ValueError("auto_resume_suspended expects a boolean")
            self.state.executor.auto_resume_suspended = value
        elif key == "recognition_latency_ticks":
            if not isinstance(value, int) or value < 0:
                raise ValueError("recognition_latency_ticks expects an int >= 0")
            self.state.config.recognition_latency_ticks = value
        else:
            raise ValueError(f"unknown config key {key!r}")

    def reset(self) -> None:
        self.state = InteractionState(self.net, self.config, recognize=self.recognize)
        self.pending_poses.clear()
        self.fill_pose = BASE_POSE

    def step(self) -> list[Event]:
        if self.pending_poses:
            pose = self.pending_poses.popleft()
            self.fill_pose = pose
        else:
            pose = self.fill_pose
        frame = SkeletonFrame(joints=np.asarray(pose),
                              timestamp=self.state.tick_index / self.config.frame_rate)
        return tick(self.state, frame)

    def snapshot(self) -> dict:
        st = self.state
        ex = st.executor
        executor = {
            "mode": ex.mode.value,
            "response": ex.task.response.value if ex.task else None,
            "progress": ex.progress if ex.task else None,
            "suspended": (
                {"response": ex.suspended_slot.response.value,
                 "progress": ex.suspended_slot.progress}
                if ex.suspended_slot else None
            ),
        }
        intent = st.last_intent
        recent = [
            {"i": len(st.events) - len(st.events[-RECENT_EVENTS:]) + k,
             "t": e.time, "kind": e.kind, "detail": e.detail}
            for k, e in enumerate(st.events[-RECENT_EVENTS:])
        ]
        intent_view = None
        if intent is not None:
            intent_view = {
                "class": intent.class_index,
                "name": ACTIVITY_KINDS[intent.class_index].value,
                "confidence": intent.confidence,
                "probs": st.last_probs,
            }
        return {
            "v": PROTOCOL_VERSION,
            "type": "snapshot",
            "tick": st.tick_index,
            "time": st.time,
            "switch": {"stage": st.switch.stage.value, "flag": st.switch.flag},
            "recording": {
                "active": st.collector.active,
                "frames": len(st.collector.buffer),
                "target": st.collector.target_frames,
                "fill": st.collector.fill,
            },
            "intent": intent_view,
            "executor": executor,
            "pose": {"x": ex.pose.x, "y": ex.pose.y, "heading": ex.pose.heading},
            "events": {"total": len(st.events), "recent": recent},
        }


def _error(message: str, msg_id=None) -> dict:
    return {"v": PROTOCOL_VERSION, "type": "error", "id": msg_id, "message": message}


def parse_command(raw: str) -> dict:
    """Validate one client message; raises ValueError with a reason."""
    try:
        msg = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ValueError(f"not valid JSON: {exc}") from exc
    if not isinstance(msg, dict):
        raise ValueError("expected a JSON object")
    if msg.get("v") != PROTOCOL_VERSION:
        raise ValueError(f"unsupported protocol version {msg.get('v')!r}")
    mtype = msg.get("type")
    if mtype not in ("perform", "set_config", "reset"):
        raise ValueError(f"unknown message type {mtype!r}")
    if not isinstance(msg.get("id"), str) or not msg["id"]:
        raise ValueError("missing command id")
    if mtype == "perform":
        kind = msg.get("kind")
        kinds = {k.value: k for k in GestureKind}
        if kind not in kinds:
            raise ValueError(f"unknown gesture {kind!r}")
        msg["kind"] = kinds[kind]
    elif mtype == "set_config":
        if msg.get("key") not in SET_CONFIG_KEYS:
            raise ValueError(f"unknown config key {msg.get('key')!r}")
        if "value" not in msg:
            raise ValueError("set_config needs a value")
    return msg


_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".map": "application/json",
    ".json": "application/json",
}


def _static_responder(static_dir: Path | None):
    def process_request(connection, request):
        if request.headers.get("Upgrade", "").lower() == "websocket":
            return None  # continue the WS handshake
        if static_dir is None:
            return connection.respond(404, "no static assets configured\n")
        name = request.path.split("?", 1)[0].lstrip("/") or "index.html"
        target = (static_dir / name).resolve()
        if not str(target).startswith(str(static_dir.resolve())) or not target.is_file():
            return connection.respond(404, "not found\n")
        body = target.read_bytes()
        ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        headers = Headers([("Content-Type", ctype), ("Content-Length", str(len(body)))])
        return Response(200, "OK", headers, body)

    return process_request


class InteractionServer:
    """WebSocket endpoint around one LiveSession."""

    def __init__(self, net: LstmNetwork | None, config: LoopConfig | None = None,
                 speed: float = 1.0, static_dir: Path | None = None, recognize=None):
        if speed <= 0:
            raise ValueError("speed must be positive")
        self.session = LiveSession(net, config, recognize=recognize)
        self.speed = speed
        self.static_dir = static_dir
        self.clients: set = set()
        self.commands: asyncio.Queue = asyncio.Queue()
        self.started = asyncio.Event()
        self._server = None

    @property
    def port(self) -> int:
        return next(iter(self._server.sockets)).getsockname()[1]

    def _apply_command(self, msg: dict) -> None:
        if msg["type"] == "perform":
            self.session.perform(msg["kind"])
        elif msg["type"] == "set_config":
            self.session.set_config(msg["key"], msg["value"])
        else:
            self.session.reset()

    async def _broadcast(self, payload: dict) -> None:
        if not self.clients:
            return
        raw = json.dumps(payload, separators=(",", ":"))
        websockets.broadcast(self.clients, raw)

    async def _engine(self) -> None:
        loop = asyncio.get_running_loop()
        period = 1.0 / (self.session.config.frame_rate * self.speed)
        next_at = loop.time()
        while True:
            while not self.commands.empty():
                msg = self.commands.get_nowait()
                try:
                    self._apply_command(msg)
                except Exception as exc:
                    await self._broadcast(_error(str(exc), msg.get("id")))
            self.session.step()
            if self.session.state.tick_index % SNAPSHOT_EVERY_TICKS == 0:
                await self._broadcast(self.session.snapshot())
            next_at += period
            delay = next_at - loop.time()
            if delay > 0:
                await asyncio.sleep(delay)
            else:
                next_at = loop.time()  # fell behind; don't try to catch up

    async def _handler(self, ws) -> None:
        self.clients.add(ws)
        try:
            await ws.send(json.dumps(self.session.snapshot(), separators=(",", ":")))
            async for raw in ws:
                try:
                    msg = parse_command(raw)
                except ValueError as exc:
                    await ws.send(json.dumps(_error(str(exc)), separators=(",", ":")))
                    continue
                await self.commands.put(msg)
                ack = {"v": PROTOCOL_VERSION, "type": "ack", "id": msg["id"]}
                await ws.send(json.dumps(ack, separators=(",", ":")))
        finally:
            self.clients.discard(ws)

    async def run(self, host: str = "127.0.0.1", port: int = 8765) -> None:
        """Serve until cancelled."""
        async with ws_serve(self._handler, host, port,
                            process_request=_static_responder(self.static_dir)) as server:
            self._server = server
            self.started.set()
            engine = asyncio.create_task(self._engine())
            try:
                await asyncio.Future()  # run forever
            finally:
                engine.cancel()
                try:
                    await engine
                except asyncio.CancelledError:
                    pass


def serve_loop(net: LstmNetwork, config: LoopConfig | None = None,
               host: str = "127.0.0.1", port: int = 8765, speed: float = 1.0,
               static_dir: Path | None = None) -> None:
    """Blocking entry point for the CLI."""
    server = InteractionServer(net, config, speed=speed, static_dir=static_dir)

    async def main() -> None:
        print(f"serving interaction loop on ws://{host}:{port} (speed x{speed})")
        await server.run(host, port)

    asyncio.run(main())
