"""Live simulation service.

Wire protocol: every message is one UTF-8 JSON object prefixed by a 4-byte
big-endian length. The same bytes travel over a raw TCP socket or inside
binary WebSocket frames, so one codec serves native clients and browsers.

Message types:
  state_frame  server -> client: tick, time, poses, distances, slacks, forces
  master_cmd   client -> server: master_id, clutch, dt, dr (since engage)
  set_param    client -> server: name in {beta, alpha}, value
  error        server -> client: code, detail

One authoritative simulation task steps the scenario; inbound commands are
queued and drained once per tick (latest-wins per master), parameter changes
apply at the next tick, and every Nth state is broadcast.
"""

from __future__ import annotations

import asyncio
import json
import struct
from dataclasses import dataclass, field

import numpy as np

from ..controller import MasterCommand
from .loop import QueueSource, run_simulation
from .scenario import Scenario

HEADER = struct.Struct(">I")
MAX_MESSAGE = 1 << 20


def encode_message(obj: dict) -> bytes:
    payload = json.dumps(obj, separators=(",", ":")).encode()
    return HEADER.pack(len(payload)) + payload


class MessageDecoder:
    """Incremental decoder for length-prefixed JSON streams."""

    def __init__(self):
        self._buf = bytearray()

    def feed(self, data: bytes) -> list[dict]:
        self._buf.extend(data)
        out = []
        while True:
            if len(self._buf) < HEADER.size:
                return out
            (length,) = HEADER.unpack(self._buf[: HEADER.size])
            if length > MAX_MESSAGE:
                raise ValueError(f"message of {length} bytes exceeds the {MAX_MESSAGE} byte cap")
            if len(self._buf) < HEADER.size + length:
                return out
            payload = bytes(self._buf[HEADER.size : HEADER.size + length])
            del self._buf[: HEADER.size + length]
            out.append(json.loads(payload))


def scene_description(scenario: Scenario) -> dict:
    """Static geometry for client-side rendering, sent with the first frame."""
    prims = []
    for c in scenario.constraints:
        spec = c.spec
        entry = {"name": spec.name, "zone": spec.zone, "d_safe": spec.d_safe}
        kind = type(c).__name__
        if kind == "LinePointConstraint":
            entry["kind"] = "entry_sphere"
            entry["center"] = c.target.position.tolist()
        elif kind == "PlanePointConstraint":
            entry["kind"] = "plane"
            entry["normal"] = c.plane.n.vec3().tolist()
            entry["offset"] = c.plane.delta
        elif kind == "LineLineConstraint":
            entry["kind"] = "shaft_shaft"
        else:
            entry["kind"] = "pair"
        prims.append(entry)
    return {
        "name": scenario.name,
        "robots": [r.name for r in scenario.robots],
        "joint_counts": [r.model.n for r in scenario.robots],
        "constraints": prims,
        "sampling_time": scenario.controller.sampling_time,
        "motion_scaling": scenario.controller.motion_scaling,
        "beta": scenario.controller.beta,
        "alpha": scenario.controller.alpha,
    }


@dataclass
class _Client:
    send: callable  # bytes -> None (schedules a write)
    sent_scene: bool = False


class SimServer:
    """Authoritative loop plus TCP and optional WebSocket transports."""

    def __init__(
        self,
        scenario: Scenario,
        port: int,
        ws_port: int | None = None,
        frame_divisor: int = 20,
        realtime: bool = False,
        duration: float | None = None,
    ):
        self.scenario = scenario
        self.port = port
        self.ws_port = ws_port
        self.frame_divisor = max(1, frame_divisor)
        self.realtime = realtime
        self.duration = duration
        self.source = QueueSource()
        self._clients: dict[int, _Client] = {}
        self._next_client = 0
        self._pending_params: dict[str, float] = {}
        self._scene = scene_description(scenario)
        self._stop = asyncio.Event()
        self.command_log: list[dict] = []
        self.started = asyncio.Event()
        self.tcp_port: int | None = None

    # -- transports ----------------------------------------------------

    async def _handle_tcp(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter):
        def send(data: bytes):
            if not writer.is_closing():
                writer.write(data)

        cid = self._register(send)
        decoder = MessageDecoder()
        try:
            while not self._stop.is_set():
                data = await reader.read(4096)
                if not data:
                    break
                try:
                    for msg in decoder.feed(data):
                        self._handle_message(msg, cid)
                except ValueError as e:
                    send(encode_message({"type": "error", "code": "bad_frame", "detail": str(e)}))
                    break
        finally:
            self._unregister(cid)
            writer.close()

    async def _handle_ws(self, ws):
        def send(data: bytes):
            asyncio.ensure_future(_ws_safe_send(ws, data))

        cid = self._register(send)
        try:
            async for raw in ws:
                if isinstance(raw, str):
                    raw = raw.encode()
                decoder = MessageDecoder()
                try:
                    for msg in decoder.feed(raw):
                        self._handle_message(msg, cid)
                except ValueError as e:
                    send(encode_message({"type": "error", "code": "bad_frame", "detail": str(e)}))
        finally:
            self._unregister(cid)

    def _register(self, send) -> int:
        cid = self._next_client
        self._next_client += 1
        self._clients[cid] = _Client(send)
        return cid

    def _unregister(self, cid: int):
        self._clients.pop(cid, None)

    # -- message handling ------------------------------------------------

    def _handle_message(self, msg: dict, cid: int):
        mtype = msg.get("type")
        if mtype == "master_cmd":
            try:
                cmd = MasterCommand.from_dict(msg)
            except (KeyError, TypeError, ValueError) as e:
                self._clients[cid].send(
                    encode_message({"type": "error", "code": "bad_master_cmd", "detail": str(e)})
                )
                return
            self.source.push(cmd)
        elif mtype == "set_param":
            name = msg.get("name")
            if name not in ("beta", "alpha"):
                self._clients[cid].send(
                    encode_message({"type": "error", "code": "bad_param", "detail": f"unknown parameter {name!r}"})
                )
                return
            try:
                value = float(msg.get("value"))
            except (TypeError, ValueError):
                self._clients[cid].send(
                    encode_message({"type": "error", "code": "bad_param", "detail": "value must be a number"})
                )
                return
            if not 0.0 <= value <= 1.0:
                self._clients[cid].send(
                    encode_message({"type": "error", "code": "bad_param", "detail": f"{name} must lie in [0, 1]"})
                )
                return
            self._pending_params[name] = value
        else:
            self._clients[cid].send(
                encode_message({"type": "error", "code": "bad_type", "detail": f"unknown message type {mtype!r}"})
            )

    # -- simulation ------------------------------------------------------

    def _broadcast(self, tick: int, t_now: float, diag, rec):
        if self._pending_params:
            # applied here so the change lands between ticks
            for name, value in self._pending_params.items():
                setattr(self.scenario.controller, name, value)
            self._pending_params.clear()
        if tick % self.frame_divisor:
            return
        frame = {
            "type": "state_frame",
            "tick": tick,
            "time": t_now,
            "poses": [p.tolist() for p in diag.poses],
            "q": [q.tolist() for q in rec.q],
            "t_err": [np.asarray(e).tolist() for e in rec.t_err],
            "distances": np.asarray(rec.distances).tolist(),
            "slacks": np.asarray(rec.slacks).tolist(),
            "forces": [np.asarray(f).tolist() for f in rec.forces],
            "beta": self.scenario.controller.beta,
            "alpha": self.scenario.controller.alpha,
            "qp_status": rec.qp_status,
        }
        data = encode_message(frame)
        bootstrap = None
        for client in list(self._clients.values()):
            if not client.sent_scene:
                if bootstrap is None:
                    bootstrap = encode_message({**frame, "scene": self._scene})
                client.send(bootstrap)
                client.sent_scene = True
            else:
                client.send(data)

    async def run(self):
        ts = self.scenario.controller.sampling_time
        server = await asyncio.start_server(self._handle_tcp, "127.0.0.1", self.port)
        self.tcp_port = server.sockets[0].getsockname()[1]
        ws_server = None
        if self.ws_port is not None:
            import websockets

            ws_server = await websockets.serve(self._handle_ws, "127.0.0.1", self.ws_port)
            self.ws_port = ws_server.sockets[0].getsockname()[1]
        self.started.set()

        total = self.duration if self.duration is not None else self.scenario.duration
        n_ticks = int(round(total / ts))
        loop = asyncio.get_running_loop()
        start = loop.time()
        tick = 0
        # batch ticks between awaits: asyncio sleep granularity is far above
        # the 1 kHz tick rate
        batch = max(1, int(0.005 / ts)) if self.realtime else 50
        try:
            while tick < n_ticks and not self._stop.is_set():
                upto = min(tick + batch, n_ticks)
                self._run_ticks(tick, upto, ts)
                tick = upto
                if self.realtime:
                    target = start + tick * ts
                    delay = target - loop.time()
                    if delay > 0:
                        await asyncio.sleep(delay)
                    else:
                        await asyncio.sleep(0)
                else:
                    await asyncio.sleep(0)
        finally:
            self._stop.set()
            server.close()
            await server.wait_closed()
            if ws_server is not None:
                ws_server.close()
                await ws_server.wait_closed()

    def _run_ticks(self, tick0: int, tick1: int, ts: float):
        if tick0 == 0:
            from .loop import Simulation

            self._sim = Simulation(self.scenario, self.source)
        for tick in range(tick0, tick1):
            diag, rec = self._sim.step(tick, record_commands=True)
            self._broadcast(tick, rec.time, diag, rec)
        self.command_log = self._sim.applied_commands

    def stop(self):
        self._stop.set()


async def _ws_safe_send(ws, data: bytes):
    try:
        await ws.send(data)
    except Exception:
        pass


def serve_scenario(scenario: Scenario, port: int, ws_port: int | None = None, **kwargs) -> SimServer:
    return SimServer(scenario, port, ws_port=ws_port, **kwargs)
