"""Live-steering service over newline-delimited JSON.

One simulation instance per service.  All mutation happens on the sim
thread; client messages queue up and apply at tick boundaries, so every
frame is a consistent snapshot and a recorded session replays bit-exactly.
The same endpoint speaks three dialects, sniffed from the first bytes:
raw NDJSON over TCP, WebSocket (same JSON bodies, one per message), and
plain HTTP GET for the optional static UI bundle.
"""

from __future__ import annotations

import base64
import hashlib
import json
import queue
import socket
import struct
import threading
import time
from pathlib import Path

from .console import ConsoleError, Session
from .metrics import export_csv
from .models import Model, make_model
from .world import SimError, SimState, WorldConfig, create_world

_WS_MAGIC = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
_CONTENT_TYPES = {
    ".html": "text/html; charset=utf-8",
    ".js": "text/javascript; charset=utf-8",
    ".mjs": "text/javascript; charset=utf-8",
    ".css": "text/css; charset=utf-8",
    ".json": "application/json",
    ".map": "application/json",
    ".svg": "image/svg+xml",
    ".ico": "image/x-icon",
}


def _dumps(obj) -> bytes:
    return json.dumps(obj, separators=(",", ":")).encode() + b"\n"


def encode_frame(state: SimState, changed_patches, metrics_row) -> dict:
    """Canonical tick-boundary snapshot: agents sorted by id."""
    agents = []
    for aid in state.alive_ids():
        a = state.agent(int(aid))
        agents.append([a.id, a.breed, a.x, a.y, a.heading, a.color, a.state])
    links = [[a, b] for a, b, _ in state.links()]
    return {
        "type": "frame",
        "tick": state.tick,
        "agents": agents,
        "links": links,
        "patches": changed_patches,
        "metrics": metrics_row,
    }


class _Client:
    _next_id = 0

    def __init__(self, conn: socket.socket, kind: str):
        self.conn = conn
        self.kind = kind  # "tcp" | "ws"
        self.channels = {"frames", "metrics"}
        self.outq: queue.Queue = queue.Queue()
        self.closed = False
        _Client._next_id += 1
        self.client_id = _Client._next_id
        self.writer = threading.Thread(target=self._write_loop, daemon=True)
        self.writer.start()

    def send(self, payload: bytes, droppable: bool = False) -> None:
        if self.closed:
            return
        if droppable and self.outq.qsize() > 100:
            return  # coalesce frames under backpressure; metrics stay lossless
        self.outq.put(payload)

    def _write_loop(self) -> None:
        while True:
            payload = self.outq.get()
            if payload is None or self.closed:
                return
            try:
                if self.kind == "ws":
                    self.conn.sendall(_ws_text_frame(payload.rstrip(b"\n")))
                else:
                    self.conn.sendall(payload)
            except OSError:
                self.closed = True
                return

    def close(self) -> None:
        self.closed = True
        self.outq.put(None)
        try:
            self.conn.close()
        except OSError:
            pass


class SimService:
    """Owns one simulation; serves N viewers and at most one controller."""

    def __init__(self, model_name: str, world: dict | None = None,
                 params: dict | None = None, seed: int = 42,
                 frame_rate: float = 20.0, tick_rate: float = 0.0,
                 log_path=None, metrics_out=None, ui_dir=None):
        self.model_name = model_name
        self.world = dict(world or {})
        self.seed = int(seed)
        self.model: Model = make_model(model_name, params)
        self.state = create_world(WorldConfig(
            width=int(self.world.get("width", 33)),
            height=int(self.world.get("height", 33)),
            wrap=bool(self.world.get("wrap", True)),
            seed=self.seed,
        ))
        self.session = Session(self.state)
        self.frame_rate = frame_rate
        self.tick_rate = tick_rate
        self.metrics_out = metrics_out
        self.ui_dir = Path(ui_dir) if ui_dir else None
        self._log_fh = open(log_path, "w") if log_path else None
        self._log({"type": "header", "model": model_name, "world": self.world,
                   "params": dict(self.model.params), "seed": self.seed})

        self.msgq: queue.Queue = queue.Queue()
        self.clients: list[_Client] = []
        self.clients_lock = threading.Lock()
        self.controller: int | None = None
        self.running = False
        self.was_setup = False
        self.pending_structural: dict = {}
        self._shutdown = threading.Event()
        self._last_frame_time = 0.0
        self._last_pcolor = self.state.pcolor.copy()
        self._sim_thread: threading.Thread | None = None
        self._server_sock: socket.socket | None = None

    # ------------------------------------------------------------------
    # lifecycle
    # ------------------------------------------------------------------

    def start(self, host: str = "127.0.0.1", port: int = 0) -> int:
        sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        sock.bind((host, port))
        sock.listen(16)
        self._server_sock = sock
        self._sim_thread = threading.Thread(target=self._sim_loop, daemon=True)
        self._sim_thread.start()
        threading.Thread(target=self._accept_loop, daemon=True).start()
        return sock.getsockname()[1]

    def join(self) -> None:
        while not self._shutdown.wait(0.2):
            pass

    def shutdown(self) -> None:
        if self._shutdown.is_set():
            return
        self._shutdown.set()
        if self._sim_thread is not None:
            self._sim_thread.join(timeout=5.0)
        if self._server_sock is not None:
            try:
                self._server_sock.close()
            except OSError:
                pass
        with self.clients_lock:
            clients = list(self.clients)
        for c in clients:
            c.close()

    # ------------------------------------------------------------------
    # sim thread
    # ------------------------------------------------------------------

    def _sim_loop(self) -> None:
        while not self._shutdown.is_set():
            while True:
                try:
                    client, msg = self.msgq.get_nowait()
                except queue.Empty:
                    break
                self._handle(client, msg)
            if self._shutdown.is_set():
                break
            if self.running:
                self._do_tick()
                if self.tick_rate > 0:
                    time.sleep(1.0 / self.tick_rate)
            else:
                try:
                    client, msg = self.msgq.get(timeout=0.05)
                except queue.Empty:
                    continue
                self._handle(client, msg)
        self._finalize()

    def _finalize(self) -> None:
        self._log({"type": "end", "tick": self.state.tick})
        if self._log_fh:
            self._log_fh.close()
            self._log_fh = None
        if self.metrics_out:
            export_csv(self.state, self.metrics_out)

    def _do_tick(self) -> None:
        try:
            self.state.step()
        except SimError as exc:
            self.running = False
            self._broadcast({"type": "error", "message": f"run failed: {exc}"})
            self._log_control("stop", auto=True)
            return
        self._broadcast_metrics()
        now = time.monotonic()
        if self.frame_rate <= 0 or now - self._last_frame_time >= 1.0 / self.frame_rate:
            self._broadcast_frame()
            self._last_frame_time = now
        if self.model.done(self.state):
            self.running = False
            self._log_control("stop", auto=True)
            self._broadcast_frame()
            self._broadcast_status()

    # ------------------------------------------------------------------
    # logging
    # ------------------------------------------------------------------

    def _log(self, obj: dict) -> None:
        if self._log_fh:
            self._log_fh.write(json.dumps(obj, separators=(",", ":")) + "\n")
            self._log_fh.flush()

    def _log_control(self, action: str, steps: int | None = None, auto: bool = False) -> None:
        entry = {"type": "control", "tick": self.state.tick, "action": action}
        if steps is not None:
            entry["steps"] = steps
        if auto:
            entry["auto"] = True
        self._log(entry)

    # ------------------------------------------------------------------
    # message handling (sim thread only)
    # ------------------------------------------------------------------

    def _handle(self, client: _Client | None, msg) -> None:
        if client is not None and client.closed:
            if self.controller == client.client_id:
                self.controller = None
            return
        if not isinstance(msg, dict) or "type" not in msg:
            self._reply(client, {"type": "error", "message": "malformed message"})
            return
        mid = msg.get("id")
        mtype = msg["type"]
        try:
            if mtype == "subscribe":
                channels = msg.get("channels", ["frames", "metrics"])
                client.channels = set(channels) & {"frames", "metrics"}
                self._reply(client, {"type": "ack", "id": mid,
                                     "channels": sorted(client.channels)})
                if "frames" in client.channels:
                    self._send_full_frame(client)
                return
            if mtype in ("command", "control", "set-param"):
                if not self._claim_controller(client):
                    self._reply(client, {"type": "error", "id": mid,
                                         "message": "another client controls this run"})
                    return
            if mtype == "command":
                self._handle_command(client, mid, msg)
            elif mtype == "control":
                self._handle_control(client, mid, msg)
            elif mtype == "set-param":
                self._handle_set_param(client, mid, msg)
            else:
                self._reply(client, {"type": "error", "id": mid,
                                     "message": f"unknown message type {mtype!r}"})
        except SimError as exc:
            self._reply(client, {"type": "error", "id": mid, "message": str(exc)})

    def _claim_controller(self, client: _Client | None) -> bool:
        if client is None:
            return True
        if self.controller is None:
            self.controller = client.client_id
        return self.controller == client.client_id

    def _handle_command(self, client, mid, msg) -> None:
        text = msg.get("text", "")
        if not isinstance(text, str) or not text.strip():
            self._reply(client, {"type": "error", "id": mid, "message": "empty command"})
            return
        self._log({"type": "command", "tick": self.state.tick, "text": text})
        try:
            values = self.session.run(text)
        except ConsoleError as err:
            self._reply(client, {"type": "error", "id": mid, "message": err.message,
                                 "line": err.line, "col": err.col})
            return
        from .console.interp import format_value
        self._reply(client, {"type": "ack", "id": mid,
                             "values": [format_value(v) for v in values]})
        if not self.running:
            self._broadcast_frame()

    def _handle_control(self, client, mid, msg) -> None:
        action = msg.get("action")
        if action == "setup":
            if self.running:
                self._reply(client, {"type": "error", "id": mid, "message": "stop first"})
                return
            self._setup()
            self._reply(client, {"type": "ack", "id": mid, "action": "setup",
                                 "tick": self.state.tick})
            self._broadcast_frame()
            self._broadcast_metrics_snapshot()
            self._broadcast_status()
        elif action == "go":
            if not self.was_setup:
                self._setup()
            self._log_control("go")
            self.running = True
            self._reply(client, {"type": "ack", "id": mid, "action": "go"})
            self._broadcast_status()
        elif action == "stop":
            self.running = False
            self._log_control("stop")
            self._reply(client, {"type": "ack", "id": mid, "action": "stop",
                                 "tick": self.state.tick})
            self._broadcast_frame()
            self._broadcast_status()
        elif action == "step":
            if self.running:
                self._reply(client, {"type": "error", "id": mid, "message": "stop first"})
                return
            steps = int(msg.get("steps", 1))
            if steps < 1:
                self._reply(client, {"type": "error", "id": mid,
                                     "message": "steps must be >= 1"})
                return
            if not self.was_setup:
                self._setup()
            self._log_control("step", steps=steps)
            for _ in range(steps):
                self.state.step()
                self._broadcast_metrics()
                self._broadcast_frame()
            self._reply(client, {"type": "ack", "id": mid, "action": "step",
                                 "tick": self.state.tick})
        elif action == "release":
            self.controller = None
            self._reply(client, {"type": "ack", "id": mid, "action": "release"})
        else:
            self._reply(client, {"type": "error", "id": mid,
                                 "message": f"unknown control action {action!r}"})

    def _handle_set_param(self, client, mid, msg) -> None:
        name = msg.get("name")
        value = msg.get("value")
        spec = next((s for s in self.model.schema if s.name == name), None)
        if spec is None:
            self._reply(client, {"type": "error", "id": mid,
                                 "message": f"unknown parameter {name!r}"})
            return
        from .models import coerce_value
        value = coerce_value(spec, value)
        self._log({"type": "set-param", "tick": self.state.tick, "name": name,
                   "value": value, "live": spec.live})
        if spec.live:
            self.model.params[name] = value
            self._reply(client, {"type": "ack", "id": mid, "name": name,
                                 "value": value, "deferred": False})
        else:
            self.pending_structural[name] = value
            self._reply(client, {"type": "ack", "id": mid, "name": name,
                                 "value": value, "deferred": True})

    def _setup(self) -> None:
        self._log_control("setup")
        self.state.clear_all()
        for name, value in self.pending_structural.items():
            self.model.params[name] = value
        self.pending_structural.clear()
        self.model.setup(self.state)
        self.was_setup = True
        self._last_pcolor = self.state.pcolor.copy()
        self._last_pcolor.fill(-1.0)  # force a full patch diff on the next frame

    # ------------------------------------------------------------------
    # outbound
    # ------------------------------------------------------------------

    def _reply(self, client: _Client | None, obj: dict) -> None:
        if client is not None:
            client.send(_dumps(obj))

    def _broadcast(self, obj: dict) -> None:
        payload = _dumps(obj)
        with self.clients_lock:
            clients = list(self.clients)
        for c in clients:
            c.send(payload)

    def _metrics_row(self) -> dict:
        return {name: (self.state.series[name][-1] if self.state.series[name] else None)
                for name, _ in self.state.reporters}

    def _broadcast_metrics(self) -> None:
        obj = {"type": "metrics", "tick": self.state.tick, "values": self._metrics_row()}
        payload = _dumps(obj)
        with self.clients_lock:
            clients = list(self.clients)
        for c in clients:
            if "metrics" in c.channels:
                c.send(payload)

    def _broadcast_metrics_snapshot(self) -> None:
        obj = {"type": "metrics", "tick": self.state.tick,
               "values": {name: float(fn(self.state)) for name, fn in self.state.reporters}}
        payload = _dumps(obj)
        with self.clients_lock:
            clients = list(self.clients)
        for c in clients:
            if "metrics" in c.channels:
                c.send(payload)

    def _broadcast_status(self) -> None:
        self._broadcast({"type": "status", "running": self.running,
                         "tick": self.state.tick})

    def _changed_patches(self) -> list:
        import numpy as np
        diff = np.argwhere(self.state.pcolor != self._last_pcolor)
        c = self.state.config
        out = [[int(ix) + c.min_pxcor, int(iy) + c.min_pycor,
                float(self.state.pcolor[iy, ix])] for iy, ix in diff]
        self._last_pcolor = self.state.pcolor.copy()
        return out

    def _broadcast_frame(self) -> None:
        frame = encode_frame(self.state, self._changed_patches(), self._metrics_row())
        payload = _dumps(frame)
        with self.clients_lock:
            clients = list(self.clients)
        for c in clients:
            if "frames" in c.channels:
                c.send(payload, droppable=True)

    def _send_full_frame(self, client: _Client) -> None:
        c = self.state.config
        patches = [[px, py, float(self.state.pcolor[py - c.min_pycor, px - c.min_pxcor])]
                   for py in range(c.min_pycor, c.max_pycor + 1)
                   for px in range(c.min_pxcor, c.max_pxcor + 1)]
        frame = encode_frame(self.state, patches, self._metrics_row())
        client.send(_dumps(frame))

    def _schema_message(self) -> dict:
        return {
            "type": "schema",
            "model": self.model_name,
            "params": self.model.schema_dict(),
            "reporters": [name for name, _ in self.state.reporters],
            "world": {"width": self.state.config.width,
                      "height": self.state.config.height,
                      "wrap": self.state.config.wrap,
                      "seed": self.seed},
        }

    # ------------------------------------------------------------------
    # network threads
    # ------------------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._shutdown.is_set():
            try:
                conn, _ = self._server_sock.accept()
            except OSError:
                return
            threading.Thread(target=self._serve_conn, args=(conn,), daemon=True).start()

    def _serve_conn(self, conn: socket.socket) -> None:
        # HTTP and WebSocket clients speak first (the GET line); a plain TCP
        # client waits for the schema, so a short peek timeout disambiguates.
        head = b""
        try:
            conn.settimeout(0.25)
            head = conn.recv(4, socket.MSG_PEEK)
        except socket.timeout:
            pass
        except OSError:
            return
        conn.settimeout(None)
        if head.startswith(b"GET"):
            self._serve_http(conn)
        else:
            self._attach_client(conn, "tcp")

    def _attach_client(self, conn: socket.socket, kind: str) -> None:
        client = _Client(conn, kind)
        with self.clients_lock:
            self.clients.append(client)
        client.send(_dumps(self._schema_message()))
        self._send_full_frame(client)
        try:
            if kind == "tcp":
                self._read_ndjson(client)
            else:
                self._read_ws(client)
        finally:
            client.close()
            with self.clients_lock:
                if client in self.clients:
                    self.clients.remove(client)
            self.msgq.put((client, {"type": "_disconnect"}))

    def _read_ndjson(self, client: _Client) -> None:
        fh = client.conn.makefile("rb")
        try:
            for raw in fh:
                line = raw.strip()
                if not line:
                    continue
                try:
                    msg = json.loads(line)
                except json.JSONDecodeError:
                    client.send(_dumps({"type": "error", "message": "malformed JSON"}))
                    continue
                self.msgq.put((client, msg))
        except OSError:
            pass  # client went away mid-read

    def _read_ws(self, client: _Client) -> None:
        try:
            while not client.closed:
                data = _ws_read_message(client.conn)
                if data is None:
                    return
                try:
                    msg = json.loads(data)
                except json.JSONDecodeError:
                    client.send(_dumps({"type": "error", "message": "malformed JSON"}))
                    continue
                self.msgq.put((client, msg))
        except OSError:
            pass

    # ------------------------------------------------------------------
    # http / websocket plumbing
    # ------------------------------------------------------------------

    def _serve_http(self, conn: socket.socket) -> None:
        # byte-wise read up to the blank line so no frame bytes get buffered away
        raw = b""
        while b"\r\n\r\n" not in raw and len(raw) < 65536:
            chunk = conn.recv(1)
            if not chunk:
                return
            raw += chunk
        head_lines = raw.split(b"\r\n")
        request = head_lines[0].decode("latin-1").strip()
        headers = {}
        for line_bytes in head_lines[1:]:
            line = line_bytes.decode("latin-1").strip()
            if ":" in line:
                key, value = line.split(":", 1)
                headers[key.strip().lower()] = value.strip()
        if headers.get("upgrade", "").lower() == "websocket":
            key = headers.get("sec-websocket-key", "")
            accept = base64.b64encode(
                hashlib.sha1((key + _WS_MAGIC).encode()).digest()).decode()
            conn.sendall(
                b"HTTP/1.1 101 Switching Protocols\r\n"
                b"Upgrade: websocket\r\nConnection: Upgrade\r\n"
                b"Sec-WebSocket-Accept: " + accept.encode() + b"\r\n\r\n")
            self._attach_client(conn, "ws")
            return
        path = request.split(" ")[1] if len(request.split(" ")) > 1 else "/"
        self._serve_static(conn, path)

    def _serve_static(self, conn: socket.socket, path: str) -> None:
        body, status, ctype = b"not found", "404 Not Found", "text/plain"
        if self.ui_dir is not None:
            rel = path.split("?")[0].lstrip("/") or "index.html"
            target = (self.ui_dir / rel).resolve()
            if str(target).startswith(str(self.ui_dir.resolve())) and target.is_file():
                body = target.read_bytes()
                status = "200 OK"
                ctype = _CONTENT_TYPES.get(target.suffix, "application/octet-stream")
        conn.sendall(f"HTTP/1.1 {status}\r\nContent-Type: {ctype}\r\n"
                     f"Content-Length: {len(body)}\r\nConnection: close\r\n\r\n".encode()
                     + body)
        conn.close()


def _ws_text_frame(payload: bytes) -> bytes:
    n = len(payload)
    if n < 126:
        header = struct.pack("!BB", 0x81, n)
    elif n < (1 << 16):
        header = struct.pack("!BBH", 0x81, 126, n)
    else:
        header = struct.pack("!BBQ", 0x81, 127, n)
    return header + payload


def _recv_exact(conn: socket.socket, n: int) -> bytes | None:
    buf = b""
    while len(buf) < n:
        chunk = conn.recv(n - len(buf))
        if not chunk:
            return None
        buf += chunk
    return buf


def _ws_read_message(conn: socket.socket) -> bytes | None:
    """One complete text/binary message; handles ping, close, continuation."""
    message = b""
    while True:
        head = _recv_exact(conn, 2)
        if head is None:
            return None
        fin = head[0] >> 7
        opcode = head[0] & 0x0F
        masked = head[1] >> 7
        length = head[1] & 0x7F
        if length == 126:
            ext = _recv_exact(conn, 2)
            if ext is None:
                return None
            length = struct.unpack("!H", ext)[0]
        elif length == 127:
            ext = _recv_exact(conn, 8)
            if ext is None:
                return None
            length = struct.unpack("!Q", ext)[0]
        mask = _recv_exact(conn, 4) if masked else b"\x00\x00\x00\x00"
        if mask is None:
            return None
        payload = _recv_exact(conn, length) if length else b""
        if payload is None:
            return None
        if masked:
            payload = bytes(b ^ mask[i % 4] for i, b in enumerate(payload))
        if opcode == 0x8:  # close
            try:
                conn.sendall(b"\x88\x00")
            except OSError:
                pass
            return None
        if opcode == 0x9:  # ping -> pong
            conn.sendall(b"\x8A" + bytes([len(payload)]) + payload)
            continue
        if opcode == 0xA:  # pong
            continue
        message += payload
        if fin:
            return message


# ----------------------------------------------------------------------
# replay
# ----------------------------------------------------------------------

def replay_log(log_path, config_path=None) -> SimState:
    """Re-run a recorded session headlessly; returns the final state.

    Events apply at their recorded tick, drawing from the same named RNG
    substreams, so the metric series matches the live session byte for byte.
    """
    events = []
    with open(log_path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(json.loads(line))
    if not events:
        raise SimError("empty command log")
    header = events[0]
    if header.get("type") != "header":
        raise SimError("command log must start with a header line")
    world = dict(header.get("world", {}))
    params = dict(header.get("params", {}))
    model_name = header["model"]
    seed = header.get("seed", world.get("seed", 42))
    if config_path:
        cfg = json.loads(Path(config_path).read_text())
        world.update(cfg.get("world", {}))
        params.update(cfg.get("params", {}))
        model_name = cfg.get("model", model_name)
        seed = cfg.get("world", {}).get("seed", seed)

    state = create_world(WorldConfig(
        width=int(world.get("width", 33)),
        height=int(world.get("height", 33)),
        wrap=bool(world.get("wrap", True)),
        seed=int(seed),
    ))
    model = make_model(model_name, params)
    session = Session(state)
    pending: dict = {}

    def advance_to(tick: int) -> None:
        while state.tick < tick:
            state.step()

    for event in events[1:]:
        etype = event.get("type")
        if etype == "control":
            action = event["action"]
            if action == "setup":
                state.clear_all()
                for name, value in pending.items():
                    model.params[name] = value
                pending.clear()
                model.setup(state)
            elif action in ("stop", "go", "step"):
                advance_to(event["tick"])
                if action == "step":
                    for _ in range(int(event.get("steps", 1))):
                        state.step()
        elif etype == "command":
            advance_to(event["tick"])
            try:
                session.run(event["text"])
            except ConsoleError:
                pass  # the live session surfaced the same error at the same point
        elif etype == "set-param":
            advance_to(event["tick"])
            if event.get("live"):
                model.params[event["name"]] = event["value"]
            else:
                pending[event["name"]] = event["value"]
        elif etype == "end":
            advance_to(event["tick"])
    return state
