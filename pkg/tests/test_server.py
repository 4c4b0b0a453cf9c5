import json
import socket
import time
from pathlib import Path

import pytest

from sosim.metrics import export_csv
from sosim.server import SimService, encode_frame, replay_log
from sosim.world import WorldConfig, create_world


class NdjsonClient:
    def __init__(self, port, host="127.0.0.1"):
        self.sock = socket.create_connection((host, port), timeout=10)
        self.fh = self.sock.makefile("rb")
        self._id = 0

    def send(self, obj):
        self.sock.sendall(json.dumps(obj).encode() + b"\n")

    def send_raw(self, data: bytes):
        self.sock.sendall(data)

    def recv(self, timeout=10.0):
        self.sock.settimeout(timeout)
        line = self.fh.readline()
        if not line:
            raise ConnectionError("server closed")
        return json.loads(line)

    def request(self, obj, timeout=10.0):
        """Send with a fresh id and wait for the matching ack/error."""
        self._id += 1
        obj = dict(obj, id=self._id)
        self.send(obj)
        while True:
            msg = self.recv(timeout)
            if msg.get("id") == self._id:
                return msg

    def wait_for(self, mtype, timeout=10.0):
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            msg = self.recv(timeout)
            if msg["type"] == mtype:
                return msg
        raise TimeoutError(mtype)

    def close(self):
        try:
            self.sock.close()
        except OSError:
            pass


@pytest.fixture
def service(tmp_path):
    services = []

    def factory(model="walk", params=None, **kw):
        svc = SimService(model, params=params or {"n_nodes": 20}, seed=11, **kw)
        port = svc.start(port=0)
        services.append(svc)
        return svc, port

    yield factory
    for svc in services:
        svc.shutdown()


class TestProtocol:
    def test_schema_first_then_frame(self, service):
        _, port = service()
        client = NdjsonClient(port)
        schema = client.recv()
        assert schema["type"] == "schema"
        assert schema["model"] == "walk"
        names = {p["name"] for p in schema["params"]}
        assert {"n_nodes", "step"} <= names
        for p in schema["params"]:
            assert "live" in p and "default" in p
        frame = client.recv()
        assert frame["type"] == "frame"
        client.close()

    def test_setup_acks_then_tick0_frame(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        ack = client.request({"type": "control", "action": "setup"})
        assert ack["type"] == "ack" and ack["tick"] == 0
        frame = client.wait_for("frame")
        assert frame["tick"] == 0
        assert len(frame["agents"]) == 20
        ids = [a[0] for a in frame["agents"]]
        assert ids == sorted(ids)
        client.close()

    def test_malformed_json_keeps_connection(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        client.send_raw(b"this is not json\n")
        err = client.wait_for("error")
        assert "malformed" in err["message"]
        ack = client.request({"type": "control", "action": "setup"})
        assert ack["type"] == "ack"
        client.close()

    def test_step_while_running_rejected(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        client.request({"type": "control", "action": "setup"})
        client.request({"type": "control", "action": "go"})
        msg = client.request({"type": "control", "action": "step", "steps": 1})
        assert msg["type"] == "error" and "stop first" in msg["message"]
        client.request({"type": "control", "action": "stop"})
        client.close()

    def test_step_n_advances_exactly(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        client.request({"type": "control", "action": "setup"})
        ack = client.request({"type": "control", "action": "step", "steps": 5})
        assert ack["tick"] == 5

    def test_structural_param_deferred(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        ack = client.request({"type": "set-param", "name": "n_nodes", "value": 7})
        assert ack["deferred"] is True
        client.request({"type": "control", "action": "setup"})
        frame = client.wait_for("frame")
        assert len(frame["agents"]) == 7
        client.close()

    def test_live_param_immediate(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        ack = client.request({"type": "set-param", "name": "step", "value": 0.5})
        assert ack["deferred"] is False

    def test_unknown_param_rejected(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        msg = client.request({"type": "set-param", "name": "bogus", "value": 1})
        assert msg["type"] == "error"

    def test_command_recolors_on_next_frame(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        client.request({"type": "control", "action": "setup"})
        client.wait_for("frame")
        ack = client.request({"type": "command",
                              "text": "ask nodes [ set color green ]"})
        assert ack["type"] == "ack"
        frame = client.wait_for("frame")
        assert all(a[5] == 55.0 for a in frame["agents"])
        client.close()

    def test_command_error_carries_position(self, service):
        _, port = service()
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        client.request({"type": "control", "action": "setup"})
        msg = client.request({"type": "command", "text": "ask nodes [ set color"})
        assert msg["type"] == "error" and msg["line"] == 1 and "col" in msg

    def test_second_controller_rejected_until_release(self, service):
        _, port = service()
        first = NdjsonClient(port)
        first.recv(); first.recv()
        first.request({"type": "control", "action": "setup"})
        second = NdjsonClient(port)
        second.recv(); second.recv()
        msg = second.request({"type": "control", "action": "stop"})
        assert msg["type"] == "error"
        first.request({"type": "control", "action": "release"})
        msg = second.request({"type": "control", "action": "stop"})
        assert msg["type"] == "ack"
        first.close()
        second.close()


class TestEncodeFrame:
    def test_canonical_bytes(self):
        s = create_world(WorldConfig(seed=3))
        s.create_agents("node", 5)
        a = json.dumps(encode_frame(s, [], {}), separators=(",", ":"))
        b = json.dumps(encode_frame(s, [], {}), separators=(",", ":"))
        assert a == b

    def test_empty_world_frame(self):
        s = create_world(WorldConfig(seed=3))
        frame = encode_frame(s, [], {})
        assert frame["tick"] == 0 and frame["agents"] == [] and frame["links"] == []

    def test_hundred_agents_sorted(self):
        s = create_world(WorldConfig(seed=3))
        s.create_agents("node", 100)
        frame = encode_frame(s, [], {})
        assert len(frame["agents"]) == 100
        assert [a[0] for a in frame["agents"]] == list(range(100))


class TestReplay:
    def test_scripted_session_replays_to_identical_csv(self, tmp_path, service):
        log = tmp_path / "run.log"
        live_csv = tmp_path / "live.csv"
        svc, port = service(log_path=str(log), metrics_out=str(live_csv))
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        client.request({"type": "control", "action": "setup"})
        client.request({"type": "control", "action": "go"})
        time.sleep(0.08)
        client.request({"type": "command", "text": "ask nodes [ set power who ]"})
        time.sleep(0.05)
        client.request({"type": "command",
                        "text": "ask nodes with [power < 10] [set color green]"})
        time.sleep(0.05)
        ack = client.request({"type": "command", "text": "count nodes"})
        assert ack["values"] == ["20"]
        client.request({"type": "control", "action": "stop"})
        client.close()
        svc.shutdown()
        assert live_csv.exists()

        state = replay_log(log)
        replay_csv = tmp_path / "replay.csv"
        export_csv(state, replay_csv)
        assert replay_csv.read_bytes() == live_csv.read_bytes()
        assert state.tick > 0

    def test_replay_with_steps_and_params(self, tmp_path, service):
        log = tmp_path / "run.log"
        live_csv = tmp_path / "live.csv"
        svc, port = service(log_path=str(log), metrics_out=str(live_csv))
        client = NdjsonClient(port)
        client.recv(); client.recv()
        client.request({"type": "set-param", "name": "step", "value": 0.25})
        client.request({"type": "control", "action": "setup"})
        client.request({"type": "control", "action": "step", "steps": 7})
        client.request({"type": "command", "text": "ask nodes [ set color red ]"})
        client.request({"type": "control", "action": "step", "steps": 3})
        client.close()
        svc.shutdown()
        state = replay_log(log)
        replay_csv = tmp_path / "replay.csv"
        export_csv(state, replay_csv)
        assert replay_csv.read_bytes() == live_csv.read_bytes()
        assert state.tick == 10


class TestMetricsChannel:
    def test_lossless_metrics_during_go(self, service):
        svc, port = service(tick_rate=200.0)
        client = NdjsonClient(port)
        client.recv()
        client.recv()
        client.request({"type": "control", "action": "setup"})
        client.request({"type": "control", "action": "go"})
        seen = []
        deadline = time.monotonic() + 5.0
        while len(seen) < 20 and time.monotonic() < deadline:
            msg = client.recv()
            if msg["type"] == "metrics" and msg["tick"] >= 1:
                seen.append(msg["tick"])
        client.request({"type": "control", "action": "stop"})
        assert seen[:10] == list(range(seen[0], seen[0] + 10))
        client.close()
